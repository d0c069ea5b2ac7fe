#include "spinenv/graphical.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "spinenv/rng.hpp"

namespace spinenv {

namespace {

constexpr std::uint64_t kBackgroundStream = 0;
constexpr std::uint64_t kSpinStream = 1;

void check_windows_fit(const SpinRatePair& spin, const DerivedConstants& k) {
  for (int i = 0; i < 2; ++i) {
    const auto& c = spin.for_background(i);
    const double cap = i ? k.c_bar1 : k.c_bar0;
    for (unsigned t = 0; t < 8; ++t) {
      if (c[t] + c[t ^ 2u] > cap) {
        throw std::logic_error("acceptance windows exceed the dominating spin rate");
      }
    }
  }
}

bool local_order_ok(const std::vector<Configuration>& layers, int x) {
  if (layers.size() < 2) return true;
  const int lo = layers.front()[x];
  const int hi = layers.back()[x];
  if (lo > hi) return false;
  for (std::size_t j = 1; j + 1 < layers.size(); ++j) {
    if (layers[j][x] < lo || layers[j][x] > hi) return false;
  }
  return true;
}

bool before(double t1, int s1, ClockKind k1, double t2, int s2, ClockKind k2) {
  return std::tie(t1, s1, k1) < std::tie(t2, s2, k2);
}

/// Applies one spin ring at `site` to every layer. Returns flips via sink.
template <class Sink>
void apply_spin_ring(const ModelSpec& spec, const DerivedConstants& k, const SiteClocks& clocks,
                     std::uint32_t n, int site, double time, int beta_bit,
                     std::vector<Configuration>& layers, Sink&& sink) {
  const double mark = beta_bit ? clocks.spin_marks1[n] : clocks.spin_marks0[n];
  const auto& c = spec.spin.for_background(beta_bit);
  // Decide all layers before flipping any; each reads only its own state.
  std::uint32_t flips = 0;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const int bit = layers[j][site];
    if (spin_mark_accepts(k, beta_bit, mark, bit, c(triple_at(layers[j], site)))) {
      flips |= 1u << j;
    }
  }
  for (std::size_t j = 0; j < layers.size(); ++j) {
    if (!(flips & (1u << j))) continue;
    const auto from = static_cast<std::uint8_t>(layers[j][site]);
    layers[j].flip(site);
    sink(FlipRecord{time, site, static_cast<int>(j) + 1, from, static_cast<std::uint8_t>(from ^ 1u)});
  }
}

bool apply_background_ring(const ModelSpec& spec, const DerivedConstants& k,
                           const SiteClocks& clocks, std::uint32_t n, int site,
                           Configuration& beta) {
  const double rate = spec.env.rate(neighborhood_index(beta, site, spec.env.range()));
  if (background_mark_accepts(k.b_bar, clocks.background_marks[n], beta[site], rate)) {
    beta.flip(site);
    return true;
  }
  return false;
}

}  // namespace

std::size_t EventStream::event_count() const {
  std::size_t total = 0;
  for (const auto& s : sites) total += s.background_times.size() + s.spin_times.size();
  return total;
}

std::vector<ClockEvent> EventStream::merged() const {
  std::vector<ClockEvent> out;
  out.reserve(event_count());
  for (std::size_t x = 0; x < sites.size(); ++x) {
    const auto& s = sites[x];
    for (std::uint32_t n = 0; n < s.background_times.size(); ++n) {
      out.push_back({s.background_times[n], static_cast<int>(x), ClockKind::background, n});
    }
    for (std::uint32_t n = 0; n < s.spin_times.size(); ++n) {
      out.push_back({s.spin_times[n], static_cast<int>(x), ClockKind::spin, n});
    }
  }
  std::sort(out.begin(), out.end(), [](const ClockEvent& a, const ClockEvent& b) {
    return before(a.time, a.site, a.kind, b.time, b.site, b.kind);
  });
  return out;
}

EventStream generate_streams(const ModelSpec& spec, std::uint64_t seed, double t_max,
                             const StreamOptions& options) {
  if (!(t_max >= 0.0)) throw ModelError("horizon must be nonnegative");
  EventStream es;
  es.seed = seed;
  es.t_max = t_max;
  es.marks = options.marks;
  es.constants = dominating_rates(spec);
  check_windows_fit(spec.spin, es.constants);
  const auto& k = es.constants;
  es.sites.resize(static_cast<std::size_t>(spec.lattice_size));
  std::size_t total = 0;
  auto charge = [&] {
    if (++total > options.max_events) {
      std::ostringstream os;
      os << "event stream exceeds the cap of " << options.max_events << " clock rings";
      throw CapacityError(os.str());
    }
  };
  for (std::size_t x = 0; x < es.sites.size(); ++x) {
    auto& site = es.sites[x];
    if (k.b_bar > 0) {
      RandomStream rng(derive_seed(seed, x, kBackgroundStream));
      for (double t = rng.exponential(k.b_bar); t <= t_max; t += rng.exponential(k.b_bar)) {
        charge();
        site.background_times.push_back(t);
        site.background_marks.push_back(k.b_bar * rng.uniform());
      }
    }
    if (k.c_bar > 0) {
      RandomStream rng(derive_seed(seed, x, kSpinStream));
      for (double t = rng.exponential(k.c_bar); t <= t_max; t += rng.exponential(k.c_bar)) {
        charge();
        const double v0 = rng.uniform();
        const double v1 = rng.uniform();
        site.spin_times.push_back(t);
        site.spin_marks0.push_back(k.c_bar0 * v0);
        site.spin_marks1.push_back(k.c_bar1 * (options.marks == MarkScheme::comonotone ? v0 : v1));
      }
    }
  }
  return es;
}

std::vector<std::string> Trajectory::layer_names() const {
  std::vector<std::string> names{"beta"};
  for (std::size_t j = 0; j < initial.spins.size(); ++j) {
    names.push_back(spin_layer_name(j, initial.spins.size()));
  }
  return names;
}

JointState replay(const JointState& initial, std::span<const FlipRecord> events) {
  JointState s = initial;
  for (const auto& e : events) {
    auto& layer = e.layer == 0 ? s.beta : s.spins.at(static_cast<std::size_t>(e.layer - 1));
    if (layer[e.site] != e.from) throw std::logic_error("event log does not match state");
    layer.set(e.site, e.to);
  }
  return s;
}

bool spin_mark_accepts(const DerivedConstants& k, int beta_bit, double mark, int center_bit,
                       double rate) {
  if (rate <= 0.0) return false;
  const double cap = beta_bit ? k.c_bar1 : k.c_bar0;
  const double scaled = cap / k.c_bar * rate;
  return center_bit == 0 ? mark >= cap - scaled : mark < scaled;
}

bool background_mark_accepts(double b_bar, double mark, int center_bit, double rate) {
  if (rate <= 0.0) return false;
  return center_bit == 0 ? mark >= b_bar - rate : mark < rate;
}

Trajectory evolve_background(const ModelSpec& spec, const Configuration& beta0,
                             const EventStream& es) {
  if (beta0.size() != spec.lattice_size) throw ModelError("background has the wrong length");
  Trajectory traj;
  traj.t_max = es.t_max;
  traj.initial.beta = beta0;
  Configuration beta = beta0;
  for (const auto& ev : es.merged()) {
    if (ev.kind != ClockKind::background) continue;
    const auto from = static_cast<std::uint8_t>(beta[ev.site]);
    if (apply_background_ring(spec, es.constants, es.sites[static_cast<std::size_t>(ev.site)],
                              ev.index, ev.site, beta)) {
      traj.events.push_back({ev.time, ev.site, 0, from, static_cast<std::uint8_t>(from ^ 1u)});
    }
  }
  traj.final_state.beta = std::move(beta);
  return traj;
}

Trajectory evolve_spins(const ModelSpec& spec, const Trajectory& background,
                        const std::vector<Configuration>& eta0, const EventStream& es) {
  if (eta0.empty()) throw ModelError("evolve_spins needs at least one spin layer");
  for (const auto& e : eta0) {
    if (e.size() != spec.lattice_size) throw ModelError("spin layer has the wrong length");
  }
  Trajectory traj;
  traj.t_max = es.t_max;
  traj.initial.beta = background.initial.beta;
  traj.initial.spins = eta0;
  const bool check_order = ordered(traj.initial);

  Configuration beta = background.initial.beta;
  std::vector<Configuration> layers = eta0;
  std::size_t next_bg = 0;
  auto apply_background_until = [&](double t, int site, ClockKind kind) {
    while (next_bg < background.events.size()) {
      const auto& f = background.events[next_bg];
      if (!before(f.time, f.site, ClockKind::background, t, site, kind)) break;
      beta.set(f.site, f.to);
      traj.events.push_back(f);
      ++next_bg;
    }
  };

  auto sink = [&](const FlipRecord& r) { traj.events.push_back(r); };
  for (const auto& ev : es.merged()) {
    if (ev.kind != ClockKind::spin) continue;
    apply_background_until(ev.time, ev.site, ev.kind);
    apply_spin_ring(spec, es.constants, es.sites[static_cast<std::size_t>(ev.site)], ev.index,
                    ev.site, ev.time, beta[ev.site], layers, sink);
    if (check_order && !local_order_ok(layers, ev.site)) ++traj.order_violations;
  }
  apply_background_until(es.t_max + 1.0, 0, ClockKind::background);
  traj.final_state.beta = std::move(beta);
  traj.final_state.spins = std::move(layers);
  return traj;
}

Trajectory simulate_graphical(const ModelSpec& spec, const JointState& initial,
                              const EventStream& es) {
  return evolve_spins(spec, evolve_background(spec, initial.beta, es), initial.spins, es);
}

GraphicalRunner::GraphicalRunner(const ModelSpec& spec, const EventStream& es)
    : spec_(spec), es_(es), events_(es.merged()) {}

void GraphicalRunner::advance_to(double t, std::vector<JointState>& copies,
                                 const FlipSink& sink, const RingHook& after_ring) {
  const auto& k = es_.constants;
  for (; cursor_ < events_.size() && events_[cursor_].time <= t; ++cursor_) {
    const auto& ev = events_[cursor_];
    const auto& clocks = es_.sites[static_cast<std::size_t>(ev.site)];
    for (std::size_t c = 0; c < copies.size(); ++c) {
      auto& s = copies[c];
      if (ev.kind == ClockKind::background) {
        const auto from = static_cast<std::uint8_t>(s.beta[ev.site]);
        if (apply_background_ring(spec_, k, clocks, ev.index, ev.site, s.beta) && sink) {
          sink(static_cast<int>(c),
               FlipRecord{ev.time, ev.site, 0, from, static_cast<std::uint8_t>(from ^ 1u)});
        }
      } else {
        apply_spin_ring(spec_, k, clocks, ev.index, ev.site, ev.time, s.beta[ev.site], s.spins,
                        [&](const FlipRecord& r) {
                          if (sink) sink(static_cast<int>(c), r);
                        });
      }
    }
    if (after_ring) after_ring(ev);
  }
  now_ = std::max(now_, t);
}

AcceptanceWindow acceptance_window(int center_bit, double rate) {
  return {center_bit == 0 ? Anchor::top : Anchor::bottom, rate};
}

std::map<std::uint32_t, double> window_rates(const SpinRatePair& spin, const DerivedConstants& k,
                                             int beta_bit, std::span<const Triple> layers) {
  const auto& c = spin.for_background(beta_bit);
  std::vector<std::pair<double, std::uint32_t>> top;
  std::vector<std::pair<double, std::uint32_t>> bottom;
  for (std::size_t j = 0; j < layers.size(); ++j) {
    const auto w = acceptance_window(layers[j].center, c(layers[j]));
    (w.anchor == Anchor::top ? top : bottom).emplace_back(w.extent, 1u << j);
  }
  auto reach = [](const auto& v) {
    double m = 0;
    for (const auto& [e, bit] : v) m = std::max(m, e);
    return m;
  };
  if (reach(top) + reach(bottom) > k.c_bar) {
    throw std::logic_error("up and down acceptance windows overlap");
  }

  std::map<std::uint32_t, double> rates;
  for (auto* side : {&top, &bottom}) {
    std::sort(side->begin(), side->end());
    double depth = 0;
    for (std::size_t i = 0; i < side->size(); ++i) {
      const double extent = (*side)[i].first;
      if (extent <= depth) continue;
      // Marks at depth in (depth, extent] lie inside every window at least
      // this deep.
      std::uint32_t mask = 0;
      for (std::size_t j = i; j < side->size(); ++j) mask |= (*side)[j].second;
      rates[mask] += extent - depth;
      depth = extent;
    }
  }
  return rates;
}

}  // namespace spinenv
