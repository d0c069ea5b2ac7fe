#include "spinenv/coupling.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "spinenv/rng.hpp"

namespace spinenv {

namespace {

// Local (eta, gamma, xi) patterns in table order.
constexpr std::array<std::array<int, 3>, 4> kPatterns{{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};

struct TableEntry {
  int to;
  double rate;
  const char* plus;   // layer whose rate is added
  const char* minus;  // layer whose rate is subtracted, or nullptr
};

int pattern_index(int e, int g, int x) {
  for (int i = 0; i < 4; ++i) {
    if (kPatterns[i] == std::array<int, 3>{e, g, x}) return i;
  }
  throw ModelError("coupled layers are not ordered at this site");
}

/// One row of the maximal coupling table. ce, cg, cx are the flip rates of
/// eta, gamma and xi under the current background bit.
std::array<TableEntry, 3> table_row(int row, double ce, double cg, double cx) {
  switch (row) {
    case 0:
      return {{{1, cx - cg, "xi", "gamma"}, {2, cg - ce, "gamma", "eta"}, {3, ce, "eta", nullptr}}};
    case 1:
      return {{{0, cx, "xi", nullptr}, {2, cg - ce, "gamma", "eta"}, {3, ce, "eta", nullptr}}};
    case 2:
      return {{{0, cx, "xi", nullptr}, {1, cg - cx, "gamma", "xi"}, {3, ce, "eta", nullptr}}};
    default:
      return {{{0, cx, "xi", nullptr}, {1, cg - cx, "gamma", "xi"}, {2, ce - cg, "eta", "gamma"}}};
  }
}

std::uint32_t flip_mask(int from, int to) {
  std::uint32_t mask = 0;
  for (int j = 0; j < 3; ++j) {
    if (kPatterns[from][j] != kPatterns[to][j]) mask |= 1u << j;
  }
  return mask;
}

[[noreturn]] void negative_rate(const TableEntry& e, int beta_bit, const Triple& plus,
                                const Triple& minus) {
  std::ostringstream os;
  os << "negative coupled rate c" << beta_bit << "(x," << e.plus << ") - c" << beta_bit << "(x,"
     << e.minus << ") = " << e.rate << ": attractivity requires c" << beta_bit << "("
     << plus.str() << ") >= c" << beta_bit << "(" << minus.str() << ")";
  throw ModelViolation(os.str());
}

std::map<std::uint32_t, double> three_layer_rates(const LocalSpinRates& c, int beta_bit,
                                                  const Triple& te, const Triple& tg,
                                                  const Triple& tx) {
  const int row = pattern_index(te.center, tg.center, tx.center);
  std::map<std::uint32_t, double> out;
  for (const auto& e : table_row(row, c(te), c(tg), c(tx))) {
    if (e.rate < 0) {
      const auto pick = [&](const char* name) {
        return name[0] == 'e' ? te : name[0] == 'g' ? tg : tx;
      };
      negative_rate(e, beta_bit, pick(e.plus), pick(e.minus));
    }
    if (e.rate > 0) out[flip_mask(row, e.to)] += e.rate;
  }
  return out;
}

/// Four layers: both middle layers read the same mark, so on each side the
/// set of flipping layers at mark depth v is {j : rate_j > v}.
std::map<std::uint32_t, double> shared_mark_rates(const LocalSpinRates& c,
                                                  std::span<const Triple> layers) {
  std::map<std::uint32_t, double> out;
  for (int side = 0; side < 2; ++side) {
    std::vector<double> cuts;
    for (const auto& t : layers) {
      if (t.center == side) cuts.push_back(c(t));
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double prev = 0;
    for (double cut : cuts) {
      if (cut <= prev) continue;
      std::uint32_t mask = 0;
      for (std::size_t j = 0; j < layers.size(); ++j) {
        if (layers[j].center == side && c(layers[j]) >= cut) mask |= 1u << j;
      }
      out[mask] += cut - prev;
      prev = cut;
    }
  }
  return out;
}

}  // namespace

void CoupledSpec::check() const {
  if (spin_layers < 1 || spin_layers > 4) {
    throw ModelError("coupled process supports 1 to 4 spin layers");
  }
  base.check_structure();
}

double CoupledRates::total() const {
  double t = background;
  for (const auto& [mask, r] : spin) t += r;
  return t;
}

std::map<std::uint32_t, double> coupled_spin_rates(const SpinRatePair& spin, int beta_bit,
                                                   std::span<const Triple> layers) {
  const auto& c = spin.for_background(beta_bit);
  switch (layers.size()) {
    case 1: {
      std::map<std::uint32_t, double> out;
      if (c(layers[0]) > 0) out[1u] = c(layers[0]);
      return out;
    }
    case 2: {
      // (eta, xi) is the table with gamma = eta; gamma never moves alone.
      std::map<std::uint32_t, double> out;
      for (const auto& [mask, r] : three_layer_rates(c, beta_bit, layers[0], layers[0], layers[1])) {
        const std::uint32_t projected = (mask & 1u) | ((mask >> 1) & 2u);
        if (projected == 0) throw std::logic_error("middle copy of eta moved alone");
        out[projected] += r;
      }
      return out;
    }
    case 3:
      return three_layer_rates(c, beta_bit, layers[0], layers[1], layers[2]);
    case 4: {
      // Validate both sub-couplings; their tables carry the attractivity checks.
      three_layer_rates(c, beta_bit, layers[0], layers[1], layers[3]);
      three_layer_rates(c, beta_bit, layers[0], layers[2], layers[3]);
      return shared_mark_rates(c, layers);
    }
    default:
      throw ModelError("coupled process supports 1 to 4 spin layers");
  }
}

CoupledRates coupled_event_rates(const ModelSpec& spec, const JointState& state, int x) {
  CoupledRates r;
  r.background = spec.env.rate(neighborhood_index(state.beta, x, spec.env.range()));
  std::array<Triple, 4> local{};
  if (state.spins.empty() || state.spins.size() > local.size()) {
    throw ModelError("coupled process supports 1 to 4 spin layers");
  }
  for (std::size_t j = 0; j < state.spins.size(); ++j) local[j] = triple_at(state.spins[j], x);
  r.spin = coupled_spin_rates(spec.spin, state.beta[x],
                              std::span<const Triple>(local.data(), state.spins.size()));
  return r;
}

const char* AgreementClass::name() const {
  switch (kind) {
    case AgreementKind::A1: return "A1";
    case AgreementKind::A2: return "A2";
    case AgreementKind::A3: return "A3";
    case AgreementKind::A4: return "A4";
    default: return "NONE";
  }
}

namespace {

/// Smallest x in [-1, n) with gamma = lower on [0, x] and gamma = upper on
/// (x, n), with the frozen words standing in for the sites beyond.
std::optional<int> find_interface(const Configuration& lower, const Configuration& gamma,
                                  const Configuration& upper) {
  const int n = gamma.size();
  if (!gamma.boundary().periodic &&
      (gamma.boundary().left != lower.boundary().left ||
       gamma.boundary().right != upper.boundary().right)) {
    return std::nullopt;
  }
  // prefix[x+1]: gamma agrees with lower on [0, x].
  std::vector<bool> prefix(static_cast<std::size_t>(n) + 1, true);
  for (int y = 0; y < n; ++y) {
    prefix[static_cast<std::size_t>(y) + 1] = prefix[static_cast<std::size_t>(y)] && gamma[y] == lower[y];
  }
  std::vector<bool> suffix(static_cast<std::size_t>(n) + 1, true);
  for (int y = n - 1; y >= 0; --y) {
    suffix[static_cast<std::size_t>(y)] = suffix[static_cast<std::size_t>(y) + 1] && gamma[y] == upper[y];
  }
  for (int x = -1; x < n; ++x) {
    if (prefix[static_cast<std::size_t>(x + 1)] && suffix[static_cast<std::size_t>(x + 1)]) return x;
  }
  return std::nullopt;
}

bool same_layer(const Configuration& a, const Configuration& b) {
  return a.bits() == b.bits() && a.boundary() == b.boundary();
}

void require_ordered(const Configuration& eta, const Configuration& gamma, const Configuration& xi) {
  if (!leq(eta, gamma) || !leq(gamma, xi)) {
    throw ModelError("classify_agreement needs eta <= gamma <= xi");
  }
}

}  // namespace

AgreementClass classify_agreement(const Configuration& eta, const Configuration& gamma,
                                  const Configuration& xi) {
  require_ordered(eta, gamma, xi);
  if (same_layer(gamma, eta)) return {AgreementKind::A1, std::nullopt};
  if (same_layer(gamma, xi)) return {AgreementKind::A2, std::nullopt};
  if (auto x = find_interface(eta, gamma, xi)) return {AgreementKind::A3, x};
  if (auto x = find_interface(xi, gamma, eta)) return {AgreementKind::A4, x};
  return {AgreementKind::none, std::nullopt};
}

bool in_agreement_class(AgreementKind kind, const Configuration& eta, const Configuration& gamma,
                        const Configuration& xi) {
  require_ordered(eta, gamma, xi);
  switch (kind) {
    case AgreementKind::A1: return same_layer(gamma, eta);
    case AgreementKind::A2: return same_layer(gamma, xi);
    case AgreementKind::A3: return find_interface(eta, gamma, xi).has_value();
    case AgreementKind::A4: return find_interface(xi, gamma, eta).has_value();
    default: return true;
  }
}

CoupledRun simulate_coupled(const CoupledSpec& spec, const JointState& initial,
                            std::uint64_t seed, double t_max, const CoupledOptions& options) {
  spec.check();
  const ModelSpec& model = spec.base;
  const int n = model.lattice_size;
  if (static_cast<int>(initial.spins.size()) != spec.spin_layers) {
    throw ModelError("initial state has the wrong number of spin layers");
  }
  if (initial.beta.size() != n) throw ModelError("background has the wrong length");
  for (const auto& s : initial.spins) {
    if (s.size() != n) throw ModelError("spin layer has the wrong length");
  }
  if (!ordered(initial)) throw ModelError("coupled process needs ordered initial layers");

  CoupledRun run;
  Trajectory& traj = run.trajectory;
  traj.initial = initial;
  traj.t_max = t_max;
  JointState state = initial;

  const bool frozen = !model.boundary.is_periodic();
  auto class_of = [&](const JointState& s) {
    AgreementKind k = classify_agreement(s.spins.front(), s.spins[1], s.spins.back()).kind;
    if (!frozen && (k == AgreementKind::A3 || k == AgreementKind::A4)) k = AgreementKind::none;
    return k;
  };
  const bool track_classes = options.check_classes && spec.spin_layers >= 3;
  const AgreementKind start_class = track_classes ? class_of(state) : AgreementKind::none;

  std::vector<CoupledRates> rates(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) rates[static_cast<std::size_t>(x)] = coupled_event_rates(model, state, x);
  const int reach = std::max(1, model.env.range());

  RandomStream rng(derive_seed(seed, 0x636f75706c6564ULL));
  double t = 0;
  std::size_t steps = 0;
  while (true) {
    double total = 0;
    for (const auto& r : rates) total += r.total();
    if (total <= 0) break;
    t += rng.exponential(total);
    if (t > t_max) break;
    if (++steps > options.max_events) throw CapacityError("coupled simulation exceeds its event cap");

    double u = rng.uniform() * total;
    int x = -1;
    for (int y = 0; y < n; ++y) {
      const double rt = rates[static_cast<std::size_t>(y)].total();
      if (rt <= 0) continue;
      x = y;  // last positive site absorbs rounding at the top end
      if (u < rt) break;
      u -= rt;
    }
    const auto& site = rates[static_cast<std::size_t>(x)];
    std::uint32_t chosen = 0;  // 0 = background
    if (site.spin.empty() || u < site.background) {
      chosen = 0;
    } else {
      u -= site.background;
      for (const auto& [mask, r] : site.spin) {
        chosen = mask;
        if (u < r) break;
        u -= r;
      }
    }
    if (chosen == 0) {
      const auto from = static_cast<std::uint8_t>(state.beta[x]);
      state.beta.flip(x);
      traj.events.push_back({t, x, 0, from, static_cast<std::uint8_t>(from ^ 1u)});
    } else {
      for (std::size_t j = 0; j < state.spins.size(); ++j) {
        if (!(chosen & (1u << j))) continue;
        const auto from = static_cast<std::uint8_t>(state.spins[j][x]);
        state.spins[j].flip(x);
        traj.events.push_back(
            {t, x, static_cast<int>(j) + 1, from, static_cast<std::uint8_t>(from ^ 1u)});
      }
      if (options.check_order) {
        const int lo = state.spins.front()[x];
        const int hi = state.spins.back()[x];
        bool ok = lo <= hi;
        for (std::size_t j = 1; ok && j + 1 < state.spins.size(); ++j) {
          ok = state.spins[j][x] >= lo && state.spins[j][x] <= hi;
        }
        if (!ok) ++traj.order_violations;
      }
    }
    if (track_classes && start_class != AgreementKind::none) {
      if (!in_agreement_class(start_class, state.spins.front(), state.spins[1], state.spins.back())) {
        ++run.class_exits;
      }
    }

    if (2 * reach + 1 >= n) {
      for (int y = 0; y < n; ++y) rates[static_cast<std::size_t>(y)] = coupled_event_rates(model, state, y);
    } else {
      for (int d = -reach; d <= reach; ++d) {
        int y = x + d;
        if (y < 0 || y >= n) {
          if (frozen) continue;
          y = (y + n) % n;
        }
        rates[static_cast<std::size_t>(y)] = coupled_event_rates(model, state, y);
      }
    }
  }
  traj.final_state = std::move(state);
  return run;
}

}  // namespace spinenv
