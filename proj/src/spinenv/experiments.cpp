#include "spinenv/experiments.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "spinenv/coupling.hpp"
#include "spinenv/functionals.hpp"
#include "spinenv/graphical.hpp"

namespace spinenv {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Configuration filled_spin(const ModelSpec& spec, int bit) {
  return Configuration::filled(spec.lattice_size, bit, spin_boundary(spec.boundary));
}

double spin_density(const Configuration& c) {
  long ones = 0;
  for (int x = 0; x < c.size(); ++x) ones += c[x];
  return static_cast<double>(ones) / c.size();
}

void require_replicas(std::size_t replicas) {
  if (replicas == 0) throw ModelError("replica count must be positive");
}

}  // namespace

void SampleStats::add(double v) {
  ++n_;
  const double delta = v - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (v - mean_);
}

double SampleStats::standard_error() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) {
  return derive_seed(seed, replica, 0x7265706c);
}

JointState random_ordered_state(const ModelSpec& spec, int spin_layers, RandomStream& rng) {
  const int n = spec.lattice_size;
  JointState s;
  std::vector<std::uint8_t> beta(static_cast<std::size_t>(n));
  for (auto& b : beta) b = static_cast<std::uint8_t>(rng.bits() >> 63);
  s.beta = Configuration(std::move(beta), env_boundary(spec.boundary));
  std::vector<std::vector<std::uint8_t>> layers(static_cast<std::size_t>(spin_layers),
                                                std::vector<std::uint8_t>(static_cast<std::size_t>(n)));
  for (int x = 0; x < n; ++x) {
    // Column j: the top j layers hold a 1.
    const auto j = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(spin_layers + 1));
    for (int k = 0; k < spin_layers; ++k) {
      layers[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)] = k >= spin_layers - j ? 1 : 0;
    }
  }
  for (auto& bits : layers) s.spins.emplace_back(std::move(bits), spin_boundary(spec.boundary));
  return s;
}

std::pair<int, int> centred_window(int lattice_size, int k) {
  const int c = lattice_size / 2;
  if (k < 0 || c - k < 0 || c + k >= lattice_size) {
    std::ostringstream os;
    os << "window half-width " << k << " does not fit a lattice of " << lattice_size << " sites";
    throw ModelError(os.str());
  }
  return {c - k, c + k};
}

EstimateReport estimate_coalescence(const ModelSpec& spec, const Configuration& beta0, int k,
                                    double t, std::size_t replicas, std::uint64_t seed) {
  require_replicas(replicas);
  spec.check_structure();
  if (beta0.size() != spec.lattice_size) throw ModelError("beta0 has the wrong length");
  const auto start = Clock::now();
  const auto [lo, hi] = centred_window(spec.lattice_size, k);

  JointState initial;
  initial.beta = beta0;
  initial.spins = {filled_spin(spec, 0), filled_spin(spec, 1)};

  SampleStats stats;
  for (std::size_t i = 0; i < replicas; ++i) {
    const EventStream es = generate_streams(spec, replica_seed(seed, i), t);
    const Trajectory traj = simulate_graphical(spec, initial, es);
    if (traj.order_violations != 0) {
      throw std::logic_error("coalescence replica broke the order of its copies");
    }
    bool agree = true;
    for (int x = lo; x <= hi && agree; ++x) {
      agree = traj.final_state.spins[0][x] == traj.final_state.spins[1][x];
    }
    stats.add(agree ? 1.0 : 0.0);
  }

  EstimateReport r;
  r.scenario = "coalescence";
  r.params = {{"k", k}, {"t", t}, {"sites", spec.lattice_size}};
  r.estimate = stats.mean();
  r.standard_error = stats.standard_error();
  r.replicas = replicas;
  r.seed = seed;
  r.window = hi - lo + 1;
  r.horizon = t;
  r.runtime_ms = elapsed_ms(start);
  return r;
}

double exact_coalescence(const ModelSpec& spec, const Configuration& beta0, int k, double t) {
  const auto [lo, hi] = centred_window(spec.lattice_size, k);
  JointState initial;
  initial.beta = beta0;
  initial.spins = {filled_spin(spec, 0), filled_spin(spec, 1)};
  const GeneratorMatrix g = build_coupled_generator(spec, 2);
  const Eigen::VectorXd p =
      semigroup_apply(g, point_mass(g, pack_state(initial)), t).distribution;
  double total = 0;
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    const JointState s = unpack_state(spec, g.codes[i], 2);
    bool agree = true;
    for (int x = lo; x <= hi && agree; ++x) agree = s.spins[0][x] == s.spins[1][x];
    if (agree) total += p(static_cast<Eigen::Index>(i));
  }
  return total;
}

DensityCurves density_curves(const ModelSpec& spec, const std::vector<double>& t_grid,
                             std::size_t replicas, std::uint64_t seed) {
  require_replicas(replicas);
  spec.check_structure();
  if (t_grid.empty()) throw ModelError("time grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0 || (i > 0 && t_grid[i] < t_grid[i - 1])) {
      throw ModelError("time grid must be nonnegative and nondecreasing");
    }
  }
  const auto start = Clock::now();
  const auto [low_start, high_start] = point_mass_states(spec);
  std::vector<SampleStats> lower(t_grid.size()), upper(t_grid.size());

  StreamOptions options;
  options.marks = MarkScheme::comonotone;
  for (std::size_t i = 0; i < replicas; ++i) {
    const EventStream es = generate_streams(spec, replica_seed(seed, i), t_grid.back(), options);
    GraphicalRunner runner(spec, es);
    std::vector<JointState> copies{low_start, high_start};
    bool broken = false;
    auto check = [&](const ClockEvent& ev) {
      if (copies[0].beta[ev.site] > copies[1].beta[ev.site] ||
          copies[0].eta()[ev.site] > copies[1].eta()[ev.site]) {
        broken = true;
      }
    };
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      runner.advance_to(t_grid[j], copies, {}, check);
      if (broken) throw std::logic_error("density replica broke the order of its copies");
      lower[j].add(spin_density(copies[0].eta()));
      upper[j].add(spin_density(copies[1].eta()));
    }
  }

  DensityCurves out;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    out.points.push_back({t_grid[j], lower[j].mean(), lower[j].standard_error(), upper[j].mean(),
                          upper[j].standard_error()});
  }
  out.replicas = replicas;
  out.seed = seed;
  out.runtime_ms = elapsed_ms(start);
  return out;
}

double exact_density(const GeneratorMatrix& g, std::uint64_t start_code, double t) {
  const Eigen::VectorXd p = semigroup_apply(g, point_mass(g, start_code), t).distribution;
  const std::uint64_t eta_mask = (std::uint64_t{1} << g.sites) - 1;
  double mean = 0;
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    const auto ones = std::popcount(g.codes[i] & eta_mask);
    mean += p(static_cast<Eigen::Index>(i)) * ones / g.sites;
  }
  return mean;
}

FDecayTable f_decay(const ModelSpec& spec, const JointState& initial,
                    const std::vector<int>& lengths, double t, std::size_t replicas,
                    std::uint64_t seed) {
  require_replicas(replicas);
  if (initial.spins.size() != 3) throw ModelError("f_decay needs the (eta, gamma, xi) triple");
  if (lengths.empty()) throw ModelError("no window lengths given");
  const auto start = Clock::now();
  const int size = spec.lattice_size;
  std::vector<std::pair<int, int>> windows;
  for (int len : lengths) {
    if (len < 2 || len > size) throw ModelError("window lengths must lie in [2, N]");
    const int m = (size - len) / 2;
    windows.emplace_back(m, m + len - 1);
  }
  std::vector<SampleStats> stats(windows.size());
  const CoupledSpec cs{spec, 3};
  for (std::size_t i = 0; i < replicas; ++i) {
    const CoupledRun run = simulate_coupled(cs, initial, replica_seed(seed, i), t, {});
    const auto& s = run.trajectory.final_state;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto [m, n] = windows[w];
      stats[w].add(static_cast<double>(compute_f(s.spins[0], s.spins[1], s.spins[2], m, n)) / (n - m));
    }
  }
  FDecayTable table;
  table.decreasing = true;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    table.rows.push_back({lengths[w], windows[w].first, windows[w].second, stats[w].mean(),
                          stats[w].standard_error()});
    if (w > 0 && table.rows[w].normalized_f > table.rows[w - 1].normalized_f) table.decreasing = false;
  }
  table.t = t;
  table.replicas = replicas;
  table.seed = seed;
  table.runtime_ms = elapsed_ms(start);
  return table;
}

double oracle_burn_in(const ModelSpec& spec, int oracle_sites, double target) {
  ModelSpec small = spec;
  small.lattice_size = oracle_sites;
  small.boundary = Boundary::periodic();
  const GeneratorMatrix g = build_generator(small);
  const NuLimits limits = nu_limits(g);
  if (!limits.converged) throw NumericalFlag("oracle limits did not converge");
  return calibrate_horizon(g, limits, target);
}

LemmaCheck lemma31_de_check(const ModelSpec& spec, double t, std::size_t replicas,
                            std::uint64_t seed, int m, int n, int l) {
  require_replicas(replicas);
  if (m < 1 || n + 1 >= spec.lattice_size || m > n) {
    throw ModelError("window [m, n] must leave one site free on each side");
  }
  if (l < 1) throw ModelError("l must be at least 1");
  const auto start = Clock::now();
  const DerivedConstants k = dominating_rates(spec);
  const CoupledSpec cs{spec, 3};

  SampleStats d_lhs, d_rhs, d_slack, e_lhs, e_rhs, e_slack;
  for (std::size_t i = 0; i < replicas; ++i) {
    const std::uint64_t rs = replica_seed(seed, i);
    RandomStream rng(derive_seed(rs, 0x696e6974));
    JointState initial;
    std::vector<std::uint8_t> beta(static_cast<std::size_t>(spec.lattice_size));
    std::vector<std::uint8_t> gamma(beta.size());
    for (auto& b : beta) b = static_cast<std::uint8_t>(rng.bits() >> 63);
    for (auto& g : gamma) g = static_cast<std::uint8_t>(rng.bits() >> 63);
    initial.beta = Configuration(std::move(beta), env_boundary(spec.boundary));
    initial.spins = {filled_spin(spec, 0), Configuration(std::move(gamma), spin_boundary(spec.boundary)),
                     filled_spin(spec, 1)};

    const CoupledRun run = simulate_coupled(cs, initial, rs, t, {});
    const auto& s = run.trajectory.final_state;
    const auto& eta = s.spins[0];
    const auto& gam = s.spins[1];
    const auto& xi = s.spins[2];
    const auto base = interval_stats(eta, gam, xi, m, n);
    const long f_left = compute_f(eta, gam, xi, m - 1, n);
    const long f_right = compute_f(eta, gam, xi, m, n + 1);

    const double dl = k.C * static_cast<double>(base.g_at(1));
    const double dr = k.K * static_cast<double>(f_left + f_right - 2 * base.f);
    d_lhs.add(dl);
    d_rhs.add(dr);
    d_slack.add(dr - dl);

    const double el = k.C * static_cast<double>(base.g_at(l + 1));
    const double er = 12.0 * k.K * l * static_cast<double>(base.g_at(l));
    e_lhs.add(el);
    e_rhs.add(er);
    e_slack.add(er - el);
  }

  auto finish = [](const SampleStats& lhs, const SampleStats& rhs, const SampleStats& slack) {
    InequalityEstimate e;
    e.lhs = lhs.mean();
    e.rhs = rhs.mean();
    e.slack = slack.mean();
    e.slack_se = slack.standard_error();
    e.holds = e.slack >= -3.0 * e.slack_se;
    return e;
  };
  LemmaCheck out;
  out.m = m;
  out.n = n;
  out.l = l;
  out.t = t;
  out.C = k.C;
  out.K = k.K;
  out.replicas = replicas;
  out.seed = seed;
  out.d = finish(d_lhs, d_rhs, d_slack);
  out.e = finish(e_lhs, e_rhs, e_slack);
  out.runtime_ms = elapsed_ms(start);
  return out;
}

ScenarioReport scenario_remarks(const std::string& name, const PresetParams& params,
                                int lattice_size, const Boundary& boundary, double epsilon) {
  ScenarioReport r;
  r.name = name;
  r.epsilon = epsilon;
  if (name == "iv") {
    r.spec = preset("remark_iv", params, lattice_size, boundary);
    r.notes.push_back(
        "finite window: the contact process dies out, so no supercritical upper measure appears; "
        "the check is the count of closed classes coming from the frozen background sectors");
  } else if (name == "vi") {
    std::string env_left = "1";
    std::string env_right = "1";
    if (!boundary.is_periodic()) {
      env_left = boundary.env_left;
      env_right = boundary.env_right;
    }
    r.spec = preset("remark_vi", params, lattice_size,
                    Boundary::frozen("0", "1", env_left, env_right));
    r.notes.push_back("spin boundary fixed to 0 on the left and 1 on the right so every staircase fits");
  } else {
    throw ModelError("unknown scenario '" + name + "' (expected iv or vi)");
  }

  const GeneratorMatrix g = build_generator(r.spec);
  const StationarySet set = stationary_set(g);
  r.states = g.dimension();
  r.closed_classes = set.closed_classes.size();
  for (const auto& cls : set.closed_classes) {
    r.class_sizes.push_back(cls.size());
    if (cls.size() == 1) r.absorbing_codes.push_back(g.codes[cls[0]]);
  }
  r.numerical_nullity = set.numerical_nullity;
  r.rank_ambiguous = set.rank_ambiguous;
  r.max_residual = set.max_residual;
  r.tv_nu = nu_limits(g).tv;

  if (name == "vi") {
    ModelSpec perturbed = r.spec;
    auto c1 = perturbed.spin.c1.values();
    c1[Triple{0, 0, 1}.index()] = epsilon;
    perturbed.spin.c1 = LocalSpinRates(c1);
    const GeneratorMatrix gp = build_generator(perturbed);
    const int n = lattice_size;
    const std::uint64_t beta_ones = ((std::uint64_t{1} << n) - 1) << n;
    for (int step = 0; step <= n; ++step) {
      // eta^step: sites x >= step hold a 1.
      const std::uint64_t eta = step == n ? 0 : (std::uint64_t{1} << (n - step)) - 1;
      const std::uint64_t code = beta_ones | eta;
      r.staircases.push_back({step, code, g.outflow(g.index_of(code)), gp.outflow(gp.index_of(code))});
    }
  }
  return r;
}

}  // namespace spinenv
