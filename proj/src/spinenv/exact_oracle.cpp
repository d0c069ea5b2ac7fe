#include "spinenv/exact_oracle.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "spinenv/coupling.hpp"

namespace spinenv {

namespace {

constexpr int kMaxCodeBits = 24;

std::uint64_t layer_bits(const Configuration& c) {
  std::uint64_t code = 0;
  for (int x = 0; x < c.size(); ++x) code = (code << 1) | static_cast<std::uint64_t>(c[x]);
  return code;
}

std::uint64_t site_bit(int sites, int layers, int layer, int x) {
  // layer 0 is the most significant block.
  const int shift = (layers - 1 - layer) * sites + (sites - 1 - x);
  return std::uint64_t{1} << shift;
}

void check_size(const ModelSpec& spec, int layers, const OracleOptions& options) {
  spec.check_structure();
  if (spec.lattice_size > options.max_sites) {
    std::ostringstream os;
    os << "oracle size cap: " << spec.lattice_size << " sites exceeds the limit of "
       << options.max_sites;
    throw CapacityError(os.str());
  }
  if (spec.lattice_size * layers > kMaxCodeBits) {
    throw CapacityError("oracle size cap: state code does not fit the enumeration limit");
  }
}

GeneratorMatrix assemble(int sites, int layers, std::vector<std::uint64_t> codes,
                         const std::function<void(std::uint64_t, std::vector<std::pair<std::uint64_t, double>>&)>& jumps,
                         const OracleOptions& options) {
  GeneratorMatrix g;
  g.sites = sites;
  g.layers = layers;
  g.codes = std::move(codes);
  if (g.codes.size() > options.max_dimension) {
    std::ostringstream os;
    os << "oracle size cap: " << g.codes.size() << " states exceeds the limit of "
       << options.max_dimension;
    throw CapacityError(os.str());
  }
  const std::size_t dim = g.codes.size();
  g.index_table.assign(std::size_t{1} << (sites * layers), dim);
  for (std::size_t i = 0; i < dim; ++i) g.index_table[g.codes[i]] = i;

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::pair<std::uint64_t, double>> out;
  for (std::size_t i = 0; i < dim; ++i) {
    out.clear();
    jumps(g.codes[i], out);
    double total = 0;
    for (const auto& [to_code, rate] : out) {
      if (rate <= 0) continue;
      const std::size_t j = g.index_of(to_code);
      g.transitions.push_back({i, j, rate});
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), rate);
      total += rate;
    }
    triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), -total);
    g.max_outflow = std::max(g.max_outflow, total);
  }
  g.q.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  g.q.setFromTriplets(triplets.begin(), triplets.end());
  g.q.makeCompressed();
  return g;
}

/// Tarjan's algorithm, iterative; returns component id per vertex.
std::vector<std::size_t> strongly_connected(std::size_t n,
                                            const std::vector<std::vector<std::size_t>>& adj,
                                            std::size_t& count) {
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  count = 0;
  struct Frame {
    std::size_t v;
    std::size_t edge;
  };
  std::vector<Frame> call;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < adj[f.v].size()) {
        const std::size_t w = adj[f.v][f.edge++];
        if (index[w] == unset) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
    }
  }
  return comp;
}

}  // namespace

double GeneratorMatrix::outflow(std::size_t from) const {
  const auto i = static_cast<Eigen::Index>(from);
  return -q.coeff(i, i);
}

std::size_t GeneratorMatrix::index_of(std::uint64_t code) const {
  if (code >= index_table.size() || index_table[code] == dimension()) {
    throw std::out_of_range("code is not a state of this chain");
  }
  return index_table[code];
}

double GeneratorMatrix::rate(std::size_t from, std::size_t to) const {
  return q.coeff(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

std::uint64_t pack_state(const JointState& s) {
  const auto n = static_cast<unsigned>(s.beta.size());
  std::uint64_t code = layer_bits(s.beta);
  for (const auto& layer : s.spins) code = (code << n) | layer_bits(layer);
  return code;
}

JointState unpack_state(const ModelSpec& spec, std::uint64_t code, int spin_layers) {
  const int n = spec.lattice_size;
  const int layers = spin_layers + 1;
  auto read = [&](int layer, LayerBoundary boundary) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x) bits[static_cast<std::size_t>(x)] = (code & site_bit(n, layers, layer, x)) ? 1 : 0;
    return Configuration(std::move(bits), std::move(boundary));
  };
  JointState s;
  s.beta = read(0, env_boundary(spec.boundary));
  for (int j = 1; j < layers; ++j) s.spins.push_back(read(j, spin_boundary(spec.boundary)));
  return s;
}

Eigen::VectorXd point_mass(const GeneratorMatrix& g, std::uint64_t code) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.dimension()));
  p(static_cast<Eigen::Index>(g.index_of(code))) = 1.0;
  return p;
}

GeneratorMatrix build_generator(const ModelSpec& spec, const OracleOptions& options) {
  check_size(spec, 2, options);
  const int n = spec.lattice_size;
  std::vector<std::uint64_t> codes(std::size_t{1} << (2 * n));
  for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = i;
  auto jumps = [&](std::uint64_t code, std::vector<std::pair<std::uint64_t, double>>& out) {
    const JointState s = unpack_state(spec, code, 1);
    for (int x = 0; x < n; ++x) {
      out.emplace_back(code ^ site_bit(n, 2, 0, x),
                       spec.env.rate(neighborhood_index(s.beta, x, spec.env.range())));
      const auto& c = spec.spin.for_background(s.beta[x]);
      out.emplace_back(code ^ site_bit(n, 2, 1, x), c(triple_at(s.eta(), x)));
    }
  };
  return assemble(n, 2, std::move(codes), jumps, options);
}

GeneratorMatrix build_coupled_generator(const ModelSpec& spec, int spin_layers,
                                        const OracleOptions& options) {
  if (spin_layers < 1 || spin_layers > 4) throw ModelError("coupled chain supports 1 to 4 spin layers");
  const int layers = spin_layers + 1;
  check_size(spec, layers, options);
  const int n = spec.lattice_size;
  std::vector<std::uint64_t> codes;
  const std::uint64_t all = std::uint64_t{1} << (n * layers);
  for (std::uint64_t code = 0; code < all; ++code) {
    if (ordered(unpack_state(spec, code, spin_layers))) codes.push_back(code);
    if (codes.size() > options.max_dimension) {
      throw CapacityError("oracle size cap: coupled chain has too many ordered states");
    }
  }
  auto jumps = [&](std::uint64_t code, std::vector<std::pair<std::uint64_t, double>>& out) {
    const JointState s = unpack_state(spec, code, spin_layers);
    for (int x = 0; x < n; ++x) {
      const CoupledRates r = coupled_event_rates(spec, s, x);
      out.emplace_back(code ^ site_bit(n, layers, 0, x), r.background);
      for (const auto& [mask, rate] : r.spin) {
        std::uint64_t to = code;
        for (int j = 0; j < spin_layers; ++j) {
          if (mask & (1u << j)) to ^= site_bit(n, layers, j + 1, x);
        }
        out.emplace_back(to, rate);
      }
    }
  };
  return assemble(n, layers, std::move(codes), jumps, options);
}

StationarySet stationary_set(const GeneratorMatrix& g) {
  const std::size_t dim = g.dimension();
  std::vector<std::vector<std::size_t>> adj(dim);
  for (const auto& t : g.transitions) adj[t.from].push_back(t.to);
  std::size_t ncomp = 0;
  const auto comp = strongly_connected(dim, adj, ncomp);

  std::vector<bool> leaks(ncomp, false);
  for (const auto& t : g.transitions) {
    if (comp[t.from] != comp[t.to]) leaks[comp[t.from]] = true;
  }
  std::vector<std::vector<std::size_t>> members(ncomp);
  for (std::size_t i = 0; i < dim; ++i) members[comp[i]].push_back(i);

  StationarySet set;
  for (std::size_t c = 0; c < ncomp; ++c) {
    if (!leaks[c]) set.closed_classes.push_back(members[c]);
  }
  std::sort(set.closed_classes.begin(), set.closed_classes.end());

  for (const auto& cls : set.closed_classes) {
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    const auto k = static_cast<Eigen::Index>(cls.size());
    if (k == 1) {
      pi(static_cast<Eigen::Index>(cls[0])) = 1.0;
    } else {
      // Solve pi Q_cc = 0 with sum(pi) = 1 (last balance equation replaced).
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index s = 0; s < k; ++s) {
          a(s, r) = g.rate(cls[static_cast<std::size_t>(r)], cls[static_cast<std::size_t>(s)]);
        }
      }
      a.row(k - 1).setOnes();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
      rhs(k - 1) = 1.0;
      const Eigen::VectorXd local = a.partialPivLu().solve(rhs);
      for (Eigen::Index r = 0; r < k; ++r) {
        pi(static_cast<Eigen::Index>(cls[static_cast<std::size_t>(r)])) = std::max(0.0, local(r));
      }
      pi /= pi.sum();
    }
    const Eigen::VectorXd residual = g.q.transpose() * pi;
    set.max_residual = std::max(set.max_residual, residual.lpNorm<Eigen::Infinity>());
    set.extreme_points.push_back(std::move(pi));
  }

  if (dim <= 512) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(g.q).transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double tol = 1e-10 * std::max(1.0, smax);
    std::size_t nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= tol) ++nullity;
      if (sv(i) > tol / 10 && sv(i) < tol * 10) set.rank_ambiguous = true;
    }
    set.numerical_nullity = nullity;
    if (nullity != set.closed_classes.size()) set.rank_ambiguous = true;
  }
  return set;
}

SemigroupResult semigroup_apply(const GeneratorMatrix& g, const Eigen::VectorXd& initial, double t) {
  if (t < 0) throw ModelError("semigroup time must be nonnegative");
  SemigroupResult res;
  res.distribution = initial;
  if (t == 0 || g.max_outflow == 0) return res;

  const double lambda = g.max_outflow + 1.0;
  const auto steps = static_cast<std::size_t>(std::ceil(lambda * t / 50.0));
  const double mu = lambda * t / static_cast<double>(steps);
  const double step_tol = std::max(1e-15, 1e-12 / static_cast<double>(steps));
  const Eigen::SparseMatrix<double, Eigen::ColMajor> qt = g.q.transpose();

  Eigen::VectorXd p = initial;
  for (std::size_t s = 0; s < steps; ++s) {
    double weight = std::exp(-mu);
    double mass = weight;
    Eigen::VectorXd term = p;
    Eigen::VectorXd acc = weight * term;
    for (std::size_t k = 1; 1.0 - mass > step_tol; ++k) {
      if (static_cast<double>(k) > mu && weight < 1e-20) break;
      term += (qt * term) / lambda;
      weight *= mu / static_cast<double>(k);
      acc += weight * term;
      mass += weight;
      ++res.terms;
    }
    res.truncation_error += std::max(0.0, 1.0 - mass);
    p = std::move(acc);
  }
  res.distribution = std::move(p);
  return res;
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 0.5 * (a - b).lpNorm<1>();
}

NuLimits nu_limits(const GeneratorMatrix& g, double tolerance, double max_horizon) {
  const std::uint64_t ones = (std::uint64_t{1} << (g.sites * g.layers)) - 1;
  NuLimits out;
  out.nu0 = point_mass(g, 0);
  out.nu1 = point_mass(g, ones);
  double step = 1.0;
  while (out.horizon < max_horizon) {
    Eigen::VectorXd next0 = semigroup_apply(g, out.nu0, step).distribution;
    Eigen::VectorXd next1 = semigroup_apply(g, out.nu1, step).distribution;
    const double change = std::max(total_variation(next0, out.nu0), total_variation(next1, out.nu1));
    out.nu0 = std::move(next0);
    out.nu1 = std::move(next1);
    out.horizon += step;
    if (change < tolerance) {
      out.converged = true;
      break;
    }
    step *= 2.0;
  }
  out.tv = total_variation(out.nu0, out.nu1);
  return out;
}

double calibrate_horizon(const GeneratorMatrix& g, const NuLimits& limits, double target) {
  const std::uint64_t ones = (std::uint64_t{1} << (g.sites * g.layers)) - 1;
  const Eigen::VectorXd start0 = point_mass(g, 0);
  const Eigen::VectorXd start1 = point_mass(g, ones);
  for (double t = 0.25; t <= 1e4; t *= 2.0) {
    const double d0 = total_variation(semigroup_apply(g, start0, t).distribution, limits.nu0);
    const double d1 = total_variation(semigroup_apply(g, start1, t).distribution, limits.nu1);
    if (d0 < target && d1 < target) return t;
  }
  throw NumericalFlag("no horizon up to 1e4 brings both starts within the target distance");
}

DeskCheck extremal_desk_check(const GeneratorMatrix& g) {
  DeskCheck d;
  const StationarySet set = stationary_set(g);
  const NuLimits lim = nu_limits(g);
  d.dimension = set.dimension();
  d.tv_nu = lim.tv;
  d.nu_converged = lim.converged;
  for (const auto& pi : set.extreme_points) {
    d.worst_extreme_gap = std::max(
        d.worst_extreme_gap, std::min(total_variation(pi, lim.nu0), total_variation(pi, lim.nu1)));
  }
  return d;
}

}  // namespace spinenv
