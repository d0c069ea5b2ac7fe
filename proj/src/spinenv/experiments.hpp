#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinenv/exact_oracle.hpp"
#include "spinenv/lattice.hpp"
#include "spinenv/rate_model.hpp"
#include "spinenv/rng.hpp"

namespace spinenv {

/// Monte Carlo point estimate with its provenance. Replica i always runs on
/// seed derive_seed(seed, i).
struct EstimateReport {
  std::string scenario;
  std::vector<std::pair<std::string, double>> params;
  double estimate = 0;
  double standard_error = 0;  // sample std / sqrt(replicas)
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  int window = 0;
  double horizon = 0;
  double runtime_ms = 0;
};

/// Running mean and sample variance (Welford).
class SampleStats {
public:
  void add(double v);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const;

private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica);

/// Uniformly random ordered state with the given number of spin layers:
/// each site picks one of the layers+1 monotone columns.
JointState random_ordered_state(const ModelSpec& spec, int spin_layers, RandomStream& rng);

/// Window [c - k, c + k] around c = N / 2.
std::pair<int, int> centred_window(int lattice_size, int k);

/// Probability that the all-0 and all-1 spin starts agree on the centred
/// window at time t, both driven by the same marks and background beta0.
EstimateReport estimate_coalescence(const ModelSpec& spec, const Configuration& beta0, int k,
                                    double t, std::size_t replicas, std::uint64_t seed);

/// The same probability from the exact two-layer coupled chain.
double exact_coalescence(const ModelSpec& spec, const Configuration& beta0, int k, double t);

struct DensityPoint {
  double t = 0;
  double from_zero = 0;
  double from_zero_se = 0;
  double from_one = 0;
  double from_one_se = 0;
  double gap() const { return from_one - from_zero; }
};

struct DensityCurves {
  std::vector<DensityPoint> points;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double runtime_ms = 0;
};

/// Mean spin density from the all-0 and all-1 joint starts over a time grid.
/// Both starts share one comonotone event stream per replica; the run aborts
/// if the lower copy ever exceeds the upper one.
DensityCurves density_curves(const ModelSpec& spec, const std::vector<double>& t_grid,
                             std::size_t replicas, std::uint64_t seed);

/// Exact mean spin density at time t from a point-mass start.
double exact_density(const GeneratorMatrix& g, std::uint64_t start_code, double t);

struct FDecayRow {
  int length = 0;
  int m = 0;
  int n = 0;
  double normalized_f = 0;  // E f_{m,n} / (n - m)
  double standard_error = 0;
};

struct FDecayTable {
  std::vector<FDecayRow> rows;
  double t = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  double runtime_ms = 0;
  /// Whether normalized f is non-increasing along the rows (reported only).
  bool decreasing = false;
};

/// Normalized f over centred windows of the given lengths (each >= 2) at
/// time t, for the coupled (beta, eta, gamma, xi) process.
FDecayTable f_decay(const ModelSpec& spec, const JointState& initial,
                    const std::vector<int>& lengths, double t, std::size_t replicas,
                    std::uint64_t seed);

struct InequalityEstimate {
  double lhs = 0;  // mean of the smaller side
  double rhs = 0;  // mean of the bound
  double slack = 0;  // mean of rhs - lhs, paired per sample
  double slack_se = 0;
  bool holds = false;  // slack >= -3 SE
};

struct LemmaCheck {
  int m = 0;
  int n = 0;
  int l = 1;
  double t = 0;
  double C = 0;
  double K = 0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  InequalityEstimate d;
  InequalityEstimate e;
  double runtime_ms = 0;
};

/// Burn-in time: the first doubling-grid time at which the exact chain on a
/// small ring with the same rates is within `target` TV of its limits from
/// both point-mass starts.
double oracle_burn_in(const ModelSpec& spec, int oracle_sites = 4, double target = 1e-3);

/// Late-time estimates of both sides of
///   C g^1 <= K (f_{m-1,n} + f_{m,n+1} - 2 f_{m,n})   and
///   C g^{l+1} <= 12 K l g^l
/// from the coupled process started at beta, gamma i.i.d. fair coins and
/// eta = 0, xi = 1.
LemmaCheck lemma31_de_check(const ModelSpec& spec, double t, std::size_t replicas,
                            std::uint64_t seed, int m, int n, int l = 1);

struct StaircaseRow {
  int n = 0;  // first site holding a 1
  std::uint64_t code = 0;
  double outflow = 0;
  double perturbed_outflow = 0;
};

struct ScenarioReport {
  std::string name;
  ModelSpec spec;
  std::size_t states = 0;
  std::size_t closed_classes = 0;
  std::vector<std::size_t> class_sizes;
  /// Packed codes of single-state closed classes.
  std::vector<std::uint64_t> absorbing_codes;
  std::optional<std::size_t> numerical_nullity;
  bool rank_ambiguous = false;
  double max_residual = 0;
  double tv_nu = 0;
  double epsilon = 0;
  std::vector<StaircaseRow> staircases;
  std::vector<std::string> notes;
};

/// Exact analysis of the two counterexample remarks: "iv" (voter background,
/// contact spins, periodic ring) and "vi" (background driven to all ones,
/// frozen 0|1 spin boundary). For "vi" the boundary argument supplies the
/// background words; the spin words are always 0 on the left and 1 on the
/// right.
ScenarioReport scenario_remarks(const std::string& name, const PresetParams& params,
                                int lattice_size, const Boundary& boundary,
                                double epsilon = 0.1);

}  // namespace spinenv
