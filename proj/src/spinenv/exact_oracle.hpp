#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spinenv/lattice.hpp"
#include "spinenv/rate_model.hpp"

namespace spinenv {

/// Numerical trouble the oracle refuses to paper over (rank ambiguity,
/// non-convergence).
class NumericalFlag : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  int max_sites = 6;
  std::size_t max_dimension = 4096;
};

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0;
};

/// Rate matrix of a finite chain over packed joint states.
///
/// A state packs its layers back to back, background first, each layer
/// written with site 0 as the most significant bit. For the plain (beta, eta)
/// chain the index equals the packed code, i.e. (beta << N) | eta.
struct GeneratorMatrix {
  int sites = 0;
  int layers = 2;  // background plus spin layers
  std::vector<std::uint64_t> codes;  // code of each index
  std::vector<Transition> transitions;
  Eigen::SparseMatrix<double, Eigen::RowMajor> q;
  double max_outflow = 0;

  std::size_t dimension() const { return codes.size(); }
  /// Index of a packed code; throws if the code is not a state of this chain.
  std::size_t index_of(std::uint64_t code) const;
  double rate(std::size_t from, std::size_t to) const;
  double outflow(std::size_t from) const;

  /// Dense code -> index table; entries equal to dimension() mark codes that
  /// are not states of this chain.
  std::vector<std::size_t> index_table;
};

std::uint64_t pack_state(const JointState& s);
JointState unpack_state(const ModelSpec& spec, std::uint64_t code, int spin_layers = 1);

/// Single-flip generator of the (beta, eta) chain.
GeneratorMatrix build_generator(const ModelSpec& spec, const OracleOptions& options = {});

/// Generator of the coupled chain (beta, spin layers...) over ordered states,
/// with jump rates from the coupling tables.
GeneratorMatrix build_coupled_generator(const ModelSpec& spec, int spin_layers,
                                        const OracleOptions& options = {});

struct StationarySet {
  /// One extreme stationary law per closed communicating class.
  std::vector<Eigen::VectorXd> extreme_points;
  std::vector<std::vector<std::size_t>> closed_classes;
  /// Nullity of Q^T from singular values, when the chain is small enough.
  std::optional<std::size_t> numerical_nullity;
  bool rank_ambiguous = false;
  double max_residual = 0;  // max ||pi Q||_inf over extreme points

  std::size_t dimension() const { return extreme_points.size(); }
};

StationarySet stationary_set(const GeneratorMatrix& g);

struct SemigroupResult {
  Eigen::VectorXd distribution;
  double truncation_error = 0;  // Poisson mass not summed
  std::size_t terms = 0;
};

/// initial * exp(t Q) by uniformisation at rate max outflow + 1.
SemigroupResult semigroup_apply(const GeneratorMatrix& g, const Eigen::VectorXd& initial, double t);

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct NuLimits {
  Eigen::VectorXd nu0;
  Eigen::VectorXd nu1;
  double tv = 0;
  double horizon = 0;
  bool converged = false;
};

/// Runs the all-0 and all-1 point masses forward over doubling time steps
/// until neither moves by more than `tolerance` in one step.
NuLimits nu_limits(const GeneratorMatrix& g, double tolerance = 1e-8, double max_horizon = 1e4);

/// Smallest time on a doubling grid at which both point-mass starts are
/// within `target` total variation of their limits.
double calibrate_horizon(const GeneratorMatrix& g, const NuLimits& limits, double target = 1e-3);

struct DeskCheck {
  std::size_t dimension = 0;
  double tv_nu = 0;
  /// Largest TV distance from an extreme point to the nearer of nu0, nu1.
  double worst_extreme_gap = 0;
  bool nu_converged = false;
};

DeskCheck extremal_desk_check(const GeneratorMatrix& g);

/// Point mass on one state.
Eigen::VectorXd point_mass(const GeneratorMatrix& g, std::uint64_t code);

}  // namespace spinenv
