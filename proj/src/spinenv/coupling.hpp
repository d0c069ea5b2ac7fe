#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "spinenv/graphical.hpp"
#include "spinenv/lattice.hpp"
#include "spinenv/rate_model.hpp"

namespace spinenv {

/// A coupled transition would need a negative rate: the spin tables are not
/// attractive (or not compatible) at the state in question.
class ModelViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Spin layer counts accepted by the generator-level coupling.
struct CoupledSpec {
  ModelSpec base;
  int spin_layers = 3;  // 1, 2 (eta, xi), 3 (eta, gamma, xi) or 4 (eta, gamma1, gamma2, xi)

  void check() const;
};

/// Rates out of the local state at one site. `spin` maps a bitmask of
/// flipping spin layers to its rate (zero-rate entries omitted).
struct CoupledRates {
  double background = 0;
  std::map<std::uint32_t, double> spin;

  double total() const;
};

/// Coupled jump rates at site x. For three layers this is the maximal
/// coupling table for the current background bit; one and two layers are
/// read off the same table, four layers couple the two middle layers through
/// a shared mark. Throws ModelViolation on a negative entry.
CoupledRates coupled_event_rates(const ModelSpec& spec, const JointState& state, int x);

/// Same, for a bare local picture (background bit plus layer triples).
std::map<std::uint32_t, double> coupled_spin_rates(const SpinRatePair& spin, int beta_bit,
                                                   std::span<const Triple> layers);

struct CoupledOptions {
  bool check_order = true;
  /// Also assert that A1..A4 membership is never left (A3/A4 only on frozen
  /// boundaries, where the finite window can represent them).
  bool check_classes = false;
  std::size_t max_events = 50'000'000;
};

struct CoupledRun {
  Trajectory trajectory;
  std::size_t class_exits = 0;
};

/// Direct stochastic simulation of the coupled chain: exponential holding
/// times from the total rate, then a categorical choice of site and jump.
CoupledRun simulate_coupled(const CoupledSpec& spec, const JointState& initial,
                            std::uint64_t seed, double t_max, const CoupledOptions& options = {});

enum class AgreementKind { A1, A2, A3, A4, none };

struct AgreementClass {
  AgreementKind kind = AgreementKind::none;
  /// Interface site for A3/A4 (smallest valid choice).
  std::optional<int> interface;

  const char* name() const;
};

/// Agreement pattern of gamma relative to eta and xi on the window. Throws
/// ModelError if the triple is not ordered.
AgreementClass classify_agreement(const Configuration& eta, const Configuration& gamma,
                                  const Configuration& xi);

/// Membership in one class. The classes overlap (eta = gamma = xi lies in
/// all four), so this is the test to use when tracking a class over time.
bool in_agreement_class(AgreementKind kind, const Configuration& eta, const Configuration& gamma,
                        const Configuration& xi);

}  // namespace spinenv
