#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spinenv {

/// Raised for malformed or inadmissible rate tables and model specs.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A preset was asked for parameters that break c0(a0b) <= c1(a0b) or
/// c1(a1b) <= c0(a1b).
class CompatibilityError : public ModelError {
public:
  using ModelError::ModelError;
};

/// A nearest-neighbour window (eta(x-1), eta(x), eta(x+1)).
///
/// The packed index reads the window as a binary number, so "001" is 1 and
/// "110" is 6. Every rate table in the library uses this order.
struct Triple {
  int left = 0;
  int center = 0;
  int right = 0;

  constexpr unsigned index() const {
    return static_cast<unsigned>(left * 4 + center * 2 + right);
  }
  static constexpr Triple from_index(unsigned i) {
    return Triple{static_cast<int>((i >> 2) & 1u), static_cast<int>((i >> 1) & 1u),
                  static_cast<int>(i & 1u)};
  }
  std::string str() const;
  friend constexpr bool operator==(Triple, Triple) = default;
};

/// Flip rates c(abc) of one spin layer for the 8 neighbourhood triples.
class LocalSpinRates {
public:
  LocalSpinRates() = default;
  /// Throws ModelError if any value is negative or not finite.
  explicit LocalSpinRates(const std::array<double, 8>& values);

  static LocalSpinRates constant(double rate);
  /// c(a0b) = lambda * (a + b), c(a1b) = death.
  static LocalSpinRates contact(double lambda, double death);

  double operator()(Triple t) const { return values_[t.index()]; }
  double operator[](unsigned index) const { return values_[index]; }
  double at(int a, int b, int c) const { return values_[Triple{a, b, c}.index()]; }
  const std::array<double, 8>& values() const { return values_; }

  /// Largest rate over triples with the given centre bit.
  double sup_with_center(int center) const;
  bool reflection_symmetric() const;
  LocalSpinRates reflected() const;

  friend bool operator==(const LocalSpinRates&, const LocalSpinRates&) = default;

private:
  std::array<double, 8> values_{};
};

struct SpinRatePair {
  LocalSpinRates c0;
  LocalSpinRates c1;

  const LocalSpinRates& for_background(int bit) const { return bit ? c1 : c0; }
  friend bool operator==(const SpinRatePair&, const SpinRatePair&) = default;
};

/// Finite-range, translation-invariant background rate b(x, beta).
///
/// The table is indexed by the window beta(x-R..x+R) read as a binary number
/// with beta(x-R) as the most significant bit.
class EnvRateSpec {
public:
  EnvRateSpec() : EnvRateSpec(0, {0.0, 0.0}) {}
  EnvRateSpec(int range, std::vector<double> table);

  /// Range 0: each site flips 0->1 at `up` and 1->0 at `down`.
  static EnvRateSpec independent(double up, double down);

  int range() const { return range_; }
  int window() const { return 2 * range_ + 1; }
  std::size_t size() const { return table_.size(); }
  double rate(std::uint32_t word) const { return table_[word]; }
  const std::vector<double>& table() const { return table_; }
  int center_bit(std::uint32_t word) const {
    return static_cast<int>((word >> range_) & 1u);
  }
  double sup_with_center(int center) const;

  friend bool operator==(const EnvRateSpec&, const EnvRateSpec&) = default;

private:
  int range_ = 0;
  std::vector<double> table_;
};

enum class BoundaryKind { periodic, frozen };

/// Boundary policy for a finite window standing in for the integers.
///
/// Frozen words are written outward-in on the left (the last character of a
/// left word is the site just left of 0) and inward-out on the right.
struct Boundary {
  BoundaryKind kind = BoundaryKind::periodic;
  std::string spin_left;
  std::string spin_right;
  std::string env_left;
  std::string env_right;

  static Boundary periodic() { return {}; }
  static Boundary frozen(std::string spin_left, std::string spin_right, std::string env_left,
                         std::string env_right);

  bool is_periodic() const { return kind == BoundaryKind::periodic; }

  /// "periodic", "frozen:L|R" (both layers) or "frozen:L|R/EL|ER".
  static Boundary parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const Boundary&, const Boundary&) = default;
};

struct ModelSpec {
  SpinRatePair spin;
  EnvRateSpec env;
  int lattice_size = 1;
  Boundary boundary;

  /// Checks size and boundary word lengths; throws ModelError.
  void check_structure() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// A pair of comparable windows with equal centre that breaks monotonicity.
struct AttractivityViolation {
  std::uint32_t lower = 0;
  std::uint32_t upper = 0;
  int width = 3;
  int center = 0;
  double lower_rate = 0;
  double upper_rate = 0;

  std::string describe() const;
};

struct AttractivityReport {
  bool attractive = true;
  std::vector<AttractivityViolation> violations;
};

struct CompatibilityViolation {
  Triple triple;
  double c0 = 0;
  double c1 = 0;

  std::string describe() const;
};

struct CompatibilityReport {
  bool compatible = true;
  std::vector<CompatibilityViolation> violations;
};

struct DerivedConstants {
  double C = 0;
  double K = 0;
  double b_bar = 0;
  double c_bar0 = 0;
  double c_bar1 = 0;
  double c_bar = 0;
};

/// Monotonicity check for a table over `width`-bit windows with the centre
/// bit at position width/2 (counted from the most significant end).
AttractivityReport check_attractive_table(std::span<const double> table, int width);

AttractivityReport check_attractive(const LocalSpinRates& rates);
AttractivityReport check_attractive(const EnvRateSpec& env);
CompatibilityReport check_compatible(const SpinRatePair& pair);

/// Minimum over the 16 boundary-rate sums that control interface motion.
double compute_C(const SpinRatePair& pair);
double compute_K(const SpinRatePair& pair);
DerivedConstants dominating_rates(const ModelSpec& spec);

struct ValidationReport {
  AttractivityReport c0;
  AttractivityReport c1;
  AttractivityReport env;
  CompatibilityReport compatibility;
  DerivedConstants constants;

  /// Spin tables attractive and compatible. A non-attractive background only
  /// raises `env_warning`.
  bool ok() const { return c0.attractive && c1.attractive && compatibility.compatible; }
  bool env_warning() const { return !env.attractive; }
};

ValidationReport validate(const ModelSpec& spec);

struct PresetParams {
  double gamma = 1.0;
  double delta0 = 2.0;
  double delta1 = 1.0;
  double p = 0.5;
  double lambda = 1.0;
};

/// Named model families:
///   cpree      background flips up at gamma*p, down at gamma*(1-p); births
///              lambda per infected neighbour, deaths delta0 / delta1.
///   contact    cpree with delta1 = delta0.
///   remark_iv  nearest-neighbour voter background at rate gamma with two
///              absorbing states; contact spins (lambda, delta0).
///   remark_vi  background pushed to all ones at rate gamma; spins grow to
///              the right only and c1(001) = c1(011) = 0.
ModelSpec preset(std::string_view name, const PresetParams& params, int lattice_size,
                 const Boundary& boundary = Boundary::periodic());

const std::vector<std::string>& preset_names();

}  // namespace spinenv
