#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spinenv/rate_model.hpp"

namespace spinenv {

/// Boundary of a single layer: a ring, or fixed words outside [0, N).
struct LayerBoundary {
  bool periodic = true;
  std::string left;
  std::string right;

  friend bool operator==(const LayerBoundary&, const LayerBoundary&) = default;
};

LayerBoundary spin_boundary(const Boundary& b);
LayerBoundary env_boundary(const Boundary& b);

/// A 0/1 configuration on sites 0..N-1 plus its boundary policy.
class Configuration {
public:
  Configuration() = default;
  Configuration(std::vector<std::uint8_t> bits, LayerBoundary boundary = {});

  static Configuration filled(int size, int bit, LayerBoundary boundary = {});
  /// "0110" (periodic) or "L|0110|R" (frozen).
  static Configuration parse(std::string_view literal);

  int size() const { return static_cast<int>(bits_.size()); }
  int operator[](int x) const { return bits_[static_cast<std::size_t>(x)]; }
  void set(int x, int bit) { bits_[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(bit); }
  void flip(int x) { bits_[static_cast<std::size_t>(x)] ^= 1u; }

  /// Value at any integer site, resolved through the boundary.
  int at(long x) const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }
  const LayerBoundary& boundary() const { return boundary_; }
  /// Just the N bits.
  std::string bit_string() const;
  /// Literal form including frozen words.
  std::string str() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

private:
  std::vector<std::uint8_t> bits_;
  LayerBoundary boundary_;
};

/// Pointwise order; throws ModelError on length mismatch.
bool leq(const Configuration& a, const Configuration& b);

/// Cyclic shift: result(y) = a(y - shift). Frozen boundaries throw.
Configuration translate(const Configuration& a, long shift);

/// The window a(x-radius..x+radius) as a plain bit word.
std::string neighborhood(const Configuration& a, int x, int radius);

/// Same window packed as an integer, leftmost site most significant.
std::uint32_t neighborhood_index(const Configuration& a, int x, int radius);

inline Triple triple_at(const Configuration& a, int x) {
  return Triple{a.at(x - 1L), a[x], a.at(x + 1L)};
}

/// Background layer plus one or more spin layers. For coupled processes the
/// layers are (eta, gamma..., xi) with eta first and xi last.
struct JointState {
  Configuration beta;
  std::vector<Configuration> spins;

  const Configuration& eta() const { return spins.front(); }
  const Configuration& xi() const { return spins.back(); }

  friend bool operator==(const JointState&, const JointState&) = default;
};

/// eta <= every middle layer <= xi.
bool ordered(const JointState& s);

/// All-zero and all-one joint states for a spec.
std::pair<JointState, JointState> point_mass_states(const ModelSpec& spec);

/// Layer names used in logs and exports.
std::string spin_layer_name(std::size_t index, std::size_t count);

}  // namespace spinenv
