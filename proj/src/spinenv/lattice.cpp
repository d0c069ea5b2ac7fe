#include "spinenv/lattice.hpp"

#include <sstream>

namespace spinenv {

LayerBoundary spin_boundary(const Boundary& b) {
  if (b.is_periodic()) return {};
  return {false, b.spin_left, b.spin_right};
}

LayerBoundary env_boundary(const Boundary& b) {
  if (b.is_periodic()) return {};
  return {false, b.env_left, b.env_right};
}

Configuration::Configuration(std::vector<std::uint8_t> bits, LayerBoundary boundary)
    : bits_(std::move(bits)), boundary_(std::move(boundary)) {
  for (auto& v : bits_) {
    if (v > 1) throw ModelError("configuration bits must be 0 or 1");
  }
}

Configuration Configuration::filled(int size, int bit, LayerBoundary boundary) {
  if (size < 0) throw ModelError("configuration size must be nonnegative");
  return Configuration(std::vector<std::uint8_t>(static_cast<std::size_t>(size),
                                                 static_cast<std::uint8_t>(bit)),
                       std::move(boundary));
}

namespace {

std::vector<std::uint8_t> parse_bits(std::string_view s) {
  std::vector<std::uint8_t> out;
  out.reserve(s.size());
  for (char ch : s) {
    if (ch != '0' && ch != '1') {
      throw ModelError("configuration literal may only contain 0, 1 and '|': '" +
                       std::string(s) + "'");
    }
    out.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return out;
}

}  // namespace

Configuration Configuration::parse(std::string_view literal) {
  const auto first = literal.find('|');
  if (first == std::string_view::npos) {
    if (literal.empty()) throw ModelError("configuration literal is empty");
    return Configuration(parse_bits(literal));
  }
  const auto second = literal.find('|', first + 1);
  if (second == std::string_view::npos || literal.find('|', second + 1) != std::string_view::npos) {
    throw ModelError("frozen configuration literal must look like 'L|bits|R'");
  }
  const auto left = literal.substr(0, first);
  const auto mid = literal.substr(first + 1, second - first - 1);
  const auto right = literal.substr(second + 1);
  if (left.empty() || right.empty()) throw ModelError("frozen boundary words must be nonempty");
  if (mid.empty()) throw ModelError("configuration literal has no sites");
  parse_bits(left);
  parse_bits(right);
  return Configuration(parse_bits(mid), LayerBoundary{false, std::string(left), std::string(right)});
}

int Configuration::at(long x) const {
  const long n = size();
  if (x >= 0 && x < n) return bits_[static_cast<std::size_t>(x)];
  if (boundary_.periodic) {
    long r = x % n;
    if (r < 0) r += n;
    return bits_[static_cast<std::size_t>(r)];
  }
  if (x < 0) {
    const long i = static_cast<long>(boundary_.left.size()) + x;
    if (i < 0) throw ModelError("site lies beyond the frozen left boundary word");
    return boundary_.left[static_cast<std::size_t>(i)] - '0';
  }
  const long i = x - n;
  if (i >= static_cast<long>(boundary_.right.size())) {
    throw ModelError("site lies beyond the frozen right boundary word");
  }
  return boundary_.right[static_cast<std::size_t>(i)] - '0';
}

std::string Configuration::bit_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::string Configuration::str() const {
  if (boundary_.periodic) return bit_string();
  return boundary_.left + "|" + bit_string() + "|" + boundary_.right;
}

bool leq(const Configuration& a, const Configuration& b) {
  if (a.size() != b.size()) throw ModelError("leq: configurations differ in length");
  for (int x = 0; x < a.size(); ++x) {
    if (a[x] > b[x]) return false;
  }
  return true;
}

Configuration translate(const Configuration& a, long shift) {
  if (!a.boundary().periodic) throw ModelError("translate is undefined for frozen boundaries");
  std::vector<std::uint8_t> out(a.bits().size());
  const long n = a.size();
  for (long y = 0; y < n; ++y) out[static_cast<std::size_t>(y)] = static_cast<std::uint8_t>(a.at(y - shift));
  return Configuration(std::move(out), a.boundary());
}

std::string neighborhood(const Configuration& a, int x, int radius) {
  std::string w;
  w.reserve(static_cast<std::size_t>(2 * radius + 1));
  for (long y = x - radius; y <= x + radius; ++y) w.push_back(static_cast<char>('0' + a.at(y)));
  return w;
}

std::uint32_t neighborhood_index(const Configuration& a, int x, int radius) {
  std::uint32_t w = 0;
  for (long y = x - radius; y <= x + radius; ++y) w = (w << 1) | static_cast<std::uint32_t>(a.at(y));
  return w;
}

bool ordered(const JointState& s) {
  if (s.spins.size() < 2) return true;
  const auto& lo = s.spins.front();
  const auto& hi = s.spins.back();
  if (!leq(lo, hi)) return false;
  for (std::size_t i = 1; i + 1 < s.spins.size(); ++i) {
    if (!leq(lo, s.spins[i]) || !leq(s.spins[i], hi)) return false;
  }
  return true;
}

std::pair<JointState, JointState> point_mass_states(const ModelSpec& spec) {
  const int n = spec.lattice_size;
  const auto sb = spin_boundary(spec.boundary);
  const auto eb = env_boundary(spec.boundary);
  JointState zero{Configuration::filled(n, 0, eb), {Configuration::filled(n, 0, sb)}};
  JointState one{Configuration::filled(n, 1, eb), {Configuration::filled(n, 1, sb)}};
  return {zero, one};
}

std::string spin_layer_name(std::size_t index, std::size_t count) {
  if (count == 1) return "eta";
  if (index == 0) return "eta";
  if (index + 1 == count) return "xi";
  if (count == 3) return "gamma1";
  std::ostringstream os;
  os << "gamma" << index;
  return os.str();
}

}  // namespace spinenv
