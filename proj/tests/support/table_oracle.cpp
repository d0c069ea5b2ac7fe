#include "support/table_oracle.hpp"

#include <array>
#include <stdexcept>

namespace testsupport {

std::map<std::uint32_t, double> table_rates(const spinenv::SpinRatePair& spin, int beta,
                                            spinenv::Triple eta, spinenv::Triple gamma,
                                            spinenv::Triple xi) {
  const auto& c = spin.for_background(beta);
  const double ce = c(eta), cg = c(gamma), cx = c(xi);
  // Rows/columns: (eta, gamma, xi) centres 000, 001, 011, 111.
  const std::array<std::array<unsigned, 3>, 4> pattern{{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
  const double nan = 0.0 / 0.0;
  const std::array<std::array<double, 4>, 4> table{{
      {nan, cx - cg, cg - ce, ce},
      {cx, nan, cg - ce, ce},
      {cx, cg - cx, nan, ce},
      {cx, cg - cx, ce - cg, nan},
  }};
  const std::array<unsigned, 3> centre{static_cast<unsigned>(eta.center),
                                       static_cast<unsigned>(gamma.center),
                                       static_cast<unsigned>(xi.center)};
  int row = -1;
  for (int r = 0; r < 4; ++r) {
    if (pattern[static_cast<std::size_t>(r)] == centre) row = r;
  }
  if (row < 0) throw std::invalid_argument("centres are not ordered");
  std::map<std::uint32_t, double> out;
  for (int col = 0; col < 4; ++col) {
    if (col == row) continue;
    const double rate = table[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    if (rate == 0.0) continue;
    std::uint32_t mask = 0;
    for (int j = 0; j < 3; ++j) {
      if (pattern[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] !=
          pattern[static_cast<std::size_t>(col)][static_cast<std::size_t>(j)]) {
        mask |= 1u << j;
      }
    }
    out[mask] = rate;
  }
  return out;
}

}  // namespace testsupport
