#pragma once

#include <cstdint>
#include <map>

#include "spinenv/rate_model.hpp"

namespace testsupport {

/// The maximal coupling tables written out cell by cell. Input: background
/// bit and the triples of eta, gamma, xi at one site (centres must be
/// ordered). Output: flip mask (bit 0 eta, bit 1 gamma, bit 2 xi) -> rate,
/// zero cells dropped. Negative cells are returned as they are.
std::map<std::uint32_t, double> table_rates(const spinenv::SpinRatePair& spin, int beta,
                                            spinenv::Triple eta, spinenv::Triple gamma,
                                            spinenv::Triple xi);

}  // namespace testsupport
