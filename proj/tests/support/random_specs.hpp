#pragma once

#include <random>

#include "spinenv/lattice.hpp"
#include "spinenv/rate_model.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

/// Random attractive, compatible pair built from nonnegative increments.
/// With `positive` every entry is at least 0.05.
spinenv::SpinRatePair random_attractive_pair(Rng& rng, bool positive = false);

/// Random attractive background table of range `range`; strictly positive
/// entries when `positive`.
spinenv::EnvRateSpec random_attractive_env(Rng& rng, int range, bool positive);

/// Arbitrary nonnegative tables, usually neither attractive nor compatible.
spinenv::SpinRatePair random_pair(Rng& rng, bool positive);
spinenv::EnvRateSpec random_env(Rng& rng, int range, bool positive);

spinenv::Configuration random_configuration(Rng& rng, int size,
                                            spinenv::LayerBoundary boundary = {});

}  // namespace testsupport
