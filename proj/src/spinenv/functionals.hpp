#pragma once

#include <cstdint>
#include <map>

#include "spinenv/lattice.hpp"

namespace spinenv {

/// Interval counts of a coupled triple on the inclusive window [m, n].
///
/// Only "disagreement" sites, where eta = 0 and xi = 1, take part. f is the
/// number of maximal constant runs of gamma along those sites; g[l] counts
/// the runs of length l that have a disagreement site on both sides.
struct IntervalStats {
  int m = 0;
  int n = 0;
  long f = 0;
  std::map<int, long> g;

  long g_at(int l) const {
    auto it = g.find(l);
    return it == g.end() ? 0 : it->second;
  }
};

IntervalStats interval_stats(const Configuration& eta, const Configuration& gamma,
                             const Configuration& xi, int m, int n);

long compute_f(const Configuration& eta, const Configuration& gamma, const Configuration& xi,
               int m, int n);

std::map<int, long> compute_g(const Configuration& eta, const Configuration& gamma,
                              const Configuration& xi, int m, int n);

/// f and every g^l are no smaller on [m-1, n] and on [m, n+1] than on
/// [m, n]. The window must be extendable by one site on both sides.
bool check_monotone(const Configuration& eta, const Configuration& gamma, const Configuration& xi,
                    int m, int n);

}  // namespace spinenv
