#include "spinenv/functionals.hpp"

#include <vector>

namespace spinenv {

namespace {

void check_window(const Configuration& eta, const Configuration& gamma, const Configuration& xi,
                  int m, int n) {
  if (eta.size() != gamma.size() || gamma.size() != xi.size()) {
    throw ModelError("interval functionals need layers of equal length");
  }
  if (m > n || m < 0 || n >= eta.size()) throw ModelError("window [m, n] must lie inside the lattice");
  for (int x = m; x <= n; ++x) {
    if (eta[x] > gamma[x] || gamma[x] > xi[x]) {
      throw ModelError("interval functionals need eta <= gamma <= xi");
    }
  }
}

/// Lengths of the constant runs of gamma along the disagreement sites.
std::vector<int> disagreement_runs(const Configuration& eta, const Configuration& gamma,
                                   const Configuration& xi, int m, int n) {
  std::vector<int> runs;
  int last = -1;
  for (int x = m; x <= n; ++x) {
    if (!(eta[x] == 0 && xi[x] == 1)) continue;
    if (gamma[x] == last) {
      ++runs.back();
    } else {
      runs.push_back(1);
      last = gamma[x];
    }
  }
  return runs;
}

}  // namespace

IntervalStats interval_stats(const Configuration& eta, const Configuration& gamma,
                             const Configuration& xi, int m, int n) {
  check_window(eta, gamma, xi, m, n);
  const auto runs = disagreement_runs(eta, gamma, xi, m, n);
  IntervalStats s;
  s.m = m;
  s.n = n;
  s.f = static_cast<long>(runs.size());
  for (std::size_t i = 1; i + 1 < runs.size(); ++i) ++s.g[runs[i]];
  return s;
}

long compute_f(const Configuration& eta, const Configuration& gamma, const Configuration& xi,
               int m, int n) {
  return interval_stats(eta, gamma, xi, m, n).f;
}

std::map<int, long> compute_g(const Configuration& eta, const Configuration& gamma,
                              const Configuration& xi, int m, int n) {
  return interval_stats(eta, gamma, xi, m, n).g;
}

bool check_monotone(const Configuration& eta, const Configuration& gamma, const Configuration& xi,
                    int m, int n) {
  if (m - 1 < 0 || n + 1 >= eta.size()) {
    throw ModelError("check_monotone needs a window extendable by one on both sides");
  }
  const auto base = interval_stats(eta, gamma, xi, m, n);
  for (const auto& wider : {interval_stats(eta, gamma, xi, m - 1, n),
                            interval_stats(eta, gamma, xi, m, n + 1)}) {
    if (wider.f < base.f) return false;
    for (const auto& [l, count] : base.g) {
      if (wider.g_at(l) < count) return false;
    }
  }
  return true;
}

}  // namespace spinenv
