#include "doctest.h"

#include <random>

#include "spinenv/coupling.hpp"
#include "spinenv/functionals.hpp"

using namespace spinenv;

namespace {

struct Triplet {
  Configuration eta, gamma, xi;
};

// Columns m..n of the example in the text, read off top to bottom as xi,
// gamma, eta.
Triplet worked_example() {
  return {Configuration::parse("10000000000"), Configuration::parse("10110010110"),
          Configuration::parse("10111110111")};
}

/// Uniform ordered triple: each site picks one of the four columns
/// (0,0,0), (0,0,1), (0,1,1), (1,1,1).
Triplet random_ordered(std::mt19937_64& rng, int n) {
  std::vector<std::uint8_t> e(n), g(n), x(n);
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng() % 4);
    e[i] = c >= 3;
    g[i] = c >= 2;
    x[i] = c >= 1;
  }
  return {Configuration(e), Configuration(g), Configuration(x)};
}

/// Ordered triple number `code` in base 4 (same column encoding).
Triplet ordered_from_code(std::uint32_t code, int n) {
  std::vector<std::uint8_t> e(n), g(n), x(n);
  for (int i = 0; i < n; ++i) {
    const unsigned c = (code >> (2 * i)) & 3u;
    e[i] = c >= 3;
    g[i] = c >= 2;
    x[i] = c >= 1;
  }
  return {Configuration(e), Configuration(g), Configuration(x)};
}

std::vector<int> disagreement_values(const Triplet& t, int m, int n) {
  std::vector<int> v;
  for (int x = m; x <= n; ++x) {
    if (t.eta[x] == 0 && t.xi[x] == 1) v.push_back(t.gamma[x]);
  }
  return v;
}

long brute_f(const Triplet& t, int m, int n) {
  const auto v = disagreement_values(t, m, n);
  if (v.empty()) return 0;
  long f = 1;
  for (std::size_t i = 1; i < v.size(); ++i) f += v[i] != v[i - 1];
  return f;
}

/// The defining condition, with 1-based i as written.
long brute_g(const Triplet& t, int m, int n, int l) {
  const auto v = disagreement_values(t, m, n);
  const int k = static_cast<int>(v.size());
  auto gam = [&](int i) { return v[static_cast<std::size_t>(i - 1)]; };
  long count = 0;
  for (int i = 1; i + l + 1 <= k; ++i) {
    bool ok = gam(i) != gam(i + 1) && gam(i + l) != gam(i + l + 1);
    for (int j = i + 1; j < i + l; ++j) ok = ok && gam(j) == gam(j + 1);
    count += ok;
  }
  return count;
}

void check_against_brute_force(const Triplet& t, int m, int n) {
  const auto s = interval_stats(t.eta, t.gamma, t.xi, m, n);
  REQUIRE(s.f == brute_f(t, m, n));
  const int len = n - m + 1;
  long total = 0, weighted = 0;
  for (int l = 1; l <= len; ++l) {
    REQUIRE(s.g_at(l) == brute_g(t, m, n, l));
    total += s.g_at(l);
    weighted += l * s.g_at(l);
  }
  for (const auto& [l, c] : s.g) REQUIRE((l >= 1 && l <= len && c > 0));
  // Parts (b) and (c).
  REQUIRE(s.f <= 2 + total);
  REQUIRE(weighted <= len);
}

void check_monotonicity_all(const Triplet& t) {
  const int size = t.eta.size();
  for (int m = 1; m < size - 1; ++m) {
    for (int n = m; n < size - 1; ++n) {
      REQUIRE(check_monotone(t.eta, t.gamma, t.xi, m, n));
      const long f = compute_f(t.eta, t.gamma, t.xi, m, n);
      REQUIRE(compute_f(t.eta, t.gamma, t.xi, m - 1, n) <= f + 1);
      REQUIRE(compute_f(t.eta, t.gamma, t.xi, m, n + 1) <= f + 1);
    }
  }
}

}  // namespace

TEST_CASE("worked example") {
  const auto t = worked_example();
  const auto s = interval_stats(t.eta, t.gamma, t.xi, 0, 10);
  CHECK(s.f == 4);
  CHECK(s.g == std::map<int, long>{{2, 1}, {3, 1}});
  CHECK(s.g_at(1) == 0);
  CHECK(s.g_at(4) == 0);

  // Dropping the leftmost disagreement site (index 2) removes nothing yet;
  // dropping the whole first run lowers f and the g counts.
  CHECK(compute_f(t.eta, t.gamma, t.xi, 3, 10) == 4);
  CHECK(compute_f(t.eta, t.gamma, t.xi, 4, 10) == 3);
  CHECK(compute_g(t.eta, t.gamma, t.xi, 4, 10) == std::map<int, long>{{3, 1}});
  CHECK(check_monotone(t.eta, t.gamma, t.xi, 4, 9));
  CHECK(classify_agreement(t.eta, t.gamma, t.xi).kind == AgreementKind::none);
}

TEST_CASE("degenerate windows") {
  const auto a = Configuration::parse("0101");
  CHECK(compute_f(a, a, a, 0, 3) == 0);
  CHECK(compute_g(a, a, a, 0, 3).empty());
  const auto z = Configuration::parse("0000"), o = Configuration::parse("1111");
  CHECK(compute_f(z, Configuration::parse("0110"), o, 0, 3) == 3);
  CHECK(compute_g(z, Configuration::parse("0110"), o, 0, 3) == std::map<int, long>{{2, 1}});
  CHECK(compute_g(z, Configuration::parse("0011"), o, 0, 3).empty());
  CHECK_THROWS_AS(compute_f(o, z, o, 0, 3), ModelError);
  CHECK_THROWS_AS(compute_f(z, z, o, 2, 1), ModelError);
  CHECK_THROWS_AS(compute_f(z, z, o, 0, 4), ModelError);
  CHECK_THROWS_AS(check_monotone(z, z, o, 0, 2), ModelError);
}

TEST_CASE("exhaustive check on short windows") {
  for (int n = 1; n <= 6; ++n) {
    for (std::uint32_t code = 0; code < (1u << (2 * n)); ++code) {
      const auto t = ordered_from_code(code, n);
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) check_against_brute_force(t, a, b);
      }
      check_monotonicity_all(t);
    }
  }
}

TEST_CASE("random triples up to length 12") {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 3000; ++rep) {
    const int n = 7 + static_cast<int>(rng() % 6);
    const auto t = random_ordered(rng, n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) check_against_brute_force(t, a, b);
    }
    check_monotonicity_all(t);
  }
}

TEST_CASE("classification is non-NONE exactly when every g vanishes") {
  for (int n = 1; n <= 6; ++n) {
    for (std::uint32_t code = 0; code < (1u << (2 * n)); ++code) {
      const auto t = ordered_from_code(code, n);
      bool all_zero = true;
      for (int a = 0; a < n && all_zero; ++a) {
        for (int b = a; b < n && all_zero; ++b) all_zero = compute_g(t.eta, t.gamma, t.xi, a, b).empty();
      }
      const auto c = classify_agreement(t.eta, t.gamma, t.xi);
      REQUIRE((c.kind != AgreementKind::none) == all_zero);
      REQUIRE(c.interface.has_value() ==
              (c.kind == AgreementKind::A3 || c.kind == AgreementKind::A4));
    }
  }
}
