#include "doctest.h"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinenv/coupling.hpp"
#include "spinenv/exact_oracle.hpp"
#include "spinenv/graphical.hpp"
#include "support/random_specs.hpp"

using namespace spinenv;

namespace {

Eigen::MatrixXd dense(const GeneratorMatrix& g) { return Eigen::MatrixXd(g.q); }

ModelSpec random_spec(testsupport::Rng& rng, int n) {
  ModelSpec s;
  s.spin = testsupport::random_attractive_pair(rng, true);
  s.env = testsupport::random_attractive_env(rng, static_cast<int>(rng() % 2), true);
  s.lattice_size = n;
  return s;
}

}  // namespace

TEST_CASE("single-site cpree generator") {
  const ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.3, 1.0}, 1);
  const auto g = build_generator(spec);
  REQUIRE(g.dimension() == 4);
  Eigen::MatrixXd want(4, 4);
  // Codes (beta << 1) | eta. The site is its own neighbour, so eta = 0 has
  // no births.
  want << -0.3, 0.0, 0.3, 0.0,
          2.0, -2.3, 0.0, 0.3,
          0.7, 0.0, -0.7, 0.0,
          0.0, 0.7, 1.0, -1.7;
  CHECK((dense(g) - want).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(g.rate(1, 0) == 2.0);
  CHECK(g.outflow(3) == doctest::Approx(1.7));
  CHECK(g.max_outflow == doctest::Approx(2.3));

  const auto st = stationary_set(g);
  REQUIRE(st.dimension() == 1);
  REQUIRE(st.closed_classes.size() == 1);
  CHECK(st.closed_classes[0] == std::vector<std::size_t>{0, 2});
  const auto& pi = st.extreme_points[0];
  CHECK(pi(0) == doctest::Approx(0.7));
  CHECK(pi(2) == doctest::Approx(0.3));
  CHECK(pi(1) == 0.0);
  CHECK(st.max_residual < 1e-12);
  CHECK(st.numerical_nullity == 1);
  CHECK_FALSE(st.rank_ambiguous);
}

TEST_CASE("background flip probability in closed form") {
  const double gamma = 1.3, p = 0.4;
  const ModelSpec spec = preset("cpree", {gamma, 2.0, 1.0, p, 1.0}, 1);
  const auto g = build_generator(spec);
  for (double t : {0.0, 0.1, 0.7, 2.0, 9.0}) {
    const auto r = semigroup_apply(g, point_mass(g, 0), t);
    CHECK(r.distribution(2) == doctest::Approx(p * (1 - std::exp(-gamma * t))).epsilon(1e-12));
    CHECK(r.distribution.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.truncation_error < 1e-12);
  }
}

TEST_CASE("generator rows sum to zero and match the matrix exponential") {
  testsupport::Rng rng(71);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 3;
    const ModelSpec spec = random_spec(rng, n);
    const auto g = build_generator(spec);
    CHECK(g.dimension() == (std::size_t{1} << (2 * n)));
    const Eigen::MatrixXd q = dense(g);
    CHECK(q.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (i != j) CHECK(q(i, j) >= 0.0);
      }
    }
    const double t = 0.8;
    const Eigen::MatrixXd p = (q * t).exp();
    const auto start = static_cast<std::uint64_t>(rng() % g.dimension());
    const auto r = semigroup_apply(g, point_mass(g, start), t);
    CHECK((r.distribution.transpose() - p.row(static_cast<Eigen::Index>(start))).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("independent sites give a product stationary law") {
  const double a = 0.6, d = 1.4, up = 0.5, down = 2.0;
  ModelSpec spec;
  std::array<double, 8> v{};
  for (unsigned i = 0; i < 8; ++i) v[i] = Triple::from_index(i).center ? d : a;
  spec.spin = {LocalSpinRates(v), LocalSpinRates(v)};
  spec.env = EnvRateSpec::independent(up, down);
  spec.lattice_size = 3;
  const auto g = build_generator(spec);
  const auto st = stationary_set(g);
  REQUIRE(st.dimension() == 1);
  const double pb = up / (up + down), pe = a / (a + d);
  const auto& pi = st.extreme_points[0];
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    const auto s = unpack_state(spec, g.codes[i], 1);
    double want = 1;
    for (int x = 0; x < 3; ++x) {
      want *= s.beta[x] ? pb : 1 - pb;
      want *= s.eta()[x] ? pe : 1 - pe;
    }
    CHECK(pi(static_cast<Eigen::Index>(i)) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("pack and unpack") {
  const ModelSpec spec = preset("cpree", {}, 3);
  JointState s{Configuration::parse("100"), {Configuration::parse("001"), Configuration::parse("011")}};
  const auto code = pack_state(s);
  CHECK(code == 0b100'001'011u);
  CHECK(unpack_state(spec, code, 2) == s);
  for (std::uint64_t c = 0; c < 64; ++c) CHECK(pack_state(unpack_state(spec, c, 1)) == c);
}

TEST_CASE("coupled generator is lumpable onto each layer") {
  testsupport::Rng rng(72);
  for (int rep = 0; rep < 4; ++rep) {
    const ModelSpec spec = random_spec(rng, 2 + rep % 2);
    const int n = spec.lattice_size;
    const auto plain = build_generator(spec);
    for (int layers : {1, 2, 3}) {
      const auto g = build_coupled_generator(spec, layers);
      std::size_t expected = std::size_t{1} << n;
      for (int x = 0; x < n; ++x) expected *= static_cast<std::size_t>(layers + 1);
      CHECK(g.dimension() == expected);
      const Eigen::MatrixXd q = dense(g);
      CHECK(q.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
      for (int keep = 0; keep < layers; ++keep) {
        for (std::size_t i = 0; i < g.dimension(); ++i) {
          const auto s = unpack_state(spec, g.codes[i], layers);
          auto project = [&](const JointState& js) {
            return pack_state(JointState{js.beta, {js.spins[static_cast<std::size_t>(keep)]}});
          };
          const auto from = plain.index_of(project(s));
          std::map<std::size_t, double> lumped;
          for (Eigen::Index j = 0; j < q.cols(); ++j) {
            if (static_cast<std::size_t>(j) == i || q(static_cast<Eigen::Index>(i), j) == 0.0) continue;
            const auto to = plain.index_of(project(unpack_state(spec, g.codes[static_cast<std::size_t>(j)], layers)));
            if (to != from) lumped[to] += q(static_cast<Eigen::Index>(i), j);
          }
          for (const auto& [to, rate] : lumped) CHECK(rate == doctest::Approx(plain.rate(from, to)));
          double total = 0;
          for (const auto& [to, rate] : lumped) total += rate;
          CHECK(total == doctest::Approx(plain.outflow(from)));
        }
      }
    }
  }
}

TEST_CASE("size caps") {
  CHECK_THROWS_AS(build_generator(preset("cpree", {}, 7)), CapacityError);
  CHECK_NOTHROW(build_generator(preset("cpree", {}, 6)));
  CHECK_THROWS_AS(build_coupled_generator(preset("cpree", {}, 6), 3), CapacityError);
  CHECK_THROWS_AS(build_coupled_generator(preset("cpree", {}, 2), 5), ModelError);
  const auto g = build_generator(preset("cpree", {}, 2));
  CHECK_THROWS_AS(g.index_of(99), std::out_of_range);
}

TEST_CASE("point-mass limits for subcritical cpree") {
  const ModelSpec spec = preset("cpree", {}, 3);
  const auto g = build_generator(spec);
  const auto lim = nu_limits(g);
  CHECK(lim.converged);
  CHECK(lim.tv < 1e-6);
  const auto st = stationary_set(g);
  REQUIRE(st.dimension() == 1);
  CHECK(total_variation(st.extreme_points[0], lim.nu0) < 1e-6);
  const double h = calibrate_horizon(g, lim, 1e-3);
  CHECK(h > 0);
  CHECK(total_variation(semigroup_apply(g, point_mass(g, g.codes.back()), h).distribution, lim.nu1) <= 1e-3);
  const auto desk = extremal_desk_check(g);
  CHECK(desk.dimension == 1);
  CHECK(desk.nu_converged);
  CHECK(desk.worst_extreme_gap < 1e-6);

  CHECK(total_variation(point_mass(g, 0), point_mass(g, 1)) == 1.0);
}

TEST_CASE("remark vi: several absorbing staircases") {
  ModelSpec spec = preset("remark_vi", {}, 4, Boundary::frozen("0", "1", "1", "1"));
  const auto g = build_generator(spec);
  const auto st = stationary_set(g);
  CHECK(st.dimension() == 5);
  CHECK(st.numerical_nullity == 5);
  CHECK_FALSE(st.rank_ambiguous);
  for (const auto& cls : st.closed_classes) {
    REQUIRE(cls.size() == 1);
    const auto s = unpack_state(spec, g.codes[cls[0]], 1);
    CHECK(s.beta.bit_string() == "1111");
    // eta is a staircase: zeros then ones.
    const auto e = s.eta().bit_string();
    CHECK(e.find("10") == std::string::npos);
  }
  const auto lim = nu_limits(g);
  CHECK(lim.converged);
  CHECK(lim.tv > 0.5);
}

TEST_CASE("remark iv: voter background with two traps") {
  const ModelSpec spec = preset("remark_iv", {}, 3);
  const auto g = build_generator(spec);
  const auto st = stationary_set(g);
  CHECK(st.dimension() >= 2);
  CHECK(st.max_residual < 1e-10);
  for (const auto& pi : st.extreme_points) CHECK(pi.sum() == doctest::Approx(1.0));
}
