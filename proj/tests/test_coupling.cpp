#include "doctest.h"

#include <array>

#include "spinenv/coupling.hpp"
#include "support/random_specs.hpp"
#include "support/table_oracle.hpp"

using namespace spinenv;

namespace {

JointState state(const char* beta, std::initializer_list<const char*> spins) {
  JointState s{Configuration::parse(beta), {}};
  for (const char* w : spins) s.spins.push_back(Configuration::parse(w));
  return s;
}

}  // namespace

TEST_CASE("table row for (0,0,1,1) under beta = 0") {
  std::array<double, 8> v{};
  v[Triple{0, 0, 0}.index()] = 0.5;
  v[Triple{0, 0, 1}.index()] = v[Triple{1, 0, 0}.index()] = 1.0;
  v[Triple{1, 0, 1}.index()] = 2.0;
  v[Triple{0, 1, 0}.index()] = 3.0;
  v[Triple{0, 1, 1}.index()] = v[Triple{1, 1, 0}.index()] = 2.0;
  v[Triple{1, 1, 1}.index()] = 1.0;
  ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.5, 1.0}, 3);
  spec.spin = {LocalSpinRates(v), LocalSpinRates(v)};
  REQUIRE(validate(spec).ok());

  // Site 1 with eta = 000, gamma = 010, xi = 111.
  const auto r = coupled_event_rates(spec, state("000", {"000", "010", "111"}), 1);
  CHECK(r.background == 0.5);
  REQUIRE(r.spin.size() == 3);
  CHECK(r.spin.at(0b110) == 1.0);        // gamma and xi down together at c0(xi)
  CHECK(r.spin.at(0b010) == 3.0 - 1.0);  // gamma alone at c0(gamma) - c0(xi)
  CHECK(r.spin.at(0b001) == 0.5);        // eta up alone at c0(eta)
  CHECK(r.total() == doctest::Approx(4.0));

  const auto r2 = coupled_event_rates(spec, state("000", {"100", "110", "111"}), 1);
  CHECK(r2.spin.at(0b001) == 1.0);
  CHECK(r2.spin.at(0b010) == 1.0);
  CHECK(r2.spin.at(0b110) == 1.0);
}

TEST_CASE("equal layers move together") {
  testsupport::Rng rng(61);
  for (int rep = 0; rep < 50; ++rep) {
    const auto spin = testsupport::random_attractive_pair(rng, true);
    for (unsigned w = 0; w < 8; ++w) {
      const Triple t = Triple::from_index(w);
      for (int beta = 0; beta < 2; ++beta) {
        const std::array<Triple, 3> layers{t, t, t};
        const auto r = coupled_spin_rates(spin, beta, layers);
        REQUIRE(r.size() == 1);
        CHECK(r.at(0b111) == spin.for_background(beta)(t));
      }
    }
  }
}

TEST_CASE("one, two and four layers are consistent with the three-layer table") {
  testsupport::Rng rng(62);
  for (int rep = 0; rep < 60; ++rep) {
    const auto spin = testsupport::random_attractive_pair(rng, rep % 2);
    for (int beta = 0; beta < 2; ++beta) {
      const auto& c = spin.for_background(beta);
      for (unsigned e = 0; e < 8; ++e) {
        for (unsigned x = 0; x < 8; ++x) {
          if (e & ~x) continue;
          const Triple te = Triple::from_index(e), tx = Triple::from_index(x);
          const auto one = coupled_spin_rates(spin, beta, std::array<Triple, 1>{te});
          CHECK(one.size() == (c(te) > 0 ? 1u : 0u));
          if (c(te) > 0) CHECK(one.at(1) == c(te));

          // Two layers: (eta, xi) equals the table with gamma = eta.
          const auto two = coupled_spin_rates(spin, beta, std::array<Triple, 2>{te, tx});
          const auto three = testsupport::table_rates(spin, beta, te, te, tx);
          std::map<std::uint32_t, double> projected;
          for (const auto& [mask, r] : three) {
            const std::uint32_t m2 = (mask & 1u) | ((mask >> 2) & 1u) << 1;
            if (m2) projected[m2] += r;
          }
          REQUIRE(two.size() == projected.size());
          for (const auto& [mask, r] : projected) CHECK(two.at(mask) == doctest::Approx(r));

          for (unsigned g1 = 0; g1 < 8; ++g1) {
            for (unsigned g2 = 0; g2 < 8; ++g2) {
              if ((e & ~g1) || (g1 & ~x) || (e & ~g2) || (g2 & ~x)) continue;
              const Triple t1 = Triple::from_index(g1), t2 = Triple::from_index(g2);
              const auto four = coupled_spin_rates(spin, beta, std::array<Triple, 4>{te, t1, t2, tx});
              for (int which = 1; which <= 2; ++which) {
                std::map<std::uint32_t, double> proj;
                for (const auto& [mask, r] : four) {
                  const std::uint32_t m3 =
                      (mask & 1u) | ((mask >> which) & 1u) << 1 | ((mask >> 3) & 1u) << 2;
                  if (m3) proj[m3] += r;
                }
                const auto ref = testsupport::table_rates(spin, beta, te, which == 1 ? t1 : t2, tx);
                REQUIRE(proj.size() == ref.size());
                for (const auto& [mask, r] : ref) CHECK(proj.at(mask) == doctest::Approx(r));
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("agreement classification") {
  const auto z = Configuration::parse("0000"), o = Configuration::parse("1111");
  auto a3 = classify_agreement(z, Configuration::parse("0011"), o);
  CHECK(a3.kind == AgreementKind::A3);
  CHECK(a3.interface == 1);
  CHECK(std::string(a3.name()) == "A3");

  auto a4 = classify_agreement(z, Configuration::parse("1000"), o);
  CHECK(a4.kind == AgreementKind::A4);
  CHECK(a4.interface == 0);

  CHECK(classify_agreement(z, z, o).kind == AgreementKind::A1);
  CHECK(classify_agreement(z, o, o).kind == AgreementKind::A2);
  CHECK(classify_agreement(Configuration::parse("0100"), Configuration::parse("0100"),
                           Configuration::parse("0111")).kind == AgreementKind::A1);
  CHECK(classify_agreement(z, Configuration::parse("0101"), o).kind == AgreementKind::none);
  CHECK_THROWS_AS(classify_agreement(o, z, o), ModelError);

  // eta = gamma = xi lies in every class.
  for (auto k : {AgreementKind::A1, AgreementKind::A2, AgreementKind::A3, AgreementKind::A4}) {
    CHECK(in_agreement_class(k, z, z, z));
  }
  CHECK(in_agreement_class(AgreementKind::A3, z, z, o));
  CHECK_FALSE(in_agreement_class(AgreementKind::A4, z, Configuration::parse("0011"), o));

  // On a frozen window the sentinels come from the boundary words.
  const auto fz = Configuration::parse("0|0000|0");
  const auto fo = Configuration::parse("1|1111|1");
  CHECK(classify_agreement(fz, Configuration::parse("0|0011|1"), fo).kind == AgreementKind::A3);
  CHECK(classify_agreement(fz, Configuration::parse("1|0011|1"), fo).kind == AgreementKind::none);
}

TEST_CASE("simulate_coupled basics") {
  const ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.5, 1.5}, 6);
  CoupledSpec cs{spec, 3};

  // Identical layers stay identical.
  const auto same = state("010101", {"110000", "110000", "110000"});
  const auto run = simulate_coupled(cs, same, 4, 3.0);
  const auto& f = run.trajectory.final_state;
  CHECK(f.spins[0] == f.spins[1]);
  CHECK(f.spins[1] == f.spins[2]);
  CHECK(replay(run.trajectory.initial, run.trajectory.events) == f);

  // Same seed, same path.
  const auto again = simulate_coupled(cs, same, 4, 3.0);
  CHECK(again.trajectory.events == run.trajectory.events);

  CHECK_THROWS_AS(simulate_coupled(cs, state("000000", {"111111", "000000", "111111"}), 1, 1.0),
                  ModelError);
  CHECK_THROWS_AS(simulate_coupled(cs, state("000000", {"000000", "111111"}), 1, 1.0), ModelError);
}

TEST_CASE("coupled runs stay ordered") {
  testsupport::Rng rng(63);
  for (int rep = 0; rep < 40; ++rep) {
    ModelSpec spec;
    spec.spin = testsupport::random_attractive_pair(rng, true);
    spec.env = testsupport::random_attractive_env(rng, 1, true);
    spec.lattice_size = 5;
    const int layers = 1 + static_cast<int>(rng() % 4);
    JointState s{testsupport::random_configuration(rng, 5), {}};
    std::vector<int> column(5);
    for (auto& c : column) c = static_cast<int>(rng() % static_cast<unsigned>(layers + 1));
    for (int j = 0; j < layers; ++j) {
      std::vector<std::uint8_t> bits(5);
      for (int x = 0; x < 5; ++x) bits[static_cast<std::size_t>(x)] = j >= layers - column[static_cast<std::size_t>(x)];
      s.spins.emplace_back(bits);
    }
    REQUIRE(ordered(s));
    const auto run = simulate_coupled({spec, layers}, s, 70 + rep, 4.0);
    CHECK(run.trajectory.order_violations == 0);
    CHECK(ordered(run.trajectory.final_state));
  }
}

TEST_CASE("agreement classes are absorbing on frozen windows") {
  ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.5, 2.0}, 8, Boundary::frozen("0", "1", "0", "1"));
  CoupledOptions opt;
  opt.check_classes = true;
  const JointState starts[] = {
      state("0|01100110|1", {"0|00000000|1", "0|00000000|1", "0|11111111|1"}),
      state("0|01100110|1", {"0|00000000|1", "0|11111111|1", "0|11111111|1"}),
      state("0|01100110|1", {"0|00000000|1", "0|00011111|1", "0|11111111|1"}),
      state("0|11111111|1", {"0|00100000|1", "0|00100111|1", "0|01110111|1"}),
  };
  for (const auto& s : starts) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto run = simulate_coupled({spec, 3}, s, seed, 5.0, opt);
      CHECK(run.class_exits == 0);
    }
  }
}
