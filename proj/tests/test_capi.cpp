// Exercises the shared library through the public header only.
#include "doctest.h"

#include <cstring>
#include <string>

#include "spinenv/spinenv.h"

namespace {

struct Model {
  spe_model* m = nullptr;
  ~Model() { spe_model_free(m); }
};

struct Str {
  char* p = nullptr;
  ~Str() { spe_string_free(p); }
  std::string s() const { return p ? p : ""; }
};

spe_preset_params defaults() {
  spe_preset_params p;
  spe_preset_defaults(&p);
  return p;
}

const char* kConfig =
    "[spin.c0]\n000 = 0\n001 = 1\n010 = 2\n011 = 2\n100 = 1\n101 = 2\n110 = 2\n111 = 2\n"
    "[spin.c1]\n000 = 0\n001 = 1\n010 = 1\n011 = 1\n100 = 1\n101 = 2\n110 = 1\n111 = 1\n"
    "[env]\nrange = 0\n0 = 0.5\n1 = 0.5\n"
    "[lattice]\nsize = 3\nboundary = periodic\n";

}  // namespace

TEST_CASE("version and defaults") {
  CHECK(std::strlen(spe_version()) > 0);
  const auto p = defaults();
  CHECK(p.gamma == 1.0);
  CHECK(p.delta0 == 2.0);
  CHECK(p.delta1 == 1.0);
  CHECK(p.lambda == 1.0);
}

TEST_CASE("models from presets and configs") {
  Model a;
  const auto p = defaults();
  REQUIRE(spe_model_from_preset("cpree", &p, 3, "periodic", &a.m) == SPE_OK);
  CHECK(spe_model_sites(a.m) == 3);
  spe_constants k;
  REQUIRE(spe_model_constants(a.m, &k) == SPE_OK);
  CHECK(k.C == 2.0);
  CHECK(k.K == 2.0);
  CHECK(k.c_bar0 == 4.0);
  CHECK(k.c_bar1 == 3.0);
  CHECK(k.c_bar == 7.0);
  CHECK(k.b_bar == doctest::Approx(1.0));

  Str cfg;
  REQUIRE(spe_model_to_config(a.m, &cfg.p) == SPE_OK);
  Model b;
  REQUIRE(spe_model_from_config(cfg.p, &b.m) == SPE_OK);
  Str cfg2;
  REQUIRE(spe_model_to_config(b.m, &cfg2.p) == SPE_OK);
  CHECK(cfg.s() == cfg2.s());

  Model c;
  REQUIRE(spe_model_from_config(kConfig, &c.m) == SPE_OK);
  Str report;
  CHECK(spe_model_validate(c.m, &report.p) == SPE_OK);
  CHECK(report.s().find("\"ok\": true") != std::string::npos);
}

TEST_CASE("error codes") {
  Model m;
  auto p = defaults();
  p.delta1 = 3.0;
  CHECK(spe_model_from_preset("cpree", &p, 3, nullptr, &m.m) == SPE_VALIDATION_FAILED);
  CHECK(std::string(spe_last_error()).find("c1(a1b) <= c0(a1b)") != std::string::npos);

  p = defaults();
  CHECK(spe_model_from_preset("nope", &p, 3, nullptr, &m.m) == SPE_USAGE);
  CHECK(spe_model_from_preset("cpree", &p, 3, "open", &m.m) == SPE_USAGE);

  std::string bad = kConfig;
  bad.replace(bad.find("011 = 2"), 7, "011 = x");
  CHECK(spe_model_from_config(bad.c_str(), &m.m) == SPE_PARSE);
  CHECK(spe_last_error_line() == 5);

  // Non-attractive tables: validation fails and lists the violation.
  std::string na = kConfig;
  na.replace(na.find("001 = 1"), 7, "001 = 0");
  na.replace(na.find("000 = 0"), 7, "000 = 1");
  REQUIRE(spe_model_from_config(na.c_str(), &m.m) == SPE_OK);
  Str report;
  CHECK(spe_model_validate(m.m, &report.p) == SPE_VALIDATION_FAILED);
  CHECK(report.s().find("\"ok\": false") != std::string::npos);
  spe_model_free(m.m);
  m.m = nullptr;

  Model big;
  REQUIRE(spe_model_from_preset("cpree", &p, 9, nullptr, &big.m) == SPE_OK);
  Str out;
  CHECK(spe_oracle_generator(big.m, SPE_FORMAT_CSV, &out.p) == SPE_CAPACITY);
  CHECK(std::string(spe_last_error()).find("cap") != std::string::npos);

  CHECK(spe_simulate(nullptr, nullptr, nullptr, 1.0, 1, SPE_FORMAT_CSV, &out.p) == SPE_USAGE);
  CHECK(spe_simulate(big.m, "0101", nullptr, 1.0, 1, SPE_FORMAT_CSV, &out.p) == SPE_USAGE);
  CHECK(spe_simulate(big.m, nullptr, nullptr, 1.0, 1, SPE_FORMAT_CSV, nullptr) == SPE_USAGE);

  // A successful call clears the error.
  CHECK(spe_model_constants(big.m, nullptr) == SPE_USAGE);
  spe_constants k;
  CHECK(spe_model_constants(big.m, &k) == SPE_OK);
  CHECK(std::string(spe_last_error()).empty());
}

TEST_CASE("simulate and couple are deterministic") {
  Model m;
  const auto p = defaults();
  REQUIRE(spe_model_from_preset("cpree", &p, 8, nullptr, &m.m) == SPE_OK);
  Str a, b, j;
  REQUIRE(spe_simulate(m.m, nullptr, nullptr, 2.0, 5, SPE_FORMAT_CSV, &a.p) == SPE_OK);
  REQUIRE(spe_simulate(m.m, nullptr, nullptr, 2.0, 5, SPE_FORMAT_CSV, &b.p) == SPE_OK);
  CHECK(a.s() == b.s());
  CHECK(a.s().find("t,site,layer,from,to") != std::string::npos);
  REQUIRE(spe_simulate(m.m, "01010101", "11110000", 2.0, 5, SPE_FORMAT_JSON, &j.p) == SPE_OK);
  CHECK(j.s().find("\"events\"") != std::string::npos);

  Str c1, c2;
  size_t violations = 99;
  REQUIRE(spe_couple(m.m, 3, nullptr, 2.0, 5, 0, SPE_FORMAT_CSV, &c1.p, &violations) == SPE_OK);
  CHECK(violations == 0);
  REQUIRE(spe_couple(m.m, 3, nullptr, 2.0, 5, 0, SPE_FORMAT_CSV, &c2.p, nullptr) == SPE_OK);
  CHECK(c1.s() == c2.s());
  CHECK(c1.s().find("gamma1") != std::string::npos);

  Str c3;
  CHECK(spe_couple(m.m, 2, "00000000;00000000;11111111", 1.0, 5, 0, SPE_FORMAT_JSON, &c3.p, nullptr) ==
        SPE_OK);
  CHECK(spe_couple(m.m, 2, "00000000;11111111;00000000", 1.0, 5, 0, SPE_FORMAT_JSON, &c3.p, nullptr) ==
        SPE_USAGE);
  CHECK(spe_couple(m.m, 5, nullptr, 1.0, 5, 0, SPE_FORMAT_JSON, &c3.p, nullptr) == SPE_USAGE);
}

TEST_CASE("oracle calls") {
  Model m;
  const auto p = defaults();
  REQUIRE(spe_model_from_preset("cpree", &p, 2, nullptr, &m.m) == SPE_OK);
  Str st;
  size_t dim = 0;
  REQUIRE(spe_oracle_stationary(m.m, SPE_FORMAT_CSV, &st.p, &dim) == SPE_OK);
  CHECK(dim == 1);
  CHECK(st.s().rfind("point,state_index,probability\n", 0) == 0);

  Str dist;
  REQUIRE(spe_oracle_distribution(m.m, 15, 0.0, SPE_FORMAT_CSV, &dist.p) == SPE_OK);
  CHECK(dist.s().find("\n15,1\n") != std::string::npos);
  CHECK(spe_oracle_distribution(m.m, 16, 0.0, SPE_FORMAT_CSV, &dist.p) == SPE_USAGE);

  Str vi;
  auto q = defaults();
  REQUIRE(spe_scenario_remark("vi", &q, 4, nullptr, 0.1, SPE_FORMAT_CSV, &vi.p) == SPE_OK);
  CHECK(vi.s().rfind("n,state_index,outflow,perturbed_outflow\n", 0) == 0);
}

TEST_CASE("estimators") {
  Model m;
  const auto p = defaults();
  REQUIRE(spe_model_from_preset("cpree", &p, 3, nullptr, &m.m) == SPE_OK);
  Str a, b;
  REQUIRE(spe_estimate_coalescence(m.m, "010", 1, 1.0, 200, 4, SPE_FORMAT_JSON, &a.p) == SPE_OK);
  CHECK(a.s().find("\"scenario\": \"coalescence\"") != std::string::npos);
  REQUIRE(spe_estimate_coalescence(m.m, "010", 1, 1.0, 200, 4, SPE_FORMAT_CSV, &b.p) == SPE_OK);
  CHECK(b.s().rfind("scenario,estimate,stderr,replicas,seed,window,horizon\n", 0) == 0);
  CHECK(spe_estimate_coalescence(m.m, "010", 2, 1.0, 200, 4, SPE_FORMAT_CSV, &b.p) == SPE_USAGE);

  const double grid[] = {0.0, 1.0};
  Str d;
  REQUIRE(spe_density_curves(m.m, grid, 2, 50, 1, SPE_FORMAT_CSV, &d.p) == SPE_OK);
  CHECK(d.s().rfind("t,from_zero,from_zero_se,from_one,from_one_se,gap\n", 0) == 0);

  Model w;
  REQUIRE(spe_model_from_preset("cpree", &p, 16, nullptr, &w.m) == SPE_OK);
  const int lengths[] = {4, 8};
  Str f;
  REQUIRE(spe_f_decay(w.m, lengths, 2, 1.0, 20, 1, SPE_FORMAT_CSV, &f.p) == SPE_OK);
  CHECK(f.s().rfind("length,m,n,normalized_f,stderr\n", 0) == 0);
  Str l;
  REQUIRE(spe_lemma_check(w.m, 1.0, 20, 1, 4, 11, 1, SPE_FORMAT_CSV, &l.p) == SPE_OK);
  CHECK(l.s().rfind("inequality,lhs,rhs,slack,stderr,holds\n", 0) == 0);
}
