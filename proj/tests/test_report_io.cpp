#include "doctest.h"

#include <sstream>

#include "spinenv/coupling.hpp"
#include "spinenv/report_io.hpp"

using namespace spinenv;

namespace {

Trajectory sample_trajectory(const Boundary& b) {
  const ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.5, 1.5}, 6, b);
  const auto [lo, hi] = point_mass_states(spec);
  JointState init{lo.beta, {lo.eta(), hi.eta()}};
  init.beta.set(2, 1);
  const auto es = generate_streams(spec, 17, 3.0);
  return simulate_graphical(spec, init, es);
}

}  // namespace

TEST_CASE("trajectory CSV round trip") {
  for (const auto& b : {Boundary::periodic(), Boundary::frozen("0", "1", "1", "0")}) {
    const auto tr = sample_trajectory(b);
    REQUIRE_FALSE(tr.events.empty());
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    const auto text = os.str();
    CHECK(text.find("t,site,layer,from,to\n") != std::string::npos);
    const auto back = read_trajectory_csv(text);
    CHECK(back.initial == tr.initial);
    CHECK(back.final_state == tr.final_state);
    CHECK(back.events == tr.events);
    CHECK(back.t_max == tr.t_max);

    std::ostringstream again;
    write_trajectory_csv(again, back);
    CHECK(again.str() == text);
  }
}

TEST_CASE("trajectory JSON round trip and CSV agreement") {
  const auto tr = sample_trajectory(Boundary::frozen("0", "1", "0", "1"));
  const auto j = trajectory_json(tr);
  CHECK(j["layers"] == nlohmann::json({"beta", "eta", "xi"}));
  CHECK(j["events"].size() == tr.events.size());
  const auto back = trajectory_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.events == tr.events);
  CHECK(back.initial == tr.initial);
  CHECK(back.final_state == tr.final_state);

  std::ostringstream os;
  write_trajectory_csv(os, tr);
  CHECK(read_trajectory_csv(os.str()).events == back.events);
}

TEST_CASE("malformed trajectory CSV") {
  CHECK_THROWS(read_trajectory_csv("t,site,layer,from,to\n0.5,0,beta\n"));
  CHECK_THROWS(read_trajectory_csv("nonsense"));
}

TEST_CASE("distribution and generator exports") {
  const ModelSpec spec = preset("cpree", {1.0, 2.0, 1.0, 0.3, 1.0}, 1);
  const auto g = build_generator(spec);
  const auto p = point_mass(g, 2);
  std::ostringstream os;
  write_distribution_csv(os, g, p);
  CHECK(os.str().rfind("state_index,probability\n", 0) == 0);
  CHECK(os.str().find("\n2,1\n") != std::string::npos);

  const auto dj = distribution_json(g, p);
  double total = 0;
  for (const auto& row : dj["rows"]) total += row[1].get<double>();
  CHECK(total == 1.0);

  std::ostringstream gs;
  write_generator_csv(gs, g);
  const auto text = gs.str();
  CHECK(text.rfind("from,to,rate\n", 0) == 0);
  CHECK(text.find("1,0,2\n") != std::string::npos);
  const auto gj = generator_json(g);
  CHECK(gj["rows"].size() == g.transitions.size());
  CHECK(gj["columns"] == nlohmann::json({"from", "to", "rate"}));
}

TEST_CASE("report schema") {
  EstimateReport r;
  r.scenario = "coalescence";
  r.params = {{"k", 1}, {"t", 0.5}};
  r.estimate = 0.25;
  r.standard_error = 0.01;
  r.replicas = 100;
  r.seed = 9;
  r.window = 3;
  r.horizon = 0.5;
  const auto j = report_json(r);
  for (const char* key : {"scenario", "params", "estimate", "stderr", "replicas", "seed", "window",
                          "horizon", "runtime_ms"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["params"]["t"] == 0.5);
  CHECK(j["stderr"] == 0.01);
}
