#include "spinenv/report_io.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

#include "spinenv/config_io.hpp"

namespace spinenv {

using nlohmann::json;

namespace {

const Configuration& layer_of(const JointState& s, std::size_t layer) {
  return layer == 0 ? s.beta : s.spins[layer - 1];
}

json state_json(const Trajectory& traj, const JointState& s) {
  json out = json::object();
  const auto names = traj.layer_names();
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = layer_of(s, i).str();
  return out;
}

void write_snapshot(std::ostream& out, const char* tag, const Trajectory& traj, const JointState& s) {
  const auto names = traj.layer_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << "# " << tag << ' ' << names[i] << '=' << layer_of(s, i).str() << '\n';
  }
}

int layer_index(const std::vector<std::string>& names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  throw ModelError("unknown layer '" + std::string(name) + "' in trajectory");
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ModelError("bad number '" + s + "' in trajectory");
  }
  return v;
}

/// Assembles a JointState from (layer name, literal) pairs in layer order.
JointState build_state(const std::vector<std::pair<std::string, std::string>>& layers) {
  if (layers.empty() || layers.front().first != "beta") {
    throw ModelError("trajectory snapshot must start with the beta layer");
  }
  JointState s;
  s.beta = Configuration::parse(layers.front().second);
  for (std::size_t i = 1; i < layers.size(); ++i) s.spins.push_back(Configuration::parse(layers[i].second));
  return s;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto names = traj.layer_names();
  out << "# t_max " << format_double(traj.t_max) << '\n';
  write_snapshot(out, "initial", traj, traj.initial);
  out << "t,site,layer,from,to\n";
  for (const auto& e : traj.events) {
    out << format_double(e.time) << ',' << e.site << ',' << names[static_cast<std::size_t>(e.layer)]
        << ',' << int{e.from} << ',' << int{e.to} << '\n';
  }
  write_snapshot(out, "final", traj, traj.final_state);
}

json trajectory_json(const Trajectory& traj) {
  const auto names = traj.layer_names();
  json events = json::array();
  for (const auto& e : traj.events) {
    events.push_back({e.time, e.site, names[static_cast<std::size_t>(e.layer)], e.from, e.to});
  }
  return json{{"t_max", traj.t_max},
              {"layers", names},
              {"columns", {"t", "site", "layer", "from", "to"}},
              {"initial", state_json(traj, traj.initial)},
              {"events", std::move(events)},
              {"final", state_json(traj, traj.final_state)}};
}

Trajectory read_trajectory_csv(std::string_view text) {
  Trajectory traj;
  std::vector<std::pair<std::string, std::string>> initial, final_layers;
  std::vector<std::string> names;
  bool header = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# t_max ", 0) == 0) {
      traj.t_max = parse_number<double>(line.substr(8));
    } else if (line.rfind("# initial ", 0) == 0 || line.rfind("# final ", 0) == 0) {
      const bool is_initial = line[2] == 'i';
      const auto body = line.substr(is_initial ? 10 : 8);
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ModelError("bad snapshot line: " + line);
      (is_initial ? initial : final_layers).emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (line == "t,site,layer,from,to") {
      header = true;
      traj.initial = build_state(initial);
      names = traj.layer_names();
    } else {
      if (!header) throw ModelError("event row before the header");
      const auto f = split(line, ',');
      if (f.size() != 5) throw ModelError("trajectory rows need 5 fields: " + line);
      FlipRecord r;
      r.time = parse_number<double>(f[0]);
      r.site = parse_number<int>(f[1]);
      r.layer = layer_index(names, f[2]);
      r.from = static_cast<std::uint8_t>(parse_number<int>(f[3]));
      r.to = static_cast<std::uint8_t>(parse_number<int>(f[4]));
      traj.events.push_back(r);
    }
  }
  if (!header) throw ModelError("trajectory has no header row");
  traj.final_state = build_state(final_layers);
  return traj;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory traj;
  traj.t_max = j.at("t_max").get<double>();
  const auto names = j.at("layers").get<std::vector<std::string>>();
  auto state = [&](const json& s) {
    std::vector<std::pair<std::string, std::string>> layers;
    for (const auto& n : names) layers.emplace_back(n, s.at(n).get<std::string>());
    return build_state(layers);
  };
  traj.initial = state(j.at("initial"));
  traj.final_state = state(j.at("final"));
  for (const auto& e : j.at("events")) {
    FlipRecord r;
    r.time = e.at(0).get<double>();
    r.site = e.at(1).get<int>();
    r.layer = layer_index(names, e.at(2).get<std::string>());
    r.from = e.at(3).get<std::uint8_t>();
    r.to = e.at(4).get<std::uint8_t>();
    traj.events.push_back(r);
  }
  return traj;
}

void write_distribution_csv(std::ostream& out, const GeneratorMatrix& g, const Eigen::VectorXd& p) {
  out << "state_index,probability\n";
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    out << g.codes[i] << ',' << format_double(p(static_cast<Eigen::Index>(i))) << '\n';
  }
}

void write_generator_csv(std::ostream& out, const GeneratorMatrix& g) {
  out << "from,to,rate\n";
  for (const auto& t : g.transitions) {
    out << g.codes[t.from] << ',' << g.codes[t.to] << ',' << format_double(t.rate) << '\n';
  }
}

json distribution_json(const GeneratorMatrix& g, const Eigen::VectorXd& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < g.dimension(); ++i) {
    rows.push_back({g.codes[i], p(static_cast<Eigen::Index>(i))});
  }
  return json{{"columns", {"state_index", "probability"}}, {"rows", std::move(rows)}};
}

json generator_json(const GeneratorMatrix& g) {
  json rows = json::array();
  for (const auto& t : g.transitions) rows.push_back({g.codes[t.from], g.codes[t.to], t.rate});
  return json{{"columns", {"from", "to", "rate"}}, {"rows", std::move(rows)}};
}

json report_json(const EstimateReport& r) {
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  return json{{"scenario", r.scenario}, {"params", std::move(params)},
              {"estimate", r.estimate}, {"stderr", r.standard_error},
              {"replicas", r.replicas}, {"seed", r.seed},
              {"window", r.window},     {"horizon", r.horizon},
              {"runtime_ms", r.runtime_ms}};
}

json density_json(const DensityCurves& d) {
  json rows = json::array();
  for (const auto& p : d.points) {
    rows.push_back({p.t, p.from_zero, p.from_zero_se, p.from_one, p.from_one_se, p.gap()});
  }
  return json{{"scenario", "density"},
              {"replicas", d.replicas},
              {"seed", d.seed},
              {"runtime_ms", d.runtime_ms},
              {"columns", {"t", "from_zero", "from_zero_se", "from_one", "from_one_se", "gap"}},
              {"rows", std::move(rows)}};
}

void write_density_csv(std::ostream& out, const DensityCurves& d) {
  out << "t,from_zero,from_zero_se,from_one,from_one_se,gap\n";
  for (const auto& p : d.points) {
    out << format_double(p.t) << ',' << format_double(p.from_zero) << ','
        << format_double(p.from_zero_se) << ',' << format_double(p.from_one) << ','
        << format_double(p.from_one_se) << ',' << format_double(p.gap()) << '\n';
  }
}

json f_decay_json(const FDecayTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back({r.length, r.m, r.n, r.normalized_f, r.standard_error});
  return json{{"scenario", "f_decay"},
              {"t", t.t},
              {"replicas", t.replicas},
              {"seed", t.seed},
              {"runtime_ms", t.runtime_ms},
              {"decreasing", t.decreasing},
              {"columns", {"length", "m", "n", "normalized_f", "stderr"}},
              {"rows", std::move(rows)}};
}

void write_f_decay_csv(std::ostream& out, const FDecayTable& t) {
  out << "length,m,n,normalized_f,stderr\n";
  for (const auto& r : t.rows) {
    out << r.length << ',' << r.m << ',' << r.n << ',' << format_double(r.normalized_f) << ','
        << format_double(r.standard_error) << '\n';
  }
}

json lemma_json(const LemmaCheck& c) {
  auto ineq = [](const InequalityEstimate& e) {
    return json{{"lhs", e.lhs}, {"rhs", e.rhs}, {"slack", e.slack}, {"stderr", e.slack_se},
                {"holds", e.holds}};
  };
  return json{{"scenario", "lemma_de"},
              {"params", {{"m", c.m}, {"n", c.n}, {"l", c.l}, {"t", c.t}, {"C", c.C}, {"K", c.K}}},
              {"replicas", c.replicas},
              {"seed", c.seed},
              {"runtime_ms", c.runtime_ms},
              {"d", ineq(c.d)},
              {"e", ineq(c.e)}};
}

json scenario_json(const ScenarioReport& r) {
  json stairs = json::array();
  for (const auto& s : r.staircases) {
    stairs.push_back({{"n", s.n}, {"state_index", s.code}, {"outflow", s.outflow},
                      {"perturbed_outflow", s.perturbed_outflow}, {"absorbing", s.outflow == 0.0}});
  }
  json out{{"scenario", r.name},
           {"boundary", r.spec.boundary.str()},
           {"sites", r.spec.lattice_size},
           {"states", r.states},
           {"closed_classes", r.closed_classes},
           {"class_sizes", r.class_sizes},
           {"absorbing_states", r.absorbing_codes},
           {"rank_ambiguous", r.rank_ambiguous},
           {"max_residual", r.max_residual},
           {"tv_nu", r.tv_nu},
           {"notes", r.notes}};
  if (r.numerical_nullity) out["numerical_nullity"] = *r.numerical_nullity;
  if (!r.staircases.empty()) {
    out["epsilon"] = r.epsilon;
    out["staircases"] = std::move(stairs);
  }
  return out;
}

json stationary_json(const GeneratorMatrix& g, const StationarySet& set, const NuLimits& limits) {
  json points = json::array();
  for (std::size_t k = 0; k < set.extreme_points.size(); ++k) {
    json support = json::array();
    for (std::size_t i : set.closed_classes[k]) {
      support.push_back({g.codes[i], set.extreme_points[k](static_cast<Eigen::Index>(i))});
    }
    points.push_back({{"class_size", set.closed_classes[k].size()}, {"support", std::move(support)}});
  }
  json out{{"states", g.dimension()},
           {"dimension", set.dimension()},
           {"rank_ambiguous", set.rank_ambiguous},
           {"max_residual", set.max_residual},
           {"tv_nu", limits.tv},
           {"nu_converged", limits.converged},
           {"nu_horizon", limits.horizon},
           {"extreme_points", std::move(points)}};
  if (set.numerical_nullity) out["numerical_nullity"] = *set.numerical_nullity;
  return out;
}

}  // namespace spinenv
