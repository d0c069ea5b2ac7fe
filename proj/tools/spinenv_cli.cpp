// Command-line front end. Talks to the library only through spinenv.h.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinenv/spinenv.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code(spe_status s) {
  switch (s) {
    case SPE_OK:
      return kExitOk;
    case SPE_VALIDATION_FAILED:
    case SPE_INTERNAL:
      return kExitValidation;
    case SPE_NUMERICAL:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

void report_error(spe_status) { std::cerr << "error: " << spe_last_error() << '\n'; }

struct ModelDeleter {
  void operator()(spe_model* m) const { spe_model_free(m); }
};
using ModelPtr = std::unique_ptr<spe_model, ModelDeleter>;

/// Owns a string handed out by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { spe_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SPINENV_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError("SPINENV_SEED is not an unsigned integer");
    }
  }
  return 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << data;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

struct ModelOptions {
  std::string config;
  std::string preset;
  spe_preset_params params{};
  std::optional<int> sites;
  std::string boundary;

  void add_to(CLI::App* cmd) {
    auto* cfg = cmd->add_option("--config", config, "model config file");
    auto* pre = cmd->add_option("--preset", preset, "cpree | contact | remark_iv | remark_vi");
    cfg->excludes(pre);
    add_params(cmd);
    cmd->add_option("--sites", sites, "lattice size");
    cmd->add_option("--boundary", boundary, "periodic | frozen:L|R | frozen:L|R/EL|ER");
  }

  void add_params(CLI::App* cmd) {
    spe_preset_defaults(&params);
    cmd->add_option("--gamma", params.gamma, "background rate scale")->capture_default_str();
    cmd->add_option("--delta0", params.delta0, "death rate when beta = 0")->capture_default_str();
    cmd->add_option("--delta1", params.delta1, "death rate when beta = 1")->capture_default_str();
    cmd->add_option("--p", params.p, "background up fraction")->capture_default_str();
    cmd->add_option("--lambda", params.lambda, "birth rate per neighbour")->capture_default_str();
  }
};

struct Invocation {
  std::vector<std::string> args;  // without the program name
  std::optional<std::string> config_override;
  std::optional<std::string> out_override;
};

class Runner {
public:
  explicit Runner(Invocation inv) : inv_(std::move(inv)) {}
  int run();

private:
  ModelPtr load_model(const ModelOptions& o, int default_sites);
  std::string output_path(const std::string& command, const std::string& ext) const;
  void finish(const std::string& command, const std::string& data, const ModelPtr& model);
  std::string format_ext() const { return format_ == "json" ? "json" : "csv"; }
  spe_format format() const { return format_ == "json" ? SPE_FORMAT_JSON : SPE_FORMAT_CSV; }

  Invocation inv_;
  std::string out_;
  std::string format_ = "csv";
  std::optional<std::uint64_t> seed_opt_;
  std::uint64_t seed_ = 0;
  std::optional<double> runtime_ms_;
};

ModelPtr Runner::load_model(const ModelOptions& o, int default_sites) {
  spe_model* raw = nullptr;
  spe_status s;
  if (inv_.config_override) {
    s = spe_model_from_config(inv_.config_override->c_str(), &raw);
  } else if (!o.config.empty()) {
    if (o.sites || !o.boundary.empty()) {
      throw UsageError("--sites and --boundary come from the config file when --config is given");
    }
    s = spe_model_from_config(read_file(o.config).c_str(), &raw);
  } else {
    const std::string name = o.preset.empty() ? "cpree" : o.preset;
    s = spe_model_from_preset(name.c_str(), &o.params, o.sites.value_or(default_sites),
                              o.boundary.empty() ? nullptr : o.boundary.c_str(), &raw);
  }
  if (s != SPE_OK) {
    report_error(s);
    throw s;
  }
  return ModelPtr(raw);
}

std::string Runner::output_path(const std::string& command, const std::string& ext) const {
  if (inv_.out_override) return *inv_.out_override;
  if (!out_.empty()) return out_;
  return "spinenv-" + command + "." + ext;
}

void Runner::finish(const std::string& command, const std::string& data, const ModelPtr& model) {
  std::string payload = data;
  if (format_ == "json") {
    // Wall-clock timing goes to the manifest so data files stay reproducible.
    json j = json::parse(data);
    if (j.is_object() && j.contains("runtime_ms")) {
      runtime_ms_ = j["runtime_ms"].get<double>();
      j.erase("runtime_ms");
      payload = j.dump(1) + "\n";
    }
  }
  const std::string path = output_path(command, format_ext());
  write_file(path, payload);

  std::vector<std::string> resolved = inv_.args;
  if (!seed_opt_) {
    resolved.push_back("--seed");
    resolved.push_back(std::to_string(seed_));
  }
  json manifest{{"manifest_version", 1},
                {"command", command},
                {"argv", resolved},
                {"seed", seed_},
                {"versions", {{"spinenv", spe_version()}}},
                {"timestamp", utc_timestamp()},
                {"outputs", {path}}};
  if (model) {
    LibString cfg;
    if (spe_model_to_config(model.get(), &cfg.p) == SPE_OK) manifest["config"] = cfg.str();
  }
  if (runtime_ms_) manifest["runtime_ms"] = *runtime_ms_;
  write_file(path + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << path << '\n';
}

int Runner::run() {
  CLI::App app{"Attractive spin systems in a dynamic background"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_opt_, "random seed (default: SPINENV_SEED or 1)");
    cmd->add_option("--out", out_, "output data file");
    cmd->add_option("--format", format_, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  };

  ModelOptions model_opts;

  auto* validate = app.add_subcommand("validate", "check attractivity and compatibility");
  model_opts.add_to(validate);
  validate->add_option("--out", out_, "write the JSON report here");

  double tmax = 10.0;
  std::string beta0, eta0, initial;
  auto* simulate = app.add_subcommand("simulate", "graphical simulation of (beta, eta)");
  model_opts.add_to(simulate);
  add_common(simulate);
  simulate->add_option("--tmax", tmax, "time horizon")->capture_default_str();
  simulate->add_option("--beta0", beta0, "initial background literal");
  simulate->add_option("--eta0", eta0, "initial spin literal");

  int layers = 4;
  bool check_classes = false;
  auto* couple = app.add_subcommand("couple", "coupled process with shared jumps");
  model_opts.add_to(couple);
  add_common(couple);
  couple->add_option("--tmax", tmax, "time horizon")->capture_default_str();
  couple->add_option("--layers", layers, "1 | 3 | 4 | 5 coordinates")
      ->check(CLI::IsMember({1, 3, 4, 5}))
      ->capture_default_str();
  couple->add_option("--initial", initial, "layer literals separated by ';', beta first");
  couple->add_flag("--check-classes", check_classes, "count exits from the agreement classes");

  std::string what = "stationary";
  std::uint64_t start_state = 0;
  auto* oracle = app.add_subcommand("oracle", "exact analysis of a small chain");
  model_opts.add_to(oracle);
  add_common(oracle);
  oracle->add_option("--what", what, "stationary | generator | distribution")
      ->check(CLI::IsMember({"stationary", "generator", "distribution"}))
      ->capture_default_str();
  oracle->add_option("--tmax", tmax, "time for --what distribution")->capture_default_str();
  oracle->add_option("--start", start_state, "start state index for --what distribution");

  std::string scenario_name;
  std::size_t replicas = 1000;
  int window = 1;
  std::vector<double> tgrid;
  std::vector<int> lengths;
  double epsilon = 0.1;
  int m_left = -1, n_right = -1, l_index = 1;
  std::optional<double> scenario_t;
  auto* scenario = app.add_subcommand("scenario", "remarks iv/vi and the estimators");
  scenario->add_option("name", scenario_name, "iv | vi | coalescence | density | fdecay | lemma")
      ->required();
  model_opts.add_to(scenario);
  add_common(scenario);
  scenario->add_option("--tmax", scenario_t, "time horizon (lemma: default is the oracle burn-in)");
  scenario->add_option("--replicas", replicas, "Monte Carlo replicas")->capture_default_str();
  scenario->add_option("--window", window, "coalescence half-width k")->capture_default_str();
  scenario->add_option("--tgrid", tgrid, "density time grid")->delimiter(',');
  scenario->add_option("--lengths", lengths, "f decay window lengths")->delimiter(',');
  scenario->add_option("--beta0", beta0, "coalescence background start");
  scenario->add_option("--epsilon", epsilon, "remark vi perturbation of c1(001)")->capture_default_str();
  scenario->add_option("--m", m_left, "lemma window left end");
  scenario->add_option("--n", n_right, "lemma window right end");
  scenario->add_option("--l", l_index, "lemma run length l")->capture_default_str();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
  replay->add_option("--manifest", manifest_path, "manifest file")->required();
  replay->add_option("--out", out_, "write the data file here instead");

  std::vector<const char*> argv{"spinenv-cli"};
  for (const auto& a : inv_.args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  seed_ = seed_opt_ ? *seed_opt_ : default_seed();

  try {
    if (*replay) {
      const json m = json::parse(read_file(manifest_path));
      if (m.value("manifest_version", 0) != 1) throw UsageError("unsupported manifest version");
      Invocation inv;
      inv.args = m.at("argv").get<std::vector<std::string>>();
      if (m.contains("config")) inv.config_override = m["config"].get<std::string>();
      if (!out_.empty()) inv.out_override = out_;
      return Runner(std::move(inv)).run();
    }

    if (*validate) {
      ModelPtr model = load_model(model_opts, 16);
      LibString report;
      const spe_status s = spe_model_validate(model.get(), &report.p);
      if (s != SPE_OK && s != SPE_VALIDATION_FAILED) {
        report_error(s);
        return exit_code(s);
      }
      const json j = json::parse(report.str());
      const auto& k = j["constants"];
      std::cout << (s == SPE_OK ? "ok" : "invalid") << '\n'
                << "C = " << k["C"].get<double>() << '\n'
                << "K = " << k["K"].get<double>() << '\n'
                << "b_bar = " << k["b_bar"].get<double>() << '\n'
                << "c_bar0 = " << k["c_bar0"].get<double>() << '\n'
                << "c_bar1 = " << k["c_bar1"].get<double>() << '\n'
                << "c_bar = " << k["c_bar"].get<double>() << '\n';
      for (const auto& v : j["violations"]) std::cout << "violation: " << v.get<std::string>() << '\n';
      for (const auto& v : j["env_violations"]) std::cout << "background: " << v.get<std::string>() << '\n';
      for (const auto& w : j["warnings"]) std::cout << "warning: " << w.get<std::string>() << '\n';
      if (!out_.empty()) write_file(out_, report.str());
      return exit_code(s);
    }

    if (*simulate) {
      ModelPtr model = load_model(model_opts, 16);
      LibString out;
      const spe_status s = spe_simulate(model.get(), beta0.empty() ? nullptr : beta0.c_str(),
                                        eta0.empty() ? nullptr : eta0.c_str(), tmax, seed_, format(), &out.p);
      if (s != SPE_OK) {
        report_error(s);
        return exit_code(s);
      }
      finish("simulate", out.str(), model);
      return kExitOk;
    }

    if (*couple) {
      ModelPtr model = load_model(model_opts, 16);
      // Coordinates include the background; one coordinate means the plain (beta, eta) chain.
      const int spin_layers = layers == 1 ? 1 : layers - 1;
      LibString out;
      std::size_t violations = 0;
      const spe_status s = spe_couple(model.get(), spin_layers, initial.empty() ? nullptr : initial.c_str(),
                                      tmax, seed_, check_classes ? 1 : 0, format(), &out.p, &violations);
      if (s != SPE_OK && s != SPE_VALIDATION_FAILED) {
        report_error(s);
        return exit_code(s);
      }
      finish("couple", out.str(), model);
      std::cout << "order violations: " << violations << '\n';
      return exit_code(s);
    }

    if (*oracle) {
      ModelPtr model = load_model(model_opts, 3);
      LibString out;
      spe_status s;
      std::size_t dimension = 0;
      if (what == "stationary") {
        s = spe_oracle_stationary(model.get(), format(), &out.p, &dimension);
      } else if (what == "generator") {
        s = spe_oracle_generator(model.get(), format(), &out.p);
      } else {
        s = spe_oracle_distribution(model.get(), start_state, tmax, format(), &out.p);
      }
      if (!out.p) {
        report_error(s);
        return exit_code(s);
      }
      finish("oracle", out.str(), model);
      if (what == "stationary") std::cout << "stationary set dimension: " << dimension << '\n';
      if (s != SPE_OK) report_error(s);
      return exit_code(s);
    }

    if (*scenario) {
      LibString out;
      spe_status s;
      ModelPtr model;
      if (scenario_name == "iv" || scenario_name == "vi") {
        if (!model_opts.config.empty() || !model_opts.preset.empty()) {
          throw UsageError("scenario " + scenario_name + " builds its own model; drop --config/--preset");
        }
        const int sites = model_opts.sites.value_or(scenario_name == "iv" ? 3 : 5);
        s = spe_scenario_remark(scenario_name.c_str(), &model_opts.params, sites,
                                model_opts.boundary.empty() ? nullptr : model_opts.boundary.c_str(),
                                epsilon, format(), &out.p);
      } else if (scenario_name == "coalescence") {
        model = load_model(model_opts, 3);
        s = spe_estimate_coalescence(model.get(), beta0.empty() ? nullptr : beta0.c_str(), window,
                                     scenario_t.value_or(1.0), replicas, seed_, format(), &out.p);
      } else if (scenario_name == "density") {
        model = load_model(model_opts, 16);
        if (tgrid.empty()) tgrid = {0, 1, 2, 4, 8};
        s = spe_density_curves(model.get(), tgrid.data(), tgrid.size(), replicas, seed_, format(), &out.p);
      } else if (scenario_name == "fdecay") {
        model = load_model(model_opts, 64);
        if (lengths.empty()) {
          // Doubling lengths up to half the ring.
          const int sites = spe_model_sites(model.get());
          for (int len = 2; len <= std::max(2, sites / 2); len *= 2) lengths.push_back(len);
        }
        s = spe_f_decay(model.get(), lengths.data(), lengths.size(), scenario_t.value_or(10.0), replicas,
                        seed_, format(), &out.p);
      } else if (scenario_name == "lemma") {
        model = load_model(model_opts, 64);
        const int sites = spe_model_sites(model.get());
        const int m = m_left >= 0 ? m_left : sites / 4;
        const int n = n_right >= 0 ? n_right : sites - sites / 4 - 1;
        s = spe_lemma_check(model.get(), scenario_t.value_or(-1.0), replicas, seed_, m, n, l_index,
                            format(), &out.p);
      } else {
        throw UsageError("unknown scenario '" + scenario_name +
                         "' (expected iv, vi, coalescence, density, fdecay or lemma)");
      }
      if (!out.p) {
        report_error(s);
        return exit_code(s);
      }
      finish("scenario-" + scenario_name, out.str(), model);
      if (s != SPE_OK) report_error(s);
      return exit_code(s);
    }
  } catch (spe_status s) {
    return exit_code(s);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  Invocation inv;
  for (int i = 1; i < argc; ++i) inv.args.emplace_back(argv[i]);
  try {
    return Runner(std::move(inv)).run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
