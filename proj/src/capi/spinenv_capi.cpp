#include "spinenv/spinenv.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "json.hpp"
#include "spinenv/config_io.hpp"
#include "spinenv/coupling.hpp"
#include "spinenv/exact_oracle.hpp"
#include "spinenv/experiments.hpp"
#include "spinenv/graphical.hpp"
#include "spinenv/report_io.hpp"

struct spe_model {
  spinenv::ModelSpec spec;
};

namespace {

using nlohmann::json;
using namespace spinenv;

thread_local std::string g_error;
thread_local int g_error_line = 0;

spe_status fail(spe_status status, const std::string& message, int line = 0) {
  g_error = message;
  g_error_line = line;
  return status;
}

template <typename F>
spe_status guarded(F&& body) {
  g_error.clear();
  g_error_line = 0;
  try {
    return body();
  } catch (const ConfigError& e) {
    return fail(SPE_PARSE, e.what(), e.line());
  } catch (const CompatibilityError& e) {
    return fail(SPE_VALIDATION_FAILED, e.what());
  } catch (const ModelViolation& e) {
    return fail(SPE_VALIDATION_FAILED, e.what());
  } catch (const CapacityError& e) {
    return fail(SPE_CAPACITY, e.what());
  } catch (const NumericalFlag& e) {
    return fail(SPE_NUMERICAL, e.what());
  } catch (const ModelError& e) {
    return fail(SPE_USAGE, e.what());
  } catch (const json::exception& e) {
    return fail(SPE_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(SPE_INTERNAL, e.what());
  } catch (...) {
    return fail(SPE_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (!out) throw ModelError("output pointer is null");
  *out = dup_string(s);
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

PresetParams to_params(const spe_preset_params* p) {
  PresetParams q;
  if (p) {
    q.gamma = p->gamma;
    q.delta0 = p->delta0;
    q.delta1 = p->delta1;
    q.p = p->p;
    q.lambda = p->lambda;
  }
  return q;
}

Boundary to_boundary(const char* text) {
  return text && *text ? Boundary::parse(text) : Boundary::periodic();
}

const ModelSpec& spec_of(const spe_model* m) {
  if (!m) throw ModelError("model handle is null");
  return m->spec;
}

/// A literal for one layer: "bits" or "L|bits|R". Bare bits pick up the
/// layer's boundary from the spec.
Configuration layer_literal(const std::string& text, const LayerBoundary& boundary, int sites) {
  Configuration c = Configuration::parse(text);
  if (c.size() != sites) {
    std::ostringstream os;
    os << "configuration '" << text << "' has " << c.size() << " sites, expected " << sites;
    throw ModelError(os.str());
  }
  if (c.boundary().periodic && !boundary.periodic) c = Configuration(c.bits(), boundary);
  if (!(c.boundary() == boundary)) {
    throw ModelError("configuration '" + text + "' does not match the model boundary");
  }
  return c;
}

Configuration coin_layer(RandomStream& rng, int sites, const LayerBoundary& boundary) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(sites));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bits() >> 63);
  return Configuration(std::move(bits), boundary);
}

std::string estimate_csv(const EstimateReport& r) {
  std::ostringstream os;
  os << "scenario,estimate,stderr,replicas,seed,window,horizon\n"
     << r.scenario << ',' << format_double(r.estimate) << ',' << format_double(r.standard_error)
     << ',' << r.replicas << ',' << r.seed << ',' << r.window << ',' << format_double(r.horizon)
     << '\n';
  return os.str();
}

constexpr std::uint64_t kInitTag = 0x696e6974;

}  // namespace

extern "C" {

const char* spe_version(void) { return "0.1.0"; }

const char* spe_last_error(void) { return g_error.c_str(); }

int spe_last_error_line(void) { return g_error_line; }

void spe_string_free(char* s) { std::free(s); }

void spe_preset_defaults(spe_preset_params* out) {
  if (!out) return;
  const PresetParams q;
  *out = {q.gamma, q.delta0, q.delta1, q.p, q.lambda};
}

spe_status spe_model_from_config(const char* text, spe_model** out) {
  return guarded([&] {
    if (!text || !out) throw ModelError("null argument");
    *out = new spe_model{parse_model_config(text)};
    return SPE_OK;
  });
}

spe_status spe_model_from_preset(const char* name, const spe_preset_params* params, int sites,
                                 const char* boundary, spe_model** out) {
  return guarded([&] {
    if (!name || !out) throw ModelError("null argument");
    *out = new spe_model{preset(name, to_params(params), sites, to_boundary(boundary))};
    return SPE_OK;
  });
}

void spe_model_free(spe_model* m) { delete m; }

int spe_model_sites(const spe_model* m) { return m ? m->spec.lattice_size : 0; }

spe_status spe_model_to_config(const spe_model* m, char** out) {
  return guarded([&] {
    emit(out, write_model_config(spec_of(m)));
    return SPE_OK;
  });
}

spe_status spe_model_validate(const spe_model* m, char** report) {
  return guarded([&] {
    const ValidationReport v = validate(spec_of(m));
    if (report) {
      json violations = json::array();
      for (const auto& [name, r] : {std::pair{"c0", &v.c0}, std::pair{"c1", &v.c1}}) {
        for (const auto& x : r->violations) violations.push_back(std::string(name) + ": " + x.describe());
      }
      for (const auto& x : v.compatibility.violations) violations.push_back(x.describe());
      json env_violations = json::array();
      for (const auto& x : v.env.violations) env_violations.push_back(x.describe());
      const auto& k = v.constants;
      json warnings = json::array();
      if (v.env_warning()) warnings.push_back("background rates are not attractive");
      if (k.C == 0) warnings.push_back("C=0");
      emit(report, dump(json{{"ok", v.ok()},
                             {"attractive_c0", v.c0.attractive},
                             {"attractive_c1", v.c1.attractive},
                             {"compatible", v.compatibility.compatible},
                             {"attractive_env", v.env.attractive},
                             {"violations", violations},
                             {"env_violations", env_violations},
                             {"warnings", warnings},
                             {"constants",
                              {{"C", k.C}, {"K", k.K}, {"b_bar", k.b_bar}, {"c_bar0", k.c_bar0},
                               {"c_bar1", k.c_bar1}, {"c_bar", k.c_bar}}}}));
    }
    return v.ok() ? SPE_OK : SPE_VALIDATION_FAILED;
  });
}

spe_status spe_model_constants(const spe_model* m, spe_constants* out) {
  return guarded([&] {
    if (!out) throw ModelError("null argument");
    const DerivedConstants k = dominating_rates(spec_of(m));
    *out = {k.C, k.K, k.b_bar, k.c_bar0, k.c_bar1, k.c_bar};
    return SPE_OK;
  });
}

spe_status spe_simulate(const spe_model* m, const char* beta0, const char* eta0, double t_max,
                        uint64_t seed, spe_format format, char** out) {
  return guarded([&] {
    const ModelSpec& spec = spec_of(m);
    if (!(t_max >= 0)) throw ModelError("t_max must be nonnegative");
    RandomStream rng(derive_seed(seed, kInitTag));
    const auto eb = env_boundary(spec.boundary);
    const auto sb = spin_boundary(spec.boundary);
    JointState initial;
    initial.beta = beta0 ? layer_literal(beta0, eb, spec.lattice_size)
                         : coin_layer(rng, spec.lattice_size, eb);
    initial.spins.push_back(eta0 ? layer_literal(eta0, sb, spec.lattice_size)
                                 : coin_layer(rng, spec.lattice_size, sb));
    const EventStream es = generate_streams(spec, seed, t_max);
    const Trajectory traj = simulate_graphical(spec, initial, es);
    if (format == SPE_FORMAT_JSON) {
      emit(out, trajectory_json(traj).dump() + "\n");
    } else {
      std::ostringstream os;
      write_trajectory_csv(os, traj);
      emit(out, os.str());
    }
    return SPE_OK;
  });
}

spe_status spe_couple(const spe_model* m, int spin_layers, const char* initial, double t_max,
                      uint64_t seed, int check_classes, spe_format format, char** out,
                      size_t* order_violations) {
  return guarded([&] {
    const ModelSpec& spec = spec_of(m);
    if (spin_layers < 1 || spin_layers > 4) throw ModelError("spin layers must be 1 to 4");
    if (!(t_max >= 0)) throw ModelError("t_max must be nonnegative");
    const auto eb = env_boundary(spec.boundary);
    const auto sb = spin_boundary(spec.boundary);
    JointState start;
    if (initial) {
      std::vector<std::string> parts;
      std::stringstream ss(initial);
      for (std::string part; std::getline(ss, part, ';');) parts.push_back(part);
      if (static_cast<int>(parts.size()) != spin_layers + 1) {
        throw ModelError("initial state needs one literal per layer, beta first");
      }
      start.beta = layer_literal(parts[0], eb, spec.lattice_size);
      for (int j = 1; j <= spin_layers; ++j) {
        start.spins.push_back(layer_literal(parts[static_cast<std::size_t>(j)], sb, spec.lattice_size));
      }
    } else {
      RandomStream rng(derive_seed(seed, kInitTag));
      start = random_ordered_state(spec, spin_layers, rng);
      if (spin_layers > 1) {
        start.spins.front() = Configuration::filled(spec.lattice_size, 0, sb);
        start.spins.back() = Configuration::filled(spec.lattice_size, 1, sb);
      }
    }
    CoupledOptions options;
    options.check_classes = check_classes != 0;
    const CoupledRun run = simulate_coupled(CoupledSpec{spec, spin_layers}, start, seed, t_max, options);
    if (order_violations) *order_violations = run.trajectory.order_violations;
    if (format == SPE_FORMAT_JSON) {
      json j = trajectory_json(run.trajectory);
      j["order_violations"] = run.trajectory.order_violations;
      if (options.check_classes) j["class_exits"] = run.class_exits;
      emit(out, j.dump() + "\n");
    } else {
      std::ostringstream os;
      write_trajectory_csv(os, run.trajectory);
      emit(out, os.str());
    }
    return run.trajectory.order_violations == 0 && run.class_exits == 0 ? SPE_OK
                                                                        : SPE_VALIDATION_FAILED;
  });
}

spe_status spe_oracle_stationary(const spe_model* m, spe_format format, char** out,
                                 size_t* dimension) {
  return guarded([&] {
    const GeneratorMatrix g = build_generator(spec_of(m));
    const StationarySet set = stationary_set(g);
    const NuLimits limits = nu_limits(g);
    if (dimension) *dimension = set.dimension();
    if (format == SPE_FORMAT_JSON) {
      emit(out, dump(stationary_json(g, set, limits)));
    } else {
      std::ostringstream os;
      os << "point,state_index,probability\n";
      for (std::size_t k = 0; k < set.extreme_points.size(); ++k) {
        for (std::size_t i : set.closed_classes[k]) {
          os << k << ',' << g.codes[i] << ','
             << format_double(set.extreme_points[k](static_cast<Eigen::Index>(i))) << '\n';
        }
      }
      emit(out, os.str());
    }
    if (set.rank_ambiguous) return fail(SPE_NUMERICAL, "numerical rank of the generator is ambiguous");
    if (!limits.converged) return fail(SPE_NUMERICAL, "nu limits did not converge");
    return SPE_OK;
  });
}

spe_status spe_oracle_generator(const spe_model* m, spe_format format, char** out) {
  return guarded([&] {
    const GeneratorMatrix g = build_generator(spec_of(m));
    if (format == SPE_FORMAT_JSON) {
      emit(out, generator_json(g).dump() + "\n");
    } else {
      std::ostringstream os;
      write_generator_csv(os, g);
      emit(out, os.str());
    }
    return SPE_OK;
  });
}

spe_status spe_oracle_distribution(const spe_model* m, uint64_t start_state, double t,
                                   spe_format format, char** out) {
  return guarded([&] {
    const GeneratorMatrix g = build_generator(spec_of(m));
    if (start_state >= g.dimension()) throw ModelError("start state index out of range");
    const SemigroupResult r = semigroup_apply(g, point_mass(g, start_state), t);
    if (format == SPE_FORMAT_JSON) {
      json j = distribution_json(g, r.distribution);
      j["t"] = t;
      j["start_state"] = start_state;
      j["truncation_error"] = r.truncation_error;
      emit(out, j.dump() + "\n");
    } else {
      std::ostringstream os;
      write_distribution_csv(os, g, r.distribution);
      emit(out, os.str());
    }
    return SPE_OK;
  });
}

spe_status spe_scenario_remark(const char* name, const spe_preset_params* params, int sites,
                               const char* boundary, double epsilon, spe_format format,
                               char** out) {
  return guarded([&] {
    if (!name) throw ModelError("null argument");
    const ScenarioReport r = scenario_remarks(name, to_params(params), sites, to_boundary(boundary), epsilon);
    if (format == SPE_FORMAT_JSON) {
      emit(out, dump(scenario_json(r)));
    } else {
      std::ostringstream os;
      if (r.staircases.empty()) {
        os << "class,size\n";
        for (std::size_t k = 0; k < r.class_sizes.size(); ++k) os << k << ',' << r.class_sizes[k] << '\n';
      } else {
        os << "n,state_index,outflow,perturbed_outflow\n";
        for (const auto& s : r.staircases) {
          os << s.n << ',' << s.code << ',' << format_double(s.outflow) << ','
             << format_double(s.perturbed_outflow) << '\n';
        }
      }
      emit(out, os.str());
    }
    return r.rank_ambiguous ? fail(SPE_NUMERICAL, "numerical rank of the generator is ambiguous")
                            : SPE_OK;
  });
}

spe_status spe_estimate_coalescence(const spe_model* m, const char* beta0, int k, double t,
                                    size_t replicas, uint64_t seed, spe_format format, char** out) {
  return guarded([&] {
    const ModelSpec& spec = spec_of(m);
    const auto eb = env_boundary(spec.boundary);
    const Configuration b = beta0 ? layer_literal(beta0, eb, spec.lattice_size)
                                  : Configuration::filled(spec.lattice_size, 0, eb);
    const EstimateReport r = estimate_coalescence(spec, b, k, t, replicas, seed);
    emit(out, format == SPE_FORMAT_JSON ? dump(report_json(r)) : estimate_csv(r));
    return SPE_OK;
  });
}

spe_status spe_density_curves(const spe_model* m, const double* t_grid, size_t count,
                              size_t replicas, uint64_t seed, spe_format format, char** out) {
  return guarded([&] {
    if (!t_grid && count > 0) throw ModelError("null time grid");
    const std::vector<double> grid(t_grid, t_grid + count);
    const DensityCurves d = density_curves(spec_of(m), grid, replicas, seed);
    if (format == SPE_FORMAT_JSON) {
      emit(out, dump(density_json(d)));
    } else {
      std::ostringstream os;
      write_density_csv(os, d);
      emit(out, os.str());
    }
    return SPE_OK;
  });
}

spe_status spe_f_decay(const spe_model* m, const int* lengths, size_t count, double t,
                       size_t replicas, uint64_t seed, spe_format format, char** out) {
  return guarded([&] {
    const ModelSpec& spec = spec_of(m);
    if (!lengths && count > 0) throw ModelError("null window list");
    const std::vector<int> lens(lengths, lengths + count);
    RandomStream rng(derive_seed(seed, kInitTag));
    JointState start = random_ordered_state(spec, 3, rng);
    const auto sb = spin_boundary(spec.boundary);
    start.spins.front() = Configuration::filled(spec.lattice_size, 0, sb);
    start.spins.back() = Configuration::filled(spec.lattice_size, 1, sb);
    const FDecayTable table = f_decay(spec, start, lens, t, replicas, seed);
    if (format == SPE_FORMAT_JSON) {
      emit(out, dump(f_decay_json(table)));
    } else {
      std::ostringstream os;
      write_f_decay_csv(os, table);
      emit(out, os.str());
    }
    return SPE_OK;
  });
}

spe_status spe_lemma_check(const spe_model* m, double t, size_t replicas, uint64_t seed,
                           int m_left, int n_right, int l, spe_format format, char** out) {
  return guarded([&] {
    const ModelSpec& spec = spec_of(m);
    const double horizon = t < 0 ? oracle_burn_in(spec) : t;
    const LemmaCheck c = lemma31_de_check(spec, horizon, replicas, seed, m_left, n_right, l);
    if (format == SPE_FORMAT_JSON) {
      emit(out, dump(lemma_json(c)));
    } else {
      std::ostringstream os;
      os << "inequality,lhs,rhs,slack,stderr,holds\n";
      for (const auto& [name, e] : {std::pair{"d", &c.d}, std::pair{"e", &c.e}}) {
        os << name << ',' << format_double(e->lhs) << ',' << format_double(e->rhs) << ','
           << format_double(e->slack) << ',' << format_double(e->slack_se) << ','
           << (e->holds ? 1 : 0) << '\n';
      }
      emit(out, os.str());
    }
    if (!c.d.holds || !c.e.holds) {
      return fail(SPE_VALIDATION_FAILED, "an inequality fails by more than 3 standard errors");
    }
    return SPE_OK;
  });
}

}  // extern "C"
