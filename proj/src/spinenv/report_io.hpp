#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"
#include "spinenv/exact_oracle.hpp"
#include "spinenv/experiments.hpp"
#include "spinenv/graphical.hpp"

namespace spinenv {

/// Event log "t,site,layer,from,to" with the initial and final joint states
/// as "# initial <layer>=<literal>" / "# final <layer>=<literal>" lines.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
nlohmann::json trajectory_json(const Trajectory& traj);

/// Reads either export back. Layer literals and frozen words round-trip.
Trajectory read_trajectory_csv(std::string_view text);
Trajectory trajectory_from_json(const nlohmann::json& j);

/// "state_index,probability" rows; state_index is the packed code.
void write_distribution_csv(std::ostream& out, const GeneratorMatrix& g, const Eigen::VectorXd& p);
/// "from,to,rate" rows over packed codes, off-diagonal entries only.
void write_generator_csv(std::ostream& out, const GeneratorMatrix& g);

nlohmann::json distribution_json(const GeneratorMatrix& g, const Eigen::VectorXd& p);
nlohmann::json generator_json(const GeneratorMatrix& g);

/// Schema: scenario, params, estimate, stderr, replicas, seed, runtime_ms,
/// plus window and horizon.
nlohmann::json report_json(const EstimateReport& r);

nlohmann::json density_json(const DensityCurves& d);
void write_density_csv(std::ostream& out, const DensityCurves& d);

nlohmann::json f_decay_json(const FDecayTable& t);
void write_f_decay_csv(std::ostream& out, const FDecayTable& t);

nlohmann::json lemma_json(const LemmaCheck& c);
nlohmann::json scenario_json(const ScenarioReport& r);

/// Summary of a stationary analysis including the nu limits.
nlohmann::json stationary_json(const GeneratorMatrix& g, const StationarySet& set,
                               const NuLimits& limits);

}  // namespace spinenv
