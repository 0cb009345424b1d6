#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lsaga/appendix.hpp"
#include "lsaga/assumptions.hpp"
#include "lsaga/asymptotics.hpp"
#include "lsaga/engine.hpp"
#include "lsaga/schedule.hpp"

namespace lsaga {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

nlohmann::json to_json(const Vector& v);
/// {"rows": r, "cols": c, "data": [row-major values]}
nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StepSchedule& schedule);
nlohmann::json to_json(const RateConditionReport& report);
nlohmann::json to_json(const AssumptionReport& report);
nlohmann::json to_json(const MonteCarloSummary& summary);
nlohmann::json to_json(const RateEstimate& estimate);
nlohmann::json to_json(const NormPowerConstants& constants);
nlohmann::json to_json(const RandomizedInequalitySummary& summary);
/// Everything but the Z sequence itself.
nlohmann::json to_json(const RecursionTrace& trace);

/// Run metadata: schedule, lambda, seed, cadence, start points, final iterate, wall time.
nlohmann::json trace_metadata(const RunTrace& trace, const std::string& problem);

/// Header `n,V_n,A_n,tau2,T_n,grad_eval_norm,value_gap`; diagnostics that need
/// x* are left empty when it was not supplied.
std::string trace_csv(const RunTrace& trace);

/// One row per replication: `replication,x_1,...,x_d`.
std::string points_csv(const Matrix& points);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace lsaga
