#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "iofpg/iof.hpp"
#include "iofpg/pg.hpp"
#include "iofpg/zero_order.hpp"

namespace iofpg {

using nlohmann::json;

/// Matrices travel as {"rows": r, "cols": c, "data": [row-major numbers]}.
json mat_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd mat_from_json(const json& j);

json system_to_json(const LtiSystem& sys);
LtiSystem system_from_json(const json& j);

json cost_certificate_to_json(const CostCertificate& cert);
json geometry_to_json(const SolutionGeometry& geom);

/// Throws ConfigError with parse context for malformed files.
LtiSystem load_system(const std::filesystem::path& path);
json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

/// CSV header "iter,J,gap,grad_fro".
void write_pg_trace_csv(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& trace);

/// CSV header "iter,J,gap,grad_fro,J_hat,saturated".
void write_zo_trace_csv(const std::filesystem::path& path,
                        const std::vector<ZoTraceRecord>& trace);

/// FNV-1a over the serialized system, for run metadata.
std::uint64_t system_fingerprint(const LtiSystem& sys);

}  // namespace iofpg
