#include "iofpg/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace iofpg {

using Eigen::Index;
using Eigen::MatrixXd;

json mat_to_json(const MatrixXd& M) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(M.size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

MatrixXd mat_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
    throw ConfigError("mat_from_json: expected {rows, cols, data}");
  }
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    std::ostringstream os;
    os << "mat_from_json: data length " << data.size() << " does not match " << rows
       << "x" << cols;
    throw ConfigError(os.str());
  }
  MatrixXd M(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j2 = 0; j2 < cols; ++j2) M(i, j2) = data[k++];
  }
  if (!all_finite(M)) throw DomainError("mat_from_json: entries must be finite");
  return M;
}

json system_to_json(const LtiSystem& sys) {
  return json{{"A", mat_to_json(sys.A)}, {"B", mat_to_json(sys.B)}, {"C", mat_to_json(sys.C)}};
}

LtiSystem system_from_json(const json& j) {
  if (!j.is_object() || !j.contains("A") || !j.contains("B") || !j.contains("C")) {
    throw ConfigError("system_from_json: expected {A, B, C}");
  }
  return LtiSystem(mat_from_json(j.at("A")), mat_from_json(j.at("B")),
                   mat_from_json(j.at("C")));
}

json cost_certificate_to_json(const CostCertificate& cert) {
  return json{{"K", mat_to_json(cert.K)},       {"P_K", mat_to_json(cert.P_K)},
              {"Sigma_K", mat_to_json(cert.Sigma_K)}, {"E_K", mat_to_json(cert.E_K)},
              {"grad", mat_to_json(cert.grad)}, {"J", cert.J}};
}

json geometry_to_json(const SolutionGeometry& geom) {
  return json{{"Kstar", mat_to_json(geom.Kstar)},
              {"Pstar", mat_to_json(geom.Pstar)},
              {"Sigma0", mat_to_json(geom.Sigma0)},
              {"Sigma_star", mat_to_json(geom.Sigma_star)},
              {"proj_perp", mat_to_json(geom.proj_perp)},
              {"Jstar", geom.Jstar},
              {"S_norm", geom.S_norm},
              {"R_min_eig", geom.R_min_eig}};
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("load_json: cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("load_json: " + path.string() + ": " + e.what());
  }
}

LtiSystem load_system(const std::filesystem::path& path) {
  return system_from_json(load_json(path));
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_json: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_pg_trace_csv(const std::filesystem::path& path,
                        const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_pg_trace_csv: cannot open " + path.string());
  out << "iter,J,gap,grad_fro\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.gap) << ','
        << format_double(r.grad_fro) << '\n';
  }
}

void write_zo_trace_csv(const std::filesystem::path& path,
                        const std::vector<ZoTraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_zo_trace_csv: cannot open " + path.string());
  out << "iter,J,gap,grad_fro,J_hat,saturated\n";
  for (const auto& r : trace) {
    out << r.iter << ',' << format_double(r.J) << ',' << format_double(r.gap) << ','
        << format_double(r.grad_fro) << ',' << format_double(r.J_hat) << ','
        << (r.saturated ? 1 : 0) << '\n';
  }
}

std::uint64_t system_fingerprint(const LtiSystem& sys) {
  const std::string bytes = system_to_json(sys).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace iofpg
