#include "difint/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "difint/errors.hpp"
#include "difint/version.hpp"

namespace difint {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

double parse_double_field(const std::string& token, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw parse_error("shots csv line " + std::to_string(line_no) + ": bad number '" + token + "'");
  return v;
}

}  // namespace

std::string format_double17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_shots_csv(const ShotData& data, const std::string& path) {
  std::ostringstream out;
  out << "shot,z1,z2\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << (i + 1) << ',' << format_double17(data.z1[i]) << ',' << format_double17(data.z2[i])
        << '\n';
  write_file(path, out.str());
}

void save_shots_sidecar(const InterferometerConfig& config, const ShotData& data,
                        std::size_t k_phi, const std::string& path) {
  ordered_json j;
  j["tool_version"] = kVersion;
  j["config"] = {{"n1", config.n1},       {"n2", config.n2},       {"tau", config.tau},
                 {"theta1", config.theta1}, {"theta2", config.theta2}, {"n_max", config.n_max}};
  j["k_phi"] = k_phi;
  j["m"] = data.size();
  j["seed"] = data.seed;
  write_file(path, j.dump(2) + "\n");
}

LoadedShots load_shots(const std::string& csv_path, const std::string& sidecar_path) {
  LoadedShots out;

  ordered_json side;
  try {
    side = ordered_json::parse(read_file(sidecar_path));
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error("sidecar " + sidecar_path + ": " + ex.what());
  }
  try {
    const auto& c = side.at("config");
    out.config.n1 = c.at("n1").get<int>();
    out.config.n2 = c.at("n2").get<int>();
    out.config.tau = c.at("tau").get<double>();
    out.config.theta1 = c.at("theta1").get<double>();
    out.config.theta2 = c.at("theta2").get<double>();
    if (c.contains("n_max")) out.config.n_max = c.at("n_max").get<int>();
    out.k_phi = side.value("k_phi", std::size_t{0});
    out.data.seed = side.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& ex) {
    throw parse_error("sidecar " + sidecar_path + ": " + ex.what());
  }
  out.config.validate();
  out.data.n1 = out.config.n1;
  out.data.n2 = out.config.n2;

  std::istringstream in(read_file(csv_path));
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw validation_error("shots csv: file is empty");
  ++line_no;
  if (line == "shot,z1,z2\r") line.pop_back();
  if (line != "shot,z1,z2")
    throw parse_error("shots csv line 1: expected header 'shot,z1,z2'");
  const auto clip = [&](double z, const char* name) {
    if (std::abs(z) <= 1.0) return z;
    if (std::abs(z) <= 1.0 + 1e-6) {
      out.warnings.push_back("line " + std::to_string(line_no) + ": " + name + " = " +
                             format_double17(z) + " clipped to the unit interval");
      return z > 0.0 ? 1.0 : -1.0;
    }
    throw validation_error(std::string(name) + ": |z| > 1 + 1e-6 at csv line " +
                           std::to_string(line_no));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string shot_tok, z1_tok, z2_tok, extra;
    if (!std::getline(row, shot_tok, ',') || !std::getline(row, z1_tok, ',') ||
        !std::getline(row, z2_tok, ','))
      throw parse_error("shots csv line " + std::to_string(line_no) + ": expected 3 columns");
    if (std::getline(row, extra, ','))
      throw parse_error("shots csv line " + std::to_string(line_no) + ": expected 3 columns");
    const double z1 = clip(parse_double_field(z1_tok, line_no), "z1");
    const double z2 = clip(parse_double_field(z2_tok, line_no), "z2");
    out.data.z1.push_back(z1);
    out.data.z2.push_back(z2);
    out.data.s1.push_back(std::asin(z1));
    out.data.s2.push_back(std::asin(z2));
  }
  if (out.data.size() == 0) throw validation_error("shots csv: no data rows");
  return out;
}

std::string joint_estimate_to_json(const JointEstimate& est, const ShotData& data) {
  ordered_json j;
  j["tool_version"] = kVersion;
  j["n1"] = data.n1;
  j["n2"] = data.n2;
  j["m"] = data.size();
  j["seed"] = data.seed;
  j["theta_est"] = est.theta_est;
  j["sigma_est"] = est.sigma_est;
  j["tau_est_analytic"] = est.tau_est_analytic;
  j["tau_est_exact"] = est.tau_est_exact;
  j["log_likelihood_at_max"] = est.log_likelihood_at_max;
  j["converged"] = est.converged;
  j["clamped_tau"] = est.clamped_tau;
  j["tau_range_flag"] = est.tau_range_flag;
  j["degenerate_data"] = est.degenerate_data;
  j["n_function_evals"] = est.n_function_evals;
  return j.dump(2) + "\n";
}

std::string conic_to_json(const ConicCoeffs& conic) {
  const char* method = "efs";
  switch (conic.fit_method) {
    case FitMethod::algebraic_ellipse_specific: method = "efs"; break;
    case FitMethod::algebraic_trace: method = "etr"; break;
    case FitMethod::geometric: method = "geo"; break;
  }
  ordered_json j;
  j["a"] = conic.a;
  j["b"] = conic.b;
  j["c"] = conic.c;
  j["d"] = conic.d;
  j["e"] = conic.e;
  j["f"] = conic.f;
  j["fit_method"] = method;
  j["converged"] = conic.converged;
  j["rms_residual"] = conic.rms_residual;
  j["is_ellipse"] = conic.is_ellipse();
  return j.dump(2) + "\n";
}

}  // namespace difint
