// extern "C" surface over the C++ core: opaque handles, status codes, and a
// thread-local last-error message.

#include "difint.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "difint/errors.hpp"
#include "difint/io.hpp"
#include "difint/joint_distribution.hpp"
#include "difint/ml_estimator.hpp"
#include "difint/montecarlo.hpp"
#include "difint/run_config.hpp"
#include "difint/version.hpp"

struct difint_config {
  difint::InterferometerConfig config;
};

struct difint_table {
  std::shared_ptr<const difint::ConditionalTable> table;
};

struct difint_shots {
  difint::ShotData data;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

difint_status to_status(const std::exception& ex) {
  set_error(ex.what());
  if (dynamic_cast<const difint::validation_error*>(&ex)) return DIFINT_ERR_INVALID_ARGUMENT;
  if (dynamic_cast<const difint::capacity_error*>(&ex)) return DIFINT_ERR_CAPACITY;
  if (dynamic_cast<const difint::degenerate_data_error*>(&ex)) return DIFINT_ERR_DEGENERATE_DATA;
  if (dynamic_cast<const difint::numeric_error*>(&ex)) return DIFINT_ERR_NUMERIC;
  if (dynamic_cast<const difint::io_error*>(&ex)) return DIFINT_ERR_IO;
  if (dynamic_cast<const difint::parse_error*>(&ex)) return DIFINT_ERR_PARSE;
  if (dynamic_cast<const std::invalid_argument*>(&ex)) return DIFINT_ERR_INVALID_ARGUMENT;
  return DIFINT_ERR_INTERNAL;
}

template <typename Fn>
difint_status guarded(Fn&& fn) {
  try {
    fn();
    return DIFINT_OK;
  } catch (const std::exception& ex) {
    return to_status(ex);
  } catch (...) {
    set_error("unknown error");
    return DIFINT_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

difint_status require(bool ok, const char* message) {
  if (ok) return DIFINT_OK;
  set_error(message);
  return DIFINT_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* difint_version(void) { return difint::kVersion; }

const char* difint_last_error(void) { return g_last_error.c_str(); }

void difint_string_free(char* s) { std::free(s); }

difint_status difint_config_create(int n1, int n2, double tau, double theta1, double theta2,
                                   difint_config** out) {
  if (auto st = require(out != nullptr, "out: must not be null")) return st;
  *out = nullptr;
  return guarded([&]() {
    auto handle = std::make_unique<difint_config>();
    handle->config = {n1, n2, tau, theta1, theta2};
    handle->config.validate();
    *out = handle.release();
  });
}

void difint_config_destroy(difint_config* config) { delete config; }

double difint_config_theta(const difint_config* config) {
  return config ? config->config.theta() : 0.0;
}

double difint_config_sigma_true_sq(const difint_config* config) {
  return config ? config->config.sigma_true_sq() : 0.0;
}

difint_status difint_table_build(const difint_config* config, size_t k_phi, difint_table** out) {
  if (auto st = require(config && out, "config/out: must not be null")) return st;
  *out = nullptr;
  return guarded([&]() {
    auto handle = std::make_unique<difint_table>();
    handle->table = difint::build_table(config->config, k_phi);
    *out = handle.release();
  });
}

void difint_table_destroy(difint_table* table) { delete table; }

size_t difint_table_k_phi(const difint_table* table) { return table ? table->table->k_phi() : 0; }

difint_status difint_joint_density(const difint_config* config, const difint_table* table,
                                   double z1, double z2, double* out) {
  if (auto st = require(config && table && out, "config/table/out: must not be null")) return st;
  return guarded([&]() { *out = difint::joint_density(z1, z2, config->config, *table->table); });
}

difint_status difint_sample_shots(const difint_config* config, const difint_table* table,
                                  size_t m, uint64_t seed, difint_shots** out) {
  if (auto st = require(config && table && out, "config/table/out: must not be null")) return st;
  *out = nullptr;
  return guarded([&]() {
    auto handle = std::make_unique<difint_shots>();
    handle->data = difint::sample_shots(config->config, *table->table, m, seed);
    *out = handle.release();
  });
}

void difint_shots_destroy(difint_shots* shots) { delete shots; }

size_t difint_shots_size(const difint_shots* shots) { return shots ? shots->data.size() : 0; }

difint_status difint_shots_get(const difint_shots* shots, size_t index, double* z1, double* z2) {
  if (auto st = require(shots && z1 && z2, "shots/z1/z2: must not be null")) return st;
  if (auto st = require(index < shots->data.size(), "index: out of range")) return st;
  *z1 = shots->data.z1[index];
  *z2 = shots->data.z2[index];
  return DIFINT_OK;
}

difint_status difint_shots_save(const difint_shots* shots, const difint_config* config,
                                const char* csv_path, const char* sidecar_path) {
  if (auto st = require(shots && config && csv_path && sidecar_path,
                        "shots/config/paths: must not be null"))
    return st;
  return guarded([&]() {
    difint::save_shots_csv(shots->data, csv_path);
    difint::save_shots_sidecar(config->config, shots->data, 0, sidecar_path);
  });
}

difint_status difint_shots_load(const char* csv_path, const char* sidecar_path,
                                difint_shots** out_shots, difint_config** out_config) {
  if (auto st = require(csv_path && sidecar_path && out_shots, "paths/out: must not be null"))
    return st;
  *out_shots = nullptr;
  if (out_config) *out_config = nullptr;
  return guarded([&]() {
    difint::LoadedShots loaded = difint::load_shots(csv_path, sidecar_path);
    auto shots = std::make_unique<difint_shots>();
    shots->data = std::move(loaded.data);
    if (out_config) {
      auto config = std::make_unique<difint_config>();
      config->config = loaded.config;
      *out_config = config.release();
    }
    *out_shots = shots.release();
  });
}

difint_status difint_estimate(const difint_shots* shots, difint_estimate_result* out) {
  if (auto st = require(shots && out, "shots/out: must not be null")) return st;
  return guarded([&]() {
    const difint::JointEstimate est = difint::estimate(shots->data);
    out->theta_est = est.theta_est;
    out->sigma_est = est.sigma_est;
    out->tau_est_analytic = est.tau_est_analytic;
    out->tau_est_exact = est.tau_est_exact;
    out->log_likelihood_at_max = est.log_likelihood_at_max;
    out->converged = est.converged ? 1 : 0;
    out->clamped_tau = est.clamped_tau ? 1 : 0;
    out->n_function_evals = est.n_function_evals;
  });
}

difint_status difint_estimate_json(const difint_shots* shots, char** json_out) {
  if (auto st = require(shots && json_out, "shots/json_out: must not be null")) return st;
  *json_out = nullptr;
  return guarded([&]() {
    const difint::JointEstimate est = difint::estimate(shots->data);
    *json_out = dup_string(difint::joint_estimate_to_json(est, shots->data));
  });
}

difint_status difint_fisher(double theta, double sigma, size_t m, difint_fisher_result* out) {
  if (auto st = require(out != nullptr, "out: must not be null")) return st;
  return guarded([&]() {
    const difint::FisherMatrix fim = difint::fim_numeric(theta, sigma);
    const difint::CrbMatrix c = difint::crb(fim, m);
    out->f11 = fim.f11;
    out->f12 = fim.f12;
    out->f22 = fim.f22;
    out->crb_dtheta = std::sqrt(c.var_theta);
    out->crb_dsigma = std::sqrt(c.var_sigma);
    out->converged = fim.converged ? 1 : 0;
  });
}

difint_status difint_run_simulate(const char* config_text, const char* out_dir) {
  if (auto st = require(config_text && out_dir, "config_text/out_dir: must not be null"))
    return st;
  return guarded([&]() {
    difint::run_simulate(difint::parse_run_config(config_text), out_dir);
  });
}

difint_status difint_run_estimate(const char* csv_path, const char* sidecar_path, char** json_out,
                                  char** warnings_out) {
  if (auto st = require(csv_path && sidecar_path && json_out, "paths/json_out: must not be null"))
    return st;
  *json_out = nullptr;
  if (warnings_out) *warnings_out = nullptr;
  return guarded([&]() {
    std::vector<std::string> warnings;
    const std::string json = difint::run_estimate_json(csv_path, sidecar_path, &warnings);
    *json_out = dup_string(json);
    if (warnings_out && !warnings.empty()) {
      std::string joined;
      for (const auto& w : warnings) {
        if (!joined.empty()) joined += "\n";
        joined += w;
      }
      *warnings_out = dup_string(joined);
    }
  });
}

difint_status difint_run_fisher_json(double theta, double sigma, size_t m, int n1, int n2,
                                     double tau, char** json_out) {
  if (auto st = require(json_out != nullptr, "json_out: must not be null")) return st;
  *json_out = nullptr;
  return guarded(
      [&]() { *json_out = dup_string(difint::run_fisher_json(theta, sigma, m, n1, n2, tau)); });
}

difint_status difint_run_benchmark(const char* config_text, const char* out_dir) {
  if (auto st = require(config_text && out_dir, "config_text/out_dir: must not be null"))
    return st;
  return guarded([&]() {
    difint::run_benchmark(difint::parse_run_config(config_text), out_dir);
  });
}

difint_status difint_config_echo(const char* config_text, char** echo_out) {
  if (auto st = require(config_text && echo_out, "config_text/echo_out: must not be null"))
    return st;
  *echo_out = nullptr;
  return guarded([&]() {
    *echo_out = dup_string(difint::run_config_echo(difint::parse_run_config(config_text)));
  });
}

}  // extern "C"
