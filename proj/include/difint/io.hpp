#pragma once

// File formats: shot CSV (`shot,z1,z2`, 17 significant digits so doubles
// round-trip exactly), the JSON sidecar carrying the generating
// configuration and seed, and the JSON rendering of estimates.

#include <string>
#include <vector>

#include "difint/ellipse_fit.hpp"
#include "difint/joint_distribution.hpp"
#include "difint/ml_estimator.hpp"

namespace difint {

std::string format_double17(double v);

void save_shots_csv(const ShotData& data, const std::string& path);
void save_shots_sidecar(const InterferometerConfig& config, const ShotData& data,
                        std::size_t k_phi, const std::string& path);

struct LoadedShots {
  ShotData data;
  InterferometerConfig config;
  std::size_t k_phi = 0;
  std::vector<std::string> warnings;  // e.g. out-of-range z values clipped
};

LoadedShots load_shots(const std::string& csv_path, const std::string& sidecar_path);

std::string joint_estimate_to_json(const JointEstimate& estimate, const ShotData& data);

std::string conic_to_json(const ConicCoeffs& conic);

}  // namespace difint
