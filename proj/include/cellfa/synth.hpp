#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cellfa/calendar.hpp"
#include "cellfa/ingest.hpp"

namespace cellfa {

// A planted land-use temporal profile.
struct ProfileSpec {
  std::string name;
  std::vector<double> template_values;  // 168 non-negative activity levels
  int cell_count = 0;
  double base_volume = 1.0;  // GB scale
  double noise_sigma = 0.0;  // per-record multiplicative noise, fraction of signal
  double amp_sigma = 0.0;    // spread of the persistent per-cell amplitude factor
};

struct SyntheticGroundTruth {
  std::vector<ProfileSpec> profiles;
  std::map<std::string, std::string> assignment;  // cell_id -> profile name
  std::map<std::string, double> amplitudes;       // cell_id -> amplitude factor
  std::uint64_t seed = 0;
};

struct SynthOptions {
  CivilDate start_date{2017, 11, 27};  // a Monday, so data begins at slot 0
  // Small additive measurement floor added to every record so even slots with
  // no planted activity carry variance.
  double noise_floor_gb = 0.0;
};

struct SynthResult {
  CellDataset dataset;
  SyntheticGroundTruth truth;
};

// Hourly records for `days` days per cell. Per-record value:
//   base_volume * amplitude * template[slot] * (1 + eps) clamped at 0,
//   plus noise_floor_gb * |eta|,
// with eps ~ N(0, noise_sigma), amplitude ~ max(0.05, 1 + N(0, amp_sigma))
// fixed per cell, and per-cell RNG streams derived from (seed, cell index).
// UL is 0.1x and active users 3x the DL magnitude with independent draws.
SynthResult generate(const std::vector<ProfileSpec>& profiles, int days, std::uint64_t seed,
                     const SynthOptions& options = {});

// The five planted Istanbul-style profiles: residential, business, morning
// commute, evening commute, nightlife.
std::vector<ProfileSpec> built_in_profiles();

// Tucker congruence of two equal-length vectors: sum(xy)/sqrt(sum(x^2)sum(y^2)).
double tucker_congruence(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct CongruenceMatch {
  int recovered = 0;   // column of the recovered loading matrix
  int planted = 0;     // column of the planted template matrix
  double coefficient = 0.0;  // signed; match quality is |coefficient|
};

// Greedy maximum-|congruence| matching without replacement.
std::vector<CongruenceMatch> match_congruence(const Eigen::MatrixXd& recovered,
                                              const Eigen::MatrixXd& planted);

// Profile configuration file (JSON): either window rules or an explicit
// 168-value template per profile.
std::vector<ProfileSpec> load_profiles_json(const std::filesystem::path& path);

void write_ground_truth_json(const std::filesystem::path& path,
                             const SyntheticGroundTruth& truth);
SyntheticGroundTruth read_ground_truth_json(const std::filesystem::path& path);

}  // namespace cellfa
