#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellfa/condense.hpp"
#include "cellfa/efa.hpp"
#include "cellfa/ingest.hpp"
#include "cellfa/scoring.hpp"
#include "cellfa/synth.hpp"

namespace cellfa {

// Resolved run configuration; echoed verbatim into the run manifest so every
// run is reproducible from its output directory alone.
struct PipelineConfig {
  std::filesystem::path kpi_csv;
  std::filesystem::path locations_csv;  // optional
  std::filesystem::path out_dir;
  Metric metric = Metric::DL;
  int replicates = 100;
  double quantile = 0.95;
  std::uint64_t seed = 0;
  int kappa = 4;
  double min_coverage = 1.0;
  int extraction_max_iter = 100;
  double extraction_tol = 1e-6;
  double max_reject_rate = 0.01;
};

nlohmann::json config_to_json(const PipelineConfig& config);

// Reads config values from a JSON file; missing keys keep their defaults.
PipelineConfig config_from_json_file(const std::filesystem::path& path);

struct AnalyzeOutcome {
  int retained_k = 0;
  std::optional<FactorModel> model;  // absent when K = 0
  ParallelAnalysisResult pa;
  ParseStats parse_stats;
  std::size_t cells = 0;
  std::vector<std::filesystem::path> outputs;
};

// Full pipeline for one metric: ingest -> join -> condense -> standardize ->
// correlation -> parallel analysis -> extraction/rotation -> scores ->
// exports -> manifest. Rerunning with the same config is byte-identical.
AnalyzeOutcome run_analyze(const PipelineConfig& config);

// Ingest + condense only.
void run_condense(const PipelineConfig& config);

// Descriptive statistics reports (stats.csv + districts.csv + manifest).
DatasetStats run_stats(const std::filesystem::path& kpi_csv,
                       const std::filesystem::path& locations_csv,
                       const std::filesystem::path& out_dir, double max_reject_rate = 0.01);

struct SynthRunConfig {
  std::filesystem::path profiles_json;  // empty -> built-in profiles
  int days = 28;
  std::uint64_t seed = 0;
  double noise_floor_gb = 0.0;
  std::filesystem::path out_dir;
};

void run_synth(const SynthRunConfig& config);

// Re-emit heatmaps and the score map from saved model.json + scores.csv.
void run_export(const std::filesystem::path& model_json,
                const std::filesystem::path& scores_csv, const std::filesystem::path& out_dir);

}  // namespace cellfa
