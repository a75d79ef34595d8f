#include "cellfa/pipeline.hpp"

#include <Eigen/Core>
#include <fstream>

#include "cellfa/csv.hpp"
#include "cellfa/errors.hpp"
#include "cellfa/geo.hpp"
#include "cellfa/log.hpp"
#include "cellfa/model_io.hpp"
#include "cellfa/standardize.hpp"

namespace cellfa {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  return out;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path.string() + " is not valid JSON: " + std::string(e.what()));
  }
  return doc;
}

json tool_json() {
  return json{{"name", "cellfa"}, {"version", kVersion}, {"eigen", eigen_version()}};
}

struct IngestStage {
  CellDataset dataset;
  ParseStats parse_stats;
  std::vector<UnlocatedSite> unlocated;
};

IngestStage ingest_stage(const PipelineConfig& config) {
  ParseOptions options;
  options.max_reject_rate = config.max_reject_rate;
  ParseResult parsed = parse_kpi_csv(config.kpi_csv, options);
  log_info("parsed " + std::to_string(parsed.stats.accepted) + " records (" +
           std::to_string(parsed.stats.rejected) + " rejected)");

  IngestStage stage;
  stage.parse_stats = parsed.stats;
  if (!config.locations_csv.empty()) {
    auto locations = parse_locations_csv(config.locations_csv);
    JoinResult joined = join_locations(parsed.dataset, locations);
    stage.dataset = std::move(joined.dataset);
    stage.unlocated = std::move(joined.unlocated);
    if (!stage.unlocated.empty())
      log_warn(std::to_string(stage.unlocated.size()) + " site(s) without coordinates");
  } else {
    stage.dataset = std::move(parsed.dataset);
  }
  return stage;
}

void write_unlocated_csv(const std::filesystem::path& path,
                         const std::vector<UnlocatedSite>& unlocated) {
  std::ofstream out = open_out(path);
  write_csv_row(out, {"site_id", "record_count"});
  std::vector<std::string> row(2);
  for (const UnlocatedSite& u : unlocated) {
    row[0] = u.site_id;
    row[1] = std::to_string(u.record_count);
    write_csv_row(out, row);
  }
}

void write_completeness_csv(const std::filesystem::path& path,
                            const std::vector<CellCoverage>& report) {
  std::ofstream out = open_out(path);
  write_csv_row(out, {"cell_id", "covered_slots", "coverage"});
  std::vector<std::string> row(3);
  for (const CellCoverage& c : report) {
    row[0] = c.cell_id;
    row[1] = std::to_string(c.covered_slots);
    row[2] = format_double(static_cast<double>(c.covered_slots) / kSlotsPerWeek);
    write_csv_row(out, row);
  }
}

void write_dropped_csv(const std::filesystem::path& path, const std::vector<DroppedCell>& dropped) {
  std::ofstream out = open_out(path);
  write_csv_row(out, {"cell_id", "covered_slots", "reason"});
  std::vector<std::string> row(3);
  for (const DroppedCell& d : dropped) {
    row[0] = d.cell_id;
    row[1] = std::to_string(d.covered_slots);
    row[2] = d.reason;
    write_csv_row(out, row);
  }
}

void write_standardization_csv(const std::filesystem::path& path, const Standardized& std_result) {
  std::ofstream out = open_out(path);
  write_csv_row(out, {"slot", "mean", "stddev"});
  std::vector<std::string> row(3);
  for (Eigen::Index j = 0; j < std_result.mean.size(); ++j) {
    row[0] = std::to_string(j);
    row[1] = format_double(std_result.mean[j]);
    row[2] = format_double(std_result.stddev[j]);
    write_csv_row(out, row);
  }
}

void write_parallel_analysis_csv(const std::filesystem::path& path,
                                 const ParallelAnalysisResult& pa) {
  std::ofstream out = open_out(path);
  write_csv_row(out, {"rank", "observed_eigenvalue", "random_quantile", "retained"});
  std::vector<std::string> row(4);
  for (Eigen::Index r = 0; r < pa.observed.size(); ++r) {
    row[0] = std::to_string(r + 1);
    row[1] = format_double(pa.observed[r]);
    row[2] = format_double(pa.thresholds[r]);
    row[3] = r < pa.retained ? "1" : "0";
    write_csv_row(out, row);
  }
}

json pa_to_json(const ParallelAnalysisResult& pa) {
  json observed = json::array();
  json thresholds = json::array();
  for (Eigen::Index i = 0; i < pa.observed.size(); ++i) {
    observed.push_back(pa.observed[i]);
    thresholds.push_back(pa.thresholds[i]);
  }
  return json{{"observed", std::move(observed)},
              {"thresholds", std::move(thresholds)},
              {"retained", pa.retained},
              {"replicates", pa.replicates},
              {"quantile", pa.quantile},
              {"seed", pa.seed}};
}

}  // namespace

json config_to_json(const PipelineConfig& config) {
  return json{{"kpi_csv", config.kpi_csv.string()},
              {"locations_csv", config.locations_csv.string()},
              {"out_dir", config.out_dir.string()},
              {"metric", metric_name(config.metric)},
              {"replicates", config.replicates},
              {"quantile", config.quantile},
              {"seed", config.seed},
              {"kappa", config.kappa},
              {"min_coverage", config.min_coverage},
              {"extraction_max_iter", config.extraction_max_iter},
              {"extraction_tol", config.extraction_tol},
              {"max_reject_rate", config.max_reject_rate}};
}

PipelineConfig config_from_json_file(const std::filesystem::path& path) {
  json doc = read_json_file(path);
  PipelineConfig config;
  config.kpi_csv = doc.value("kpi_csv", std::string{});
  config.locations_csv = doc.value("locations_csv", std::string{});
  config.out_dir = doc.value("out_dir", std::string{});
  if (doc.contains("metric")) {
    auto metric = parse_metric(doc["metric"].get<std::string>());
    if (!metric) throw UsageError("config: unknown metric");
    config.metric = *metric;
  }
  config.replicates = doc.value("replicates", config.replicates);
  config.quantile = doc.value("quantile", config.quantile);
  config.seed = doc.value("seed", config.seed);
  config.kappa = doc.value("kappa", config.kappa);
  config.min_coverage = doc.value("min_coverage", config.min_coverage);
  config.extraction_max_iter = doc.value("extraction_max_iter", config.extraction_max_iter);
  config.extraction_tol = doc.value("extraction_tol", config.extraction_tol);
  config.max_reject_rate = doc.value("max_reject_rate", config.max_reject_rate);
  return config;
}

AnalyzeOutcome run_analyze(const PipelineConfig& config) {
  ensure_dir(config.out_dir);
  AnalyzeOutcome outcome;
  auto emit = [&](const std::filesystem::path& p) { outcome.outputs.push_back(p); };

  IngestStage stage = ingest_stage(config);
  outcome.parse_stats = stage.parse_stats;
  write_unlocated_csv(config.out_dir / "unlocated_sites.csv", stage.unlocated);
  emit(config.out_dir / "unlocated_sites.csv");

  write_completeness_csv(config.out_dir / "completeness.csv",
                         completeness_report(stage.dataset, config.metric));
  emit(config.out_dir / "completeness.csv");

  CondensePolicy policy{config.min_coverage};
  CondenseResult condensed = build_median_week(stage.dataset, config.metric, policy);
  outcome.cells = condensed.matrix.cell_ids.size();
  log_info("median week: " + std::to_string(outcome.cells) + " cells retained, " +
           std::to_string(condensed.dropped.size()) + " dropped");
  write_median_week_csv(config.out_dir / "median_week.csv", condensed.matrix);
  emit(config.out_dir / "median_week.csv");
  write_coordinates_csv(config.out_dir / "coordinates.csv", condensed.matrix);
  emit(config.out_dir / "coordinates.csv");
  write_dropped_csv(config.out_dir / "dropped_cells.csv", condensed.dropped);
  emit(config.out_dir / "dropped_cells.csv");

  Standardized z = standardize(condensed.matrix.values);
  write_standardization_csv(config.out_dir / "standardization.csv", z);
  emit(config.out_dir / "standardization.csv");

  Eigen::MatrixXd correlation = correlation_matrix(z.z);

  ParallelAnalysisOptions pa_options{config.replicates, config.quantile, config.seed};
  outcome.pa = parallel_analysis(z.z, pa_options);
  outcome.retained_k = outcome.pa.retained;
  log_info("parallel analysis retained K = " + std::to_string(outcome.retained_k));
  write_parallel_analysis_csv(config.out_dir / "parallel_analysis.csv", outcome.pa);
  emit(config.out_dir / "parallel_analysis.csv");

  json manifest;
  manifest["tool"] = tool_json();
  manifest["command"] = "analyze";
  manifest["config"] = config_to_json(config);
  manifest["reports"] = {{"rows_parsed", stage.parse_stats.data_rows},
                         {"rows_rejected", stage.parse_stats.rejected},
                         {"unlocated_sites", stage.unlocated.size()},
                         {"cells_retained", outcome.cells},
                         {"cells_dropped", condensed.dropped.size()},
                         {"imputed_slots", condensed.imputed_slots}};
  manifest["results"] = {{"retained_k", outcome.retained_k}};

  if (outcome.retained_k >= 1) {
    FitOptions fit;
    fit.extraction.max_iterations = config.extraction_max_iter;
    fit.extraction.tolerance = config.extraction_tol;
    fit.kappa = config.kappa;
    FactorModel model = fit_factor_model(correlation, outcome.retained_k, fit);

    ScoreTable table = regression_scores(z.z, correlation, model, condensed.matrix.cell_ids,
                                         condensed.matrix.coordinates);
    if (table.ridge_applied) log_warn("correlation matrix required a ridge for scoring");

    json model_doc = model_to_json(model);
    model_doc["metric"] = metric_name(config.metric);
    model_doc["seed"] = config.seed;
    model_doc["parameters"] = {{"replicates", config.replicates},
                               {"quantile", config.quantile},
                               {"kappa", config.kappa},
                               {"min_coverage", config.min_coverage},
                               {"extraction_max_iter", config.extraction_max_iter},
                               {"extraction_tol", config.extraction_tol}};
    model_doc["parallel_analysis"] = pa_to_json(outcome.pa);
    model_doc["flags"]["ridge_applied"] = table.ridge_applied;
    write_json_file(config.out_dir / "model.json", model_doc);
    emit(config.out_dir / "model.json");

    write_scores_csv(config.out_dir / "scores.csv", table);
    emit(config.out_dir / "scores.csv");

    for (const auto& path : export_heatmaps(model, config.out_dir)) emit(path);

    // The score map needs coordinates; restrict it to located cells.
    std::size_t located = 0;
    for (const auto& c : table.coordinates)
      if (c) ++located;
    if (located == table.cell_ids.size()) {
      export_score_map(table, config.out_dir / "score_map.geojson");
      emit(config.out_dir / "score_map.geojson");
      manifest["results"]["score_map_cells"] = located;
    } else if (located > 0) {
      ScoreTable subset;
      subset.factor_labels = table.factor_labels;
      subset.ridge_applied = table.ridge_applied;
      subset.scores.resize(static_cast<Eigen::Index>(located), table.scores.cols());
      Eigen::Index at = 0;
      for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
        if (!table.coordinates[i]) continue;
        subset.cell_ids.push_back(table.cell_ids[i]);
        subset.coordinates.push_back(table.coordinates[i]);
        subset.scores.row(at++) = table.scores.row(static_cast<Eigen::Index>(i));
      }
      export_score_map(subset, config.out_dir / "score_map.geojson");
      emit(config.out_dir / "score_map.geojson");
      manifest["results"]["score_map_cells"] = located;
      log_warn("score map limited to " + std::to_string(located) + " located cells");
    } else {
      log_warn("no located cells; score map skipped");
      manifest["results"]["score_map_cells"] = 0;
    }

    manifest["results"]["flags"] = model_to_json(model)["flags"];
    manifest["results"]["flags"]["ridge_applied"] = table.ridge_applied;
    outcome.model = std::move(model);
  } else {
    log_warn("parallel analysis retained no factors; extraction skipped");
  }

  json outputs = json::array();
  for (const auto& p : outcome.outputs) outputs.push_back(p.filename().string());
  manifest["outputs"] = std::move(outputs);
  write_json_file(config.out_dir / "manifest.json", manifest);
  outcome.outputs.push_back(config.out_dir / "manifest.json");
  return outcome;
}

void run_condense(const PipelineConfig& config) {
  ensure_dir(config.out_dir);
  IngestStage stage = ingest_stage(config);
  write_unlocated_csv(config.out_dir / "unlocated_sites.csv", stage.unlocated);
  write_completeness_csv(config.out_dir / "completeness.csv",
                         completeness_report(stage.dataset, config.metric));

  CondensePolicy policy{config.min_coverage};
  CondenseResult condensed = build_median_week(stage.dataset, config.metric, policy);
  write_median_week_csv(config.out_dir / "median_week.csv", condensed.matrix);
  write_coordinates_csv(config.out_dir / "coordinates.csv", condensed.matrix);
  write_dropped_csv(config.out_dir / "dropped_cells.csv", condensed.dropped);

  json manifest;
  manifest["tool"] = tool_json();
  manifest["command"] = "condense";
  manifest["config"] = config_to_json(config);
  manifest["reports"] = {{"rows_parsed", stage.parse_stats.data_rows},
                         {"rows_rejected", stage.parse_stats.rejected},
                         {"cells_retained", condensed.matrix.cell_ids.size()},
                         {"cells_dropped", condensed.dropped.size()},
                         {"imputed_slots", condensed.imputed_slots}};
  write_json_file(config.out_dir / "manifest.json", manifest);
}

DatasetStats run_stats(const std::filesystem::path& kpi_csv,
                       const std::filesystem::path& locations_csv,
                       const std::filesystem::path& out_dir, double max_reject_rate) {
  ensure_dir(out_dir);
  PipelineConfig config;
  config.kpi_csv = kpi_csv;
  config.locations_csv = locations_csv;
  config.max_reject_rate = max_reject_rate;
  IngestStage stage = ingest_stage(config);

  DatasetStats stats = dataset_stats(stage.dataset);
  {
    std::ofstream out = open_out(out_dir / "stats.csv");
    write_csv_row(out, {"row_count", "district_count", "dl_gb_per_day", "ul_gb_per_day",
                        "active_users_mean", "duration_days"});
    write_csv_row(out, {std::to_string(stats.row_count), std::to_string(stats.district_count),
                        format_double(stats.dl_gb_per_day), format_double(stats.ul_gb_per_day),
                        format_double(stats.active_users_mean),
                        std::to_string(stats.duration_days)});
  }
  {
    std::ofstream out = open_out(out_dir / "districts.csv");
    write_csv_row(out, {"district", "dl_gb_sum", "ul_gb_sum", "active_users_mean", "records"});
    std::vector<std::string> row(5);
    for (const auto& [name, sum] : summarize_districts(stage.dataset)) {
      row[0] = name;
      row[1] = format_double(sum.dl_gb_sum);
      row[2] = format_double(sum.ul_gb_sum);
      row[3] = format_double(sum.active_users_mean);
      row[4] = std::to_string(sum.record_count);
      write_csv_row(out, row);
    }
  }
  if (!locations_csv.empty())
    write_unlocated_csv(out_dir / "unlocated_sites.csv", stage.unlocated);

  json manifest;
  manifest["tool"] = tool_json();
  manifest["command"] = "stats";
  manifest["config"] = {{"kpi_csv", kpi_csv.string()},
                        {"locations_csv", locations_csv.string()},
                        {"out_dir", out_dir.string()},
                        {"max_reject_rate", max_reject_rate}};
  manifest["reports"] = {{"rows_parsed", stage.parse_stats.data_rows},
                         {"rows_rejected", stage.parse_stats.rejected},
                         {"row_count", stats.row_count},
                         {"district_count", stats.district_count},
                         {"duration_days", stats.duration_days}};
  write_json_file(out_dir / "manifest.json", manifest);
  return stats;
}

void run_synth(const SynthRunConfig& config) {
  ensure_dir(config.out_dir);
  std::vector<ProfileSpec> profiles = config.profiles_json.empty()
                                          ? built_in_profiles()
                                          : load_profiles_json(config.profiles_json);
  SynthOptions options;
  options.noise_floor_gb = config.noise_floor_gb;
  SynthResult result = generate(profiles, config.days, config.seed, options);

  write_kpi_csv(config.out_dir / "kpi.csv", result.dataset.records());
  write_locations_csv(config.out_dir / "locations.csv", result.dataset.locations());
  write_ground_truth_json(config.out_dir / "ground_truth.json", result.truth);

  json manifest;
  manifest["tool"] = tool_json();
  manifest["command"] = "synth";
  manifest["config"] = {{"profiles_json", config.profiles_json.string()},
                        {"days", config.days},
                        {"seed", config.seed},
                        {"noise_floor_gb", config.noise_floor_gb},
                        {"out_dir", config.out_dir.string()}};
  manifest["reports"] = {{"profiles", profiles.size()},
                         {"cells", result.truth.assignment.size()},
                         {"records", result.dataset.records().size()}};
  write_json_file(config.out_dir / "manifest.json", manifest);
  log_info("synth: " + std::to_string(result.dataset.records().size()) + " records for " +
           std::to_string(result.truth.assignment.size()) + " cells");
}

void run_export(const std::filesystem::path& model_json,
                const std::filesystem::path& scores_csv, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  FactorModel model = model_from_json(read_json_file(model_json));
  export_heatmaps(model, out_dir);

  ScoreTable table = read_scores_csv(scores_csv);
  export_score_map(table, out_dir / "score_map.geojson");

  json manifest;
  manifest["tool"] = tool_json();
  manifest["command"] = "export";
  manifest["config"] = {{"model_json", model_json.string()},
                        {"scores_csv", scores_csv.string()},
                        {"out_dir", out_dir.string()}};
  manifest["reports"] = {{"factors", model.k}, {"cells", table.cell_ids.size()}};
  write_json_file(out_dir / "manifest.json", manifest);
}

}  // namespace cellfa
