// cellfa: condense cellular KPI exports into median-week signatures, run
// exploratory factor analysis, and export temporal heatmaps and geospatial
// score maps. Set CELLFA_LOG=quiet|info|debug to control verbosity.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "cellfa/condense.hpp"
#include "cellfa/errors.hpp"
#include "cellfa/pipeline.hpp"

namespace {

using cellfa::PipelineConfig;

// Shared analyze/condense options; flag values win over config-file values.
struct CommonArgs {
  std::string config_file;
  std::string kpi, locations, out, metric;
  int replicates = -1;
  double quantile = -1.0;
  std::int64_t seed = -1;
  int kappa = -1;
  double min_coverage = -1.0;
  int extraction_max_iter = -1;
  double extraction_tol = -1.0;
  double max_reject_rate = -1.0;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool analysis_flags) {
  cmd->add_option("--config", args.config_file, "JSON config file; flags override it");
  cmd->add_option("--kpi", args.kpi, "KPI CSV export");
  cmd->add_option("--locations", args.locations, "site location CSV (site_id,lat,lon)");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--metric", args.metric, "DL, UL or USERS (default DL)");
  cmd->add_option("--min-coverage", args.min_coverage,
                  "slot-coverage fraction a cell must reach (default 1.0)");
  cmd->add_option("--max-reject-rate", args.max_reject_rate,
                  "tolerated malformed-row share (default 0.01)");
  if (analysis_flags) {
    cmd->add_option("--replicates", args.replicates,
                    "parallel-analysis replicates (default 100)");
    cmd->add_option("--quantile", args.quantile,
                    "parallel-analysis quantile (default 0.95)");
    cmd->add_option("--seed", args.seed, "random seed (default 0)");
    cmd->add_option("--kappa", args.kappa, "promax power (default 4)");
  }
}

PipelineConfig resolve_config(const CommonArgs& args) {
  PipelineConfig config;
  if (!args.config_file.empty()) config = cellfa::config_from_json_file(args.config_file);
  if (!args.kpi.empty()) config.kpi_csv = args.kpi;
  if (!args.locations.empty()) config.locations_csv = args.locations;
  if (!args.out.empty()) config.out_dir = args.out;
  if (!args.metric.empty()) {
    auto metric = cellfa::parse_metric(args.metric);
    if (!metric) throw cellfa::UsageError("unknown metric: " + args.metric);
    config.metric = *metric;
  }
  if (args.replicates >= 0) config.replicates = args.replicates;
  if (args.quantile >= 0.0) config.quantile = args.quantile;
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (args.kappa >= 0) config.kappa = args.kappa;
  if (args.min_coverage >= 0.0) config.min_coverage = args.min_coverage;
  if (args.extraction_max_iter >= 0) config.extraction_max_iter = args.extraction_max_iter;
  if (args.extraction_tol >= 0.0) config.extraction_tol = args.extraction_tol;
  if (args.max_reject_rate >= 0.0) config.max_reject_rate = args.max_reject_rate;

  if (config.kpi_csv.empty()) throw cellfa::UsageError("--kpi is required");
  if (config.out_dir.empty()) throw cellfa::UsageError("--out is required");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Median-week condensation and exploratory factor analysis over cellular KPI data"};
  app.require_subcommand(1);

  CommonArgs analyze_args;
  CLI::App* analyze = app.add_subcommand("analyze", "run the full pipeline for one metric");
  add_common_flags(analyze, analyze_args, true);

  CommonArgs condense_args;
  CLI::App* condense = app.add_subcommand("condense", "build the median-week matrix only");
  add_common_flags(condense, condense_args, false);

  struct {
    std::string kpi, locations, out;
    double max_reject_rate = 0.01;
  } stats_args;
  CLI::App* stats = app.add_subcommand("stats", "descriptive dataset statistics");
  stats->add_option("--kpi", stats_args.kpi, "KPI CSV export")->required();
  stats->add_option("--locations", stats_args.locations, "site location CSV");
  stats->add_option("--out", stats_args.out, "output directory")->required();
  stats->add_option("--max-reject-rate", stats_args.max_reject_rate,
                    "tolerated malformed-row share");

  struct {
    std::string profiles, out;
    int days = 28;
    std::int64_t seed = 0;
    double noise_floor = 0.0;
  } synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--profiles", synth_args.profiles,
                    "profile JSON config (default: built-in profiles)");
  synth->add_option("--days", synth_args.days, "observation days (default 28)");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--noise-floor", synth_args.noise_floor,
                    "additive measurement floor in GB (default 0)");
  synth->add_option("--out", synth_args.out, "output directory")->required();

  struct {
    std::string model, scores, out;
  } export_args;
  CLI::App* exp = app.add_subcommand("export", "re-emit heatmaps and score map");
  exp->add_option("--model", export_args.model, "model.json from an analyze run")->required();
  exp->add_option("--scores", export_args.scores, "scores.csv from an analyze run")->required();
  exp->add_option("--out", export_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      cellfa::run_analyze(resolve_config(analyze_args));
    } else if (*condense) {
      cellfa::run_condense(resolve_config(condense_args));
    } else if (*stats) {
      cellfa::run_stats(stats_args.kpi, stats_args.locations, stats_args.out,
                        stats_args.max_reject_rate);
    } else if (*synth) {
      cellfa::SynthRunConfig config;
      config.profiles_json = synth_args.profiles;
      config.days = synth_args.days;
      config.seed = static_cast<std::uint64_t>(synth_args.seed);
      config.noise_floor_gb = synth_args.noise_floor;
      config.out_dir = synth_args.out;
      cellfa::run_synth(config);
    } else if (*exp) {
      cellfa::run_export(export_args.model, export_args.scores, export_args.out);
    }
  } catch (const cellfa::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
