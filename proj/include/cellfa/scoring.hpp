#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cellfa/condense.hpp"
#include "cellfa/efa.hpp"

namespace cellfa {

// Per-cell factor scores; one row per cell, one column per factor.
struct ScoreTable {
  std::vector<std::string> cell_ids;
  Eigen::MatrixXd scores;                            // cells x K
  std::vector<std::string> factor_labels;            // "f1".."fK"
  std::vector<std::optional<GeoPoint>> coordinates;  // per row
  bool ridge_applied = false;  // correlation was singular; R + eps*I was used
};

// Thurstone regression scores: W = R^-1 * (pattern * phi), scores = Z * W.
// A non-positive-definite R falls back to a ridge (R + 1e-8 I) and flags it.
ScoreTable regression_scores(const Eigen::MatrixXd& z, const Eigen::MatrixXd& correlation,
                             const FactorModel& model, std::vector<std::string> cell_ids,
                             std::vector<std::optional<GeoPoint>> coordinates);

// The n highest-scoring cells for one factor (0-based index), descending;
// ties broken by cell_id ascending. Returns fewer when the table is smaller.
std::vector<std::string> top_cells(const ScoreTable& table, int factor, int n);

// CSV: cell_id,lat,lon,f1,...,fK (lat/lon empty when unlocated).
void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table);
ScoreTable read_scores_csv(const std::filesystem::path& path);

}  // namespace cellfa
