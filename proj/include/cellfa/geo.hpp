#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellfa/efa.hpp"
#include "cellfa/scoring.hpp"

namespace cellfa {

// One CSV per factor, named factor_<k>_heatmap.csv (1-based), with a `day`
// label column and h0..h23 columns; entry (d, h) = pattern[d*24+h, factor].
std::vector<std::filesystem::path> export_heatmaps(const FactorModel& model,
                                                   const std::filesystem::path& out_dir);

// Reads a heatmap back as the flat 168-vector it encodes.
Eigen::VectorXd read_heatmap_csv(const std::filesystem::path& path);

// GeoJSON FeatureCollection with one Point per cell, coordinates [lon, lat],
// properties: cell_id, one numeric property per factor, and `dominant` =
// 1-based index of the argmax-score factor (ties -> lowest index). Requires
// every cell to carry valid coordinates.
nlohmann::json score_map_document(const ScoreTable& table);

void export_score_map(const ScoreTable& table, const std::filesystem::path& out_path);

}  // namespace cellfa
