#include "cellfa/geo.hpp"

#include <cmath>
#include <fstream>

#include "cellfa/condense.hpp"
#include "cellfa/csv.hpp"
#include "cellfa/errors.hpp"

namespace cellfa {

namespace {

const char* kDayLabels[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

}  // namespace

std::vector<std::filesystem::path> export_heatmaps(const FactorModel& model,
                                                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  std::vector<std::filesystem::path> files;
  for (int f = 0; f < model.k; ++f) {
    std::filesystem::path path =
        out_dir / ("factor_" + std::to_string(f + 1) + "_heatmap.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path.string());

    std::vector<std::string> row;
    row.reserve(25);
    row.push_back("day");
    for (int h = 0; h < 24; ++h) row.push_back("h" + std::to_string(h));
    write_csv_row(out, row);
    for (int d = 0; d < 7; ++d) {
      row.clear();
      row.push_back(kDayLabels[d]);
      for (int h = 0; h < 24; ++h) row.push_back(format_double(model.pattern(d * 24 + h, f)));
      write_csv_row(out, row);
    }
    if (!out) throw IoError("write failed: " + path.string());
    files.push_back(std::move(path));
  }
  return files;
}

Eigen::VectorXd read_heatmap_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.size() != 25 || row[0] != "day")
    throw DataError("unexpected heatmap header in " + path.string());

  Eigen::VectorXd flat(kSlotsPerWeek);
  for (int d = 0; d < 7; ++d) {
    if (!reader.next_row(row) || row.size() != 25 || row[0] != kDayLabels[d])
      throw DataError("unexpected heatmap row for day " + std::to_string(d) + " in " +
                      path.string());
    for (int h = 0; h < 24; ++h) {
      double v;
      if (!parse_double_field(row[static_cast<std::size_t>(h + 1)], v))
        throw DataError("bad heatmap value in " + path.string());
      flat[d * 24 + h] = v;
    }
  }
  return flat;
}

nlohmann::json score_map_document(const ScoreTable& table) {
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
    const auto& coord = table.coordinates[i];
    bool ok = coord.has_value() && std::isfinite(coord->latitude) &&
              std::isfinite(coord->longitude) && coord->latitude >= -90.0 &&
              coord->latitude <= 90.0 && coord->longitude >= -180.0 && coord->longitude <= 180.0;
    if (!ok) missing.push_back(table.cell_ids[i]);
  }
  if (!missing.empty()) {
    std::string msg = "cells without valid coordinates:";
    for (const std::string& id : missing) msg += " " + id;
    throw MissingCoordinatesError(std::move(msg), std::move(missing));
  }

  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
    const GeoPoint& p = *table.coordinates[i];
    nlohmann::json properties;
    properties["cell_id"] = table.cell_ids[i];
    int dominant = 0;
    double best = table.scores(static_cast<Eigen::Index>(i), 0);
    for (Eigen::Index f = 0; f < table.scores.cols(); ++f) {
      double s = table.scores(static_cast<Eigen::Index>(i), f);
      properties[table.factor_labels[static_cast<std::size_t>(f)]] = s;
      if (s > best) {
        best = s;
        dominant = static_cast<int>(f);
      }
    }
    properties["dominant"] = dominant + 1;

    nlohmann::json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Point"},
                           {"coordinates", nlohmann::json::array({p.longitude, p.latitude})}};
    feature["properties"] = std::move(properties);
    features.push_back(std::move(feature));
  }

  nlohmann::json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  return doc;
}

void export_score_map(const ScoreTable& table, const std::filesystem::path& out_path) {
  nlohmann::json doc = score_map_document(table);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + out_path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + out_path.string());
}

}  // namespace cellfa
