#include "cellfa/scoring.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "cellfa/csv.hpp"
#include "cellfa/errors.hpp"

namespace cellfa {

ScoreTable regression_scores(const Eigen::MatrixXd& z, const Eigen::MatrixXd& correlation,
                             const FactorModel& model, std::vector<std::string> cell_ids,
                             std::vector<std::optional<GeoPoint>> coordinates) {
  if (z.cols() != correlation.rows() || correlation.rows() != model.pattern.rows())
    throw DataError("regression_scores: dimension mismatch between Z, R and model");
  if (static_cast<Eigen::Index>(cell_ids.size()) != z.rows())
    throw DataError("regression_scores: cell_id count does not match Z rows");

  ScoreTable table;
  table.cell_ids = std::move(cell_ids);
  table.coordinates = std::move(coordinates);
  if (table.coordinates.empty()) table.coordinates.assign(table.cell_ids.size(), std::nullopt);

  Eigen::MatrixXd structure = model.structure();
  Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  Eigen::MatrixXd weights;
  if (llt.info() == Eigen::Success) {
    weights = llt.solve(structure);
  } else {
    table.ridge_applied = true;
    Eigen::MatrixXd ridged = correlation;
    ridged.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> ridge_llt(ridged);
    if (ridge_llt.info() != Eigen::Success)
      throw NumericError("correlation matrix singular even after ridge");
    weights = ridge_llt.solve(structure);
  }
  table.scores = z * weights;

  table.factor_labels.reserve(static_cast<std::size_t>(model.k));
  for (int f = 1; f <= model.k; ++f) table.factor_labels.push_back("f" + std::to_string(f));
  return table;
}

std::vector<std::string> top_cells(const ScoreTable& table, int factor, int n) {
  if (factor < 0 || factor >= table.scores.cols())
    throw OutOfRangeError("factor index out of range: " + std::to_string(factor));
  if (n < 1) throw UsageError("top_cells requires n >= 1");

  std::vector<std::size_t> order(table.cell_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double sa = table.scores(static_cast<Eigen::Index>(a), factor);
    double sb = table.scores(static_cast<Eigen::Index>(b), factor);
    if (sa != sb) return sa > sb;
    return table.cell_ids[a] < table.cell_ids[b];
  });

  std::size_t take = std::min(static_cast<std::size_t>(n), order.size());
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(table.cell_ids[order[i]]);
  return out;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  std::vector<std::string> row;
  row.reserve(3 + table.factor_labels.size());
  row.push_back("cell_id");
  row.push_back("lat");
  row.push_back("lon");
  for (const std::string& label : table.factor_labels) row.push_back(label);
  write_csv_row(out, row);

  for (std::size_t i = 0; i < table.cell_ids.size(); ++i) {
    row.clear();
    row.push_back(table.cell_ids[i]);
    if (table.coordinates[i]) {
      row.push_back(format_double(table.coordinates[i]->latitude));
      row.push_back(format_double(table.coordinates[i]->longitude));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
    for (Eigen::Index f = 0; f < table.scores.cols(); ++f)
      row.push_back(format_double(table.scores(static_cast<Eigen::Index>(i), f)));
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

ScoreTable read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || row.size() < 4 || row[0] != "cell_id" || row[1] != "lat" ||
      row[2] != "lon")
    throw DataError("unexpected scores header in " + path.string());

  ScoreTable table;
  for (std::size_t f = 3; f < row.size(); ++f) table.factor_labels.push_back(row[f]);
  const std::size_t k = table.factor_labels.size();

  std::vector<Eigen::RowVectorXd> rows;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 3 + k)
      throw DataError("scores row " + std::to_string(reader.row_number()) +
                      ": wrong field count");
    table.cell_ids.push_back(row[0]);
    if (row[1].empty() || row[2].empty()) {
      table.coordinates.push_back(std::nullopt);
    } else {
      GeoPoint p;
      if (!parse_double_field(row[1], p.latitude) || !parse_double_field(row[2], p.longitude))
        throw DataError("scores row " + std::to_string(reader.row_number()) +
                        ": bad coordinates");
      table.coordinates.push_back(p);
    }
    Eigen::RowVectorXd s(static_cast<Eigen::Index>(k));
    for (std::size_t f = 0; f < k; ++f) {
      double v;
      if (!parse_double_field(row[3 + f], v))
        throw DataError("scores row " + std::to_string(reader.row_number()) + ": bad score");
      s[static_cast<Eigen::Index>(f)] = v;
    }
    rows.push_back(std::move(s));
  }
  table.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows.size(); ++i)
    table.scores.row(static_cast<Eigen::Index>(i)) = rows[i];
  return table;
}

}  // namespace cellfa
