#include "cellfa/condense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "cellfa/csv.hpp"
#include "cellfa/errors.hpp"

namespace cellfa {

int slot_index(int day_of_week, int hour) {
  if (day_of_week < 0 || day_of_week > 6)
    throw OutOfRangeError("day_of_week out of range: " + std::to_string(day_of_week));
  if (hour < 0 || hour > 23) throw OutOfRangeError("hour out of range: " + std::to_string(hour));
  return day_of_week * 24 + hour;
}

SlotId slot_from_index(int flat) {
  if (flat < 0 || flat >= kSlotsPerWeek)
    throw OutOfRangeError("slot index out of range: " + std::to_string(flat));
  return SlotId{flat / 24, flat % 24};
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::DL: return "DL";
    case Metric::UL: return "UL";
    case Metric::USERS: return "USERS";
  }
  return "DL";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "DL" || name == "dl") return Metric::DL;
  if (name == "UL" || name == "ul") return Metric::UL;
  if (name == "USERS" || name == "users") return Metric::USERS;
  return std::nullopt;
}

namespace {

double metric_value(const KpiRecord& r, Metric m) {
  switch (m) {
    case Metric::DL: return r.dl_gb;
    case Metric::UL: return r.ul_gb;
    case Metric::USERS: return r.active_users;
  }
  return r.dl_gb;
}

// Even-count convention: arithmetic mean of the two middle values.
double median_of_sorted(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

struct CellBuckets {
  std::vector<std::vector<double>> slots{kSlotsPerWeek};
  std::string site_id;
};

std::map<std::string, CellBuckets> bucketize(const CellDataset& dataset, Metric metric) {
  std::map<std::string, CellBuckets> cells;
  for (const KpiRecord& r : dataset.records()) {
    int slot = slot_index(day_of_week(r.date), r.hour);
    CellBuckets& cb = cells[r.cell_id];
    cb.slots[static_cast<std::size_t>(slot)].push_back(metric_value(r, metric));
    cb.site_id = r.site_id;
  }
  return cells;
}

}  // namespace

CondenseResult build_median_week(const CellDataset& dataset, Metric metric,
                                 const CondensePolicy& policy) {
  if (dataset.empty()) throw EmptyDatasetError("cannot condense an empty dataset");
  if (policy.min_coverage <= 0.0 || policy.min_coverage > 1.0)
    throw UsageError("min_coverage must be in (0, 1]");

  std::map<std::string, CellBuckets> cells = bucketize(dataset, metric);

  CondenseResult result;
  std::vector<std::pair<std::string, Eigen::RowVectorXd>> rows;
  for (auto& [cell_id, cb] : cells) {
    int covered = 0;
    for (const auto& bucket : cb.slots)
      if (!bucket.empty()) ++covered;
    if (static_cast<double>(covered) < policy.min_coverage * kSlotsPerWeek) {
      result.dropped.push_back({cell_id, covered, "coverage below threshold"});
      continue;
    }

    // Hour-of-day medians over all days, used to impute missing slots.
    std::vector<std::vector<double>> by_hour(24);
    if (covered < kSlotsPerWeek) {
      for (int s = 0; s < kSlotsPerWeek; ++s)
        for (double v : cb.slots[static_cast<std::size_t>(s)])
          by_hour[static_cast<std::size_t>(s % 24)].push_back(v);
      for (auto& h : by_hour) std::sort(h.begin(), h.end());
    }

    Eigen::RowVectorXd row(kSlotsPerWeek);
    bool imputable = true;
    std::size_t imputed_here = 0;
    for (int s = 0; s < kSlotsPerWeek; ++s) {
      auto& bucket = cb.slots[static_cast<std::size_t>(s)];
      if (!bucket.empty()) {
        std::sort(bucket.begin(), bucket.end());
        row[s] = median_of_sorted(bucket);
      } else {
        const auto& h = by_hour[static_cast<std::size_t>(s % 24)];
        if (h.empty()) {
          imputable = false;
          break;
        }
        row[s] = median_of_sorted(h);
        ++imputed_here;
      }
    }
    if (!imputable) {
      result.dropped.push_back({cell_id, covered, "hour never observed; cannot impute"});
      continue;
    }
    result.imputed_slots += imputed_here;
    rows.emplace_back(cell_id, std::move(row));
  }

  if (rows.empty()) throw NoEligibleCellsError("no cell passed the completeness policy");

  MedianWeekMatrix& m = result.matrix;
  m.metric = metric;
  m.cell_ids.reserve(rows.size());
  m.values.resize(static_cast<Eigen::Index>(rows.size()), kSlotsPerWeek);
  m.coordinates.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.cell_ids.push_back(rows[i].first);
    m.values.row(static_cast<Eigen::Index>(i)) = rows[i].second;
    const std::string& site = cells[rows[i].first].site_id;
    auto it = dataset.locations().find(site);
    if (it != dataset.locations().end())
      m.coordinates.push_back(GeoPoint{it->second.latitude, it->second.longitude});
    else
      m.coordinates.push_back(std::nullopt);
  }
  return result;
}

std::vector<CellCoverage> completeness_report(const CellDataset& dataset, Metric metric) {
  std::vector<CellCoverage> report;
  for (const auto& [cell_id, cb] : bucketize(dataset, metric)) {
    int covered = 0;
    for (const auto& bucket : cb.slots)
      if (!bucket.empty()) ++covered;
    report.push_back({cell_id, covered});
  }
  return report;
}

namespace {

std::string slot_column_name(int s) {
  return "d" + std::to_string(s / 24) + "h" + std::to_string(s % 24);
}

}  // namespace

void write_median_week_csv(const std::filesystem::path& path, const MedianWeekMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  std::vector<std::string> row;
  row.reserve(kSlotsPerWeek + 1);
  row.push_back("cell_id");
  for (int s = 0; s < kSlotsPerWeek; ++s) row.push_back(slot_column_name(s));
  write_csv_row(out, row);
  for (Eigen::Index i = 0; i < matrix.values.rows(); ++i) {
    row.clear();
    row.push_back(matrix.cell_ids[static_cast<std::size_t>(i)]);
    for (int s = 0; s < kSlotsPerWeek; ++s) row.push_back(format_double(matrix.values(i, s)));
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MedianWeekMatrix read_median_week_csv(const std::filesystem::path& path, Metric metric) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row)) throw EmptyFileError("empty median-week file: " + path.string());
  if (row.size() != kSlotsPerWeek + 1 || row[0] != "cell_id")
    throw DataError("unexpected median-week header in " + path.string());
  for (int s = 0; s < kSlotsPerWeek; ++s)
    if (row[static_cast<std::size_t>(s + 1)] != slot_column_name(s))
      throw DataError("unexpected slot column order in " + path.string());

  std::vector<std::string> ids;
  std::vector<Eigen::RowVectorXd> values;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != kSlotsPerWeek + 1)
      throw DataError("median-week row " + std::to_string(reader.row_number()) +
                      ": wrong field count");
    Eigen::RowVectorXd v(kSlotsPerWeek);
    for (int s = 0; s < kSlotsPerWeek; ++s) {
      double x;
      if (!parse_double_field(row[static_cast<std::size_t>(s + 1)], x))
        throw DataError("median-week row " + std::to_string(reader.row_number()) +
                        ": bad value");
      v[s] = x;
    }
    ids.push_back(row[0]);
    values.push_back(std::move(v));
  }
  MedianWeekMatrix m;
  m.metric = metric;
  m.cell_ids = std::move(ids);
  m.values.resize(static_cast<Eigen::Index>(values.size()), kSlotsPerWeek);
  for (std::size_t i = 0; i < values.size(); ++i)
    m.values.row(static_cast<Eigen::Index>(i)) = values[i];
  m.coordinates.assign(m.cell_ids.size(), std::nullopt);
  return m;
}

void write_coordinates_csv(const std::filesystem::path& path, const MedianWeekMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  write_csv_row(out, {"cell_id", "lat", "lon"});
  std::vector<std::string> row(3);
  for (std::size_t i = 0; i < matrix.cell_ids.size(); ++i) {
    if (!matrix.coordinates[i]) continue;
    row[0] = matrix.cell_ids[i];
    row[1] = format_double(matrix.coordinates[i]->latitude);
    row[2] = format_double(matrix.coordinates[i]->longitude);
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cellfa
