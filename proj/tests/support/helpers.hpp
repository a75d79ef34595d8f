#pragma once

// Shared test scaffolding: temp directories, fixture builders, and the
// independent brute-force oracles the acceptance checks compare against.
// Oracles here intentionally avoid the library's own grouping/median code.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cellfa/calendar.hpp"
#include "cellfa/condense.hpp"
#include "cellfa/ingest.hpp"

namespace testsupport {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("cellfa_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline cellfa::KpiRecord make_record(const std::string& cell, cellfa::CivilDate date, int hour,
                                     double dl, double ul = 0.0, double users = 0.0,
                                     const std::string& district = "Center") {
  cellfa::KpiRecord r;
  r.date = date;
  r.hour = hour;
  r.region = "R";
  r.city = "City";
  r.district = district;
  r.site_id = "S-" + cell;
  r.cell_id = cell;
  r.dl_gb = dl;
  r.ul_gb = ul;
  r.active_users = users;
  return r;
}

// ---- independent median-week oracle -------------------------------------
//
// Groups records by (cell, weekday*24+hour) itself, sorts each bucket and
// takes the middle element (or the mean of the two middle ones). Only shares
// the calendar weekday helper with the library.

struct OracleMatrix {
  std::vector<std::string> cell_ids;
  std::vector<std::array<double, 168>> rows;
};

inline double oracle_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline OracleMatrix brute_force_median_week(const std::vector<cellfa::KpiRecord>& records,
                                            cellfa::Metric metric) {
  std::map<std::string, std::map<int, std::vector<double>>> buckets;
  for (const auto& r : records) {
    int slot = cellfa::day_of_week(r.date) * 24 + r.hour;
    double v = metric == cellfa::Metric::DL   ? r.dl_gb
               : metric == cellfa::Metric::UL ? r.ul_gb
                                              : r.active_users;
    buckets[r.cell_id][slot].push_back(v);
  }
  OracleMatrix out;
  for (const auto& [cell, slots] : buckets) {
    std::array<double, 168> row{};
    bool complete = true;
    for (int s = 0; s < 168; ++s) {
      auto it = slots.find(s);
      if (it == slots.end()) {
        complete = false;
        break;
      }
      row[static_cast<std::size_t>(s)] = oracle_median(it->second);
    }
    if (!complete) continue;  // mirrors the default full-coverage policy
    out.cell_ids.push_back(cell);
    out.rows.push_back(row);
  }
  return out;
}

// ---- naive field splitter for oracle re-summations -----------------------
// Deliberately simplistic (no quoting); fixtures that use it stay quote-free.
inline std::vector<std::vector<std::string>> split_csv_naive(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace testsupport
