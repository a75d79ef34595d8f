#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cellfa/calendar.hpp"

namespace cellfa {

// One hourly measurement of one cell.
struct KpiRecord {
  CivilDate date;
  int hour = 0;  // 0..23
  std::string region;
  std::string city;
  std::string district;
  std::string site_id;
  std::string cell_id;
  double dl_gb = 0.0;
  double ul_gb = 0.0;
  double active_users = 0.0;  // fractional averages occur in real exports

  bool operator==(const KpiRecord&) const = default;
};

struct SiteLocation {
  std::string site_id;
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]

  bool operator==(const SiteLocation&) const = default;
};

// Immutable after construction; safe to share across threads.
class CellDataset {
 public:
  CellDataset() = default;
  CellDataset(std::vector<KpiRecord> records, std::map<std::string, SiteLocation> locations);

  const std::vector<KpiRecord>& records() const { return records_; }
  const std::map<std::string, SiteLocation>& locations() const { return locations_; }
  bool empty() const { return records_.empty(); }

  // Observation window, derived from the records.
  const CivilDate& window_start() const { return start_; }
  const CivilDate& window_end() const { return end_; }
  int window_days() const;  // calendar days, inclusive

 private:
  std::vector<KpiRecord> records_;
  std::map<std::string, SiteLocation> locations_;
  CivilDate start_;
  CivilDate end_;
};

// Logical field -> CSV column name. Defaults match the documented export schema.
struct KpiSchema {
  std::string date = "date";
  std::string hour = "hour";
  std::string region = "region";
  std::string city = "city";
  std::string district = "district";
  std::string site_id = "site_id";
  std::string cell_id = "cell_id";
  std::string dl_gb = "dl_gb";
  std::string ul_gb = "ul_gb";
  std::string active_users = "active_users";
};

struct ParseOptions {
  KpiSchema schema;
  // Malformed rows are rejected and counted; parsing fails only when their
  // share exceeds this rate.
  double max_reject_rate = 0.01;
};

struct ParseStats {
  std::size_t data_rows = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<std::string> sample_errors;  // first few reject reasons
};

struct ParseResult {
  CellDataset dataset;
  ParseStats stats;
};

ParseResult parse_kpi_csv(const std::filesystem::path& path, const ParseOptions& options = {});

void write_kpi_csv(const std::filesystem::path& path, const std::vector<KpiRecord>& records);

// Location CSV: site_id,lat,lon. Identical duplicate rows collapse; duplicates
// with conflicting coordinates raise DuplicateSiteIdError.
std::map<std::string, SiteLocation> parse_locations_csv(const std::filesystem::path& path);

void write_locations_csv(const std::filesystem::path& path,
                         const std::map<std::string, SiteLocation>& locations);

struct UnlocatedSite {
  std::string site_id;
  std::size_t record_count = 0;
};

struct JoinResult {
  CellDataset dataset;
  std::vector<UnlocatedSite> unlocated;  // sorted by site_id
};

// Attaches the location table; no record is dropped. Idempotent.
JoinResult join_locations(const CellDataset& dataset,
                          const std::map<std::string, SiteLocation>& locations);

struct DistrictSummary {
  double dl_gb_sum = 0.0;
  double ul_gb_sum = 0.0;
  double active_users_mean = 0.0;
  std::size_t record_count = 0;
};

DistrictSummary district_summary(const CellDataset& dataset, const std::string& district);

// All districts, sorted by name.
std::vector<std::pair<std::string, DistrictSummary>> summarize_districts(const CellDataset& dataset);

struct DatasetStats {
  std::size_t row_count = 0;
  std::size_t district_count = 0;
  double dl_gb_per_day = 0.0;
  double ul_gb_per_day = 0.0;
  double active_users_mean = 0.0;
  int duration_days = 0;
};

DatasetStats dataset_stats(const CellDataset& dataset);

}  // namespace cellfa
