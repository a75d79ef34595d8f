#include "cellfa/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "cellfa/csv.hpp"
#include "cellfa/errors.hpp"

namespace cellfa {

CellDataset::CellDataset(std::vector<KpiRecord> records,
                         std::map<std::string, SiteLocation> locations)
    : records_(std::move(records)), locations_(std::move(locations)) {
  if (records_.empty()) return;
  start_ = end_ = records_.front().date;
  for (const KpiRecord& r : records_) {
    if (r.date < start_) start_ = r.date;
    if (end_ < r.date) end_ = r.date;
  }
}

int CellDataset::window_days() const {
  if (records_.empty()) return 0;
  return static_cast<int>(day_number(end_) - day_number(start_)) + 1;
}

namespace {

constexpr std::size_t kMaxSampleErrors = 10;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  return out;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

}  // namespace

ParseResult parse_kpi_csv(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in = open_input(path);
  CsvReader reader(in);

  std::vector<std::string> row;
  if (!reader.next_row(row) || (row.size() == 1 && row[0].empty()))
    throw EmptyFileError("empty KPI file: " + path.string());

  const KpiSchema& s = options.schema;
  struct Col {
    const std::string* name;
    int index;
  };
  Col cols[] = {{&s.date, 0},    {&s.hour, 0},    {&s.region, 0},  {&s.city, 0},
                {&s.district, 0}, {&s.site_id, 0}, {&s.cell_id, 0}, {&s.dl_gb, 0},
                {&s.ul_gb, 0},    {&s.active_users, 0}};
  for (Col& c : cols) {
    c.index = find_column(row, *c.name);
    if (c.index < 0)
      throw MissingColumnError("missing column '" + *c.name + "' in " + path.string());
  }
  const int c_date = cols[0].index, c_hour = cols[1].index, c_region = cols[2].index,
            c_city = cols[3].index, c_district = cols[4].index, c_site = cols[5].index,
            c_cell = cols[6].index, c_dl = cols[7].index, c_ul = cols[8].index,
            c_users = cols[9].index;
  const std::size_t min_fields = static_cast<std::size_t>(
      1 + std::max({c_date, c_hour, c_region, c_city, c_district, c_site, c_cell, c_dl, c_ul,
                    c_users}));

  ParseResult result;
  ParseStats& stats = result.stats;
  std::vector<KpiRecord> records;

  auto reject = [&](const char* why) {
    ++stats.rejected;
    if (stats.sample_errors.size() < kMaxSampleErrors)
      stats.sample_errors.push_back("row " + std::to_string(reader.row_number()) + ": " + why);
  };

  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    ++stats.data_rows;
    if (row.size() < min_fields) {
      reject("too few fields");
      continue;
    }
    KpiRecord r;
    auto date = parse_date(row[static_cast<std::size_t>(c_date)]);
    if (!date) {
      reject("bad date");
      continue;
    }
    r.date = *date;
    if (!parse_int_field(row[static_cast<std::size_t>(c_hour)], r.hour) || r.hour < 0 ||
        r.hour > 23) {
      reject("hour out of range");
      continue;
    }
    if (!parse_double_field(row[static_cast<std::size_t>(c_dl)], r.dl_gb) ||
        !parse_double_field(row[static_cast<std::size_t>(c_ul)], r.ul_gb) ||
        !parse_double_field(row[static_cast<std::size_t>(c_users)], r.active_users)) {
      reject("unparseable numeric value");
      continue;
    }
    if (!(r.dl_gb >= 0.0) || !(r.ul_gb >= 0.0) || !(r.active_users >= 0.0) ||
        !std::isfinite(r.dl_gb) || !std::isfinite(r.ul_gb) || !std::isfinite(r.active_users)) {
      reject("negative or non-finite measurement");
      continue;
    }
    r.site_id = row[static_cast<std::size_t>(c_site)];
    r.cell_id = row[static_cast<std::size_t>(c_cell)];
    if (r.site_id.empty() || r.cell_id.empty()) {
      reject("empty site_id or cell_id");
      continue;
    }
    r.region = row[static_cast<std::size_t>(c_region)];
    r.city = row[static_cast<std::size_t>(c_city)];
    r.district = row[static_cast<std::size_t>(c_district)];
    records.push_back(std::move(r));
    ++stats.accepted;
  }

  if (stats.data_rows > 0 &&
      static_cast<double>(stats.rejected) >
          options.max_reject_rate * static_cast<double>(stats.data_rows)) {
    std::string detail = stats.sample_errors.empty() ? "" : " (" + stats.sample_errors[0] + ")";
    throw RejectRateError("malformed-row rate " + std::to_string(stats.rejected) + "/" +
                              std::to_string(stats.data_rows) + " exceeds threshold in " +
                              path.string() + detail,
                          stats.rejected, stats.data_rows);
  }

  result.dataset = CellDataset(std::move(records), {});
  return result;
}

void write_kpi_csv(const std::filesystem::path& path, const std::vector<KpiRecord>& records) {
  std::ofstream out = open_output(path);
  write_csv_row(out, {"date", "hour", "region", "city", "district", "site_id", "cell_id", "dl_gb",
                      "ul_gb", "active_users"});
  std::vector<std::string> row(10);
  for (const KpiRecord& r : records) {
    row[0] = format_date(r.date);
    row[1] = std::to_string(r.hour);
    row[2] = r.region;
    row[3] = r.city;
    row[4] = r.district;
    row[5] = r.site_id;
    row[6] = r.cell_id;
    row[7] = format_double(r.dl_gb);
    row[8] = format_double(r.ul_gb);
    row[9] = format_double(r.active_users);
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::map<std::string, SiteLocation> parse_locations_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  CsvReader reader(in);
  std::vector<std::string> row;
  if (!reader.next_row(row) || (row.size() == 1 && row[0].empty()))
    throw EmptyFileError("empty locations file: " + path.string());
  int c_site = find_column(row, "site_id");
  int c_lat = find_column(row, "lat");
  int c_lon = find_column(row, "lon");
  if (c_site < 0 || c_lat < 0 || c_lon < 0)
    throw MissingColumnError("locations file must have columns site_id,lat,lon: " +
                             path.string());

  std::map<std::string, SiteLocation> locations;
  while (reader.next_row(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    std::size_t need = static_cast<std::size_t>(std::max({c_site, c_lat, c_lon})) + 1;
    if (row.size() < need)
      throw DataError("locations row " + std::to_string(reader.row_number()) +
                      ": too few fields");
    SiteLocation loc;
    loc.site_id = row[static_cast<std::size_t>(c_site)];
    if (loc.site_id.empty() ||
        !parse_double_field(row[static_cast<std::size_t>(c_lat)], loc.latitude) ||
        !parse_double_field(row[static_cast<std::size_t>(c_lon)], loc.longitude))
      throw DataError("locations row " + std::to_string(reader.row_number()) + ": malformed");
    if (loc.latitude < -90.0 || loc.latitude > 90.0 || loc.longitude < -180.0 ||
        loc.longitude > 180.0)
      throw DataError("locations row " + std::to_string(reader.row_number()) +
                      ": coordinates out of range");
    auto [it, inserted] = locations.emplace(loc.site_id, loc);
    if (!inserted && it->second != loc)
      throw DuplicateSiteIdError("conflicting coordinates for site_id '" + loc.site_id + "'");
  }
  return locations;
}

void write_locations_csv(const std::filesystem::path& path,
                         const std::map<std::string, SiteLocation>& locations) {
  std::ofstream out = open_output(path);
  write_csv_row(out, {"site_id", "lat", "lon"});
  std::vector<std::string> row(3);
  for (const auto& [site_id, loc] : locations) {
    row[0] = site_id;
    row[1] = format_double(loc.latitude);
    row[2] = format_double(loc.longitude);
    write_csv_row(out, row);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

JoinResult join_locations(const CellDataset& dataset,
                          const std::map<std::string, SiteLocation>& locations) {
  std::map<std::string, std::size_t> unlocated;
  for (const KpiRecord& r : dataset.records())
    if (!locations.contains(r.site_id)) ++unlocated[r.site_id];

  JoinResult result;
  result.dataset = CellDataset(dataset.records(), locations);
  result.unlocated.reserve(unlocated.size());
  for (const auto& [site, count] : unlocated) result.unlocated.push_back({site, count});
  return result;
}

DistrictSummary district_summary(const CellDataset& dataset, const std::string& district) {
  DistrictSummary sum;
  for (const KpiRecord& r : dataset.records()) {
    if (r.district != district) continue;
    sum.dl_gb_sum += r.dl_gb;
    sum.ul_gb_sum += r.ul_gb;
    sum.active_users_mean += r.active_users;
    ++sum.record_count;
  }
  if (sum.record_count == 0) throw UnknownDistrictError("unknown district: " + district);
  sum.active_users_mean /= static_cast<double>(sum.record_count);
  return sum;
}

std::vector<std::pair<std::string, DistrictSummary>> summarize_districts(
    const CellDataset& dataset) {
  std::map<std::string, DistrictSummary> by_district;
  for (const KpiRecord& r : dataset.records()) {
    DistrictSummary& sum = by_district[r.district];
    sum.dl_gb_sum += r.dl_gb;
    sum.ul_gb_sum += r.ul_gb;
    sum.active_users_mean += r.active_users;
    ++sum.record_count;
  }
  std::vector<std::pair<std::string, DistrictSummary>> out;
  out.reserve(by_district.size());
  for (auto& [name, sum] : by_district) {
    sum.active_users_mean /= static_cast<double>(sum.record_count);
    out.emplace_back(name, sum);
  }
  return out;
}

DatasetStats dataset_stats(const CellDataset& dataset) {
  if (dataset.empty()) throw EmptyDatasetError("dataset has no records");
  DatasetStats stats;
  stats.row_count = dataset.records().size();
  stats.duration_days = dataset.window_days();
  std::set<std::string> districts;
  double dl = 0, ul = 0, users = 0;
  for (const KpiRecord& r : dataset.records()) {
    districts.insert(r.district);
    dl += r.dl_gb;
    ul += r.ul_gb;
    users += r.active_users;
  }
  stats.district_count = districts.size();
  stats.dl_gb_per_day = dl / stats.duration_days;
  stats.ul_gb_per_day = ul / stats.duration_days;
  stats.active_users_mean = users / static_cast<double>(stats.row_count);
  return stats;
}

}  // namespace cellfa
