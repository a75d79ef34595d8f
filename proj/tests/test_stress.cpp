#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "cellfa/ingest.hpp"
#include "support/helpers.hpp"

// Scale fixture mirroring the published dataset size: 6,264,286 hourly rows
// across 40 districts must parse with zero schema errors.

TEST_CASE("a 6,264,286-row export parses with no schema errors") {
  constexpr std::size_t kTargetRows = 6264286;
  constexpr int kHours = 28 * 24;

  testsupport::TempDir dir("stress");
  {
    std::ofstream out(dir.file("big.csv"), std::ios::binary);
    out << "date,hour,region,city,district,site_id,cell_id,dl_gb,ul_gb,active_users\n";
    char line[160];
    std::size_t written = 0;
    for (std::size_t cell = 0; written < kTargetRows; ++cell) {
      int district = static_cast<int>(cell % 40);
      for (int t = 0; t < kHours && written < kTargetRows; ++t, ++written) {
        int day = t / 24, hour = t % 24;
        cellfa::CivilDate date = cellfa::add_days({2017, 11, 29}, day);
        int n = std::snprintf(line, sizeof(line),
                              "%04d-%02d-%02d,%d,MR,Ist,D%02d,S%06zu,C%06zu,%d.%d,%d.%02d,%d\n",
                              date.year, date.month, date.day, hour, district, cell, cell,
                              hour + 1, static_cast<int>(cell % 10), (hour % 9) + 1,
                              static_cast<int>(cell % 100), (hour * 7) % 300);
        out.write(line, n);
      }
    }
  }

  cellfa::ParseResult r = cellfa::parse_kpi_csv(dir.file("big.csv"));
  CHECK(r.stats.data_rows == kTargetRows);
  CHECK(r.stats.rejected == 0);
  CHECK(r.dataset.records().size() == kTargetRows);

  cellfa::DatasetStats stats = cellfa::dataset_stats(r.dataset);
  CHECK(stats.row_count == kTargetRows);
  CHECK(stats.district_count == 40);
  CHECK(stats.duration_days == 28);
}
