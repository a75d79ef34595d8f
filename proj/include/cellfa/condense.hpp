#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cellfa/ingest.hpp"

namespace cellfa {

inline constexpr int kSlotsPerWeek = 168;  // 7 days x 24 hours

// day_of_week: 0 = Monday .. 6 = Sunday; flat index = day*24 + hour.
int slot_index(int day_of_week, int hour);

struct SlotId {
  int day = 0;
  int hour = 0;
};

SlotId slot_from_index(int flat);

enum class Metric { DL, UL, USERS };

std::string metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
};

// Per-cell median-week signatures: one row per retained cell, one column per
// (day, hour) slot. This is the observation matrix the factor analysis runs on.
struct MedianWeekMatrix {
  Metric metric = Metric::DL;
  std::vector<std::string> cell_ids;                 // row order, sorted ascending
  Eigen::MatrixXd values;                            // cells x 168, non-negative
  std::vector<std::optional<GeoPoint>> coordinates;  // per row; empty when site unlocated
};

struct CondensePolicy {
  // Fraction of the 168 slots a cell must cover to be retained. With 1.0 every
  // slot needs at least one observation; below 1.0, missing slots are imputed
  // by the cell's same-hour median over all days.
  double min_coverage = 1.0;
};

struct DroppedCell {
  std::string cell_id;
  int covered_slots = 0;
  std::string reason;
};

struct CondenseResult {
  MedianWeekMatrix matrix;
  std::vector<DroppedCell> dropped;
  std::size_t imputed_slots = 0;
};

CondenseResult build_median_week(const CellDataset& dataset, Metric metric,
                                 const CondensePolicy& policy = {});

struct CellCoverage {
  std::string cell_id;
  int covered_slots = 0;  // of 168
};

std::vector<CellCoverage> completeness_report(const CellDataset& dataset, Metric metric);

// CSV persistence: header `cell_id,d0h0..d6h23`; values are shortest
// round-trip decimals, so read-back is bit-exact.
void write_median_week_csv(const std::filesystem::path& path, const MedianWeekMatrix& matrix);
MedianWeekMatrix read_median_week_csv(const std::filesystem::path& path, Metric metric);

// Companion coordinate table for the retained cells (located cells only).
void write_coordinates_csv(const std::filesystem::path& path, const MedianWeekMatrix& matrix);

}  // namespace cellfa
