#include "cellfa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "cellfa/condense.hpp"
#include "cellfa/errors.hpp"
#include "cellfa/rng.hpp"

namespace cellfa {

namespace {

using nlohmann::json;

void set_window(std::vector<double>& tpl, std::initializer_list<int> days,
                std::initializer_list<int> hours, double level) {
  for (int d : days)
    for (int h : hours) tpl[static_cast<std::size_t>(d * 24 + h)] = level;
}

constexpr std::initializer_list<int> kWeekdays = {0, 1, 2, 3, 4};
constexpr std::initializer_list<int> kWeekend = {5, 6};
constexpr std::initializer_list<int> kAllDays = {0, 1, 2, 3, 4, 5, 6};

void validate_profiles(const std::vector<ProfileSpec>& profiles) {
  if (profiles.empty()) throw InvalidProfileError("no profiles given");
  std::set<std::string> names;
  for (const ProfileSpec& p : profiles) {
    if (p.name.empty()) throw InvalidProfileError("profile with empty name");
    if (!names.insert(p.name).second)
      throw InvalidProfileError("duplicate profile name: " + p.name);
    if (p.template_values.size() != kSlotsPerWeek)
      throw InvalidProfileError("profile '" + p.name + "': template must have 168 values");
    bool any_nonzero = false;
    for (double v : p.template_values) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InvalidProfileError("profile '" + p.name + "': template values must be >= 0");
      if (v > 0.0) any_nonzero = true;
    }
    if (!any_nonzero)
      throw InvalidProfileError("profile '" + p.name + "': template has no nonzero slot");
    if (p.cell_count < 1)
      throw InvalidProfileError("profile '" + p.name + "': cell_count must be >= 1");
    if (!(p.base_volume > 0.0))
      throw InvalidProfileError("profile '" + p.name + "': base_volume must be > 0");
    if (p.noise_sigma < 0.0 || p.amp_sigma < 0.0)
      throw InvalidProfileError("profile '" + p.name + "': noise parameters must be >= 0");
  }
}

}  // namespace

std::vector<ProfileSpec> built_in_profiles() {
  std::vector<ProfileSpec> profiles;

  // Evenings every day plus weekend daytime. Home-time traffic.
  ProfileSpec residential{"residential", std::vector<double>(kSlotsPerWeek, 0.0), 100, 8.0, 0.2,
                          0.6};
  set_window(residential.template_values, kWeekdays, {21, 22, 23}, 1.0);
  set_window(residential.template_values, kWeekend, {10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20,
                                                     21, 22, 23}, 1.0);
  profiles.push_back(std::move(residential));

  // Working hours 8am-5pm, weekdays only.
  ProfileSpec business{"business", std::vector<double>(kSlotsPerWeek, 0.0), 100, 10.0, 0.2, 0.6};
  set_window(business.template_values, kWeekdays, {8, 9, 10, 11, 12, 13, 14, 15, 16, 17}, 1.0);
  profiles.push_back(std::move(business));

  // Rush between 7am and 9am, peaking before work starts.
  ProfileSpec morning{"morning_commute", std::vector<double>(kSlotsPerWeek, 0.0), 100, 9.0, 0.2,
                      0.6};
  set_window(morning.template_values, kWeekdays, {7}, 1.0);
  set_window(morning.template_values, kWeekdays, {8}, 0.35);
  set_window(morning.template_values, kWeekdays, {9}, 0.2);
  profiles.push_back(std::move(morning));

  // After-work travel between 5pm and 8pm with a tail past it.
  ProfileSpec evening{"evening_commute", std::vector<double>(kSlotsPerWeek, 0.0), 100, 9.0, 0.2,
                      0.6};
  set_window(evening.template_values, kWeekdays, {17}, 0.3);
  set_window(evening.template_values, kWeekdays, {18, 19}, 1.0);
  set_window(evening.template_values, kWeekdays, {20}, 0.7);
  profiles.push_back(std::move(evening));

  // Night activity between 2am and 4am, every day.
  ProfileSpec nightlife{"nightlife", std::vector<double>(kSlotsPerWeek, 0.0), 100, 5.0, 0.2, 0.6};
  set_window(nightlife.template_values, kAllDays, {2, 3, 4}, 1.0);
  profiles.push_back(std::move(nightlife));

  return profiles;
}

SynthResult generate(const std::vector<ProfileSpec>& profiles, int days, std::uint64_t seed,
                     const SynthOptions& options) {
  validate_profiles(profiles);
  if (days < 7) throw UsageError("generate requires days >= 7");
  if (options.noise_floor_gb < 0.0) throw UsageError("noise_floor_gb must be >= 0");
  if (!valid_date(options.start_date)) throw UsageError("invalid synth start date");

  SynthResult result;
  result.truth.profiles = profiles;
  result.truth.seed = seed;

  std::size_t total_cells = 0;
  for (const ProfileSpec& p : profiles) total_cells += static_cast<std::size_t>(p.cell_count);

  std::vector<KpiRecord> records;
  records.reserve(total_cells * static_cast<std::size_t>(days) * 24);
  std::map<std::string, SiteLocation> locations;

  const double floor = options.noise_floor_gb;
  std::uint64_t cell_index = 0;
  for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
    const ProfileSpec& profile = profiles[pi];
    double angle =
        2.0 * std::numbers::pi * static_cast<double>(pi) / static_cast<double>(profiles.size());
    double center_lat = 41.0 + 0.06 * std::cos(angle);
    double center_lon = 29.0 + 0.09 * std::sin(angle);

    for (int c = 0; c < profile.cell_count; ++c, ++cell_index) {
      char id[16];
      std::snprintf(id, sizeof(id), "%05llu", static_cast<unsigned long long>(cell_index + 1));
      std::string site_id = "ST" + std::string(id);
      std::string cell_id = "CL" + std::string(id);

      RngStream rng(seed, cell_index);
      SiteLocation loc;
      loc.site_id = site_id;
      loc.latitude = center_lat + 0.02 * (rng.uniform01() - 0.5);
      loc.longitude = center_lon + 0.03 * (rng.uniform01() - 0.5);
      locations.emplace(site_id, loc);

      double amplitude =
          profile.amp_sigma > 0.0 ? std::max(0.05, 1.0 + profile.amp_sigma * rng.normal()) : 1.0;
      result.truth.assignment.emplace(cell_id, profile.name);
      result.truth.amplitudes.emplace(cell_id, amplitude);

      for (int day = 0; day < days; ++day) {
        CivilDate date = add_days(options.start_date, day);
        int dow = day_of_week(date);
        for (int hour = 0; hour < 24; ++hour) {
          double tpl = profile.template_values[static_cast<std::size_t>(dow * 24 + hour)];
          double mean = profile.base_volume * amplitude * tpl;
          auto draw = [&](double scale) {
            double eps = profile.noise_sigma * rng.normal();
            double eta = rng.normal();
            return std::max(0.0, scale * mean * (1.0 + eps)) + floor * std::abs(eta);
          };
          KpiRecord r;
          r.date = date;
          r.hour = hour;
          r.region = "TR-34";
          r.city = "Istanbul";
          r.district = profile.name;
          r.site_id = site_id;
          r.cell_id = cell_id;
          r.dl_gb = draw(1.0);
          r.ul_gb = draw(0.1);
          r.active_users = draw(3.0);
          records.push_back(std::move(r));
        }
      }
    }
  }

  result.dataset = CellDataset(std::move(records), std::move(locations));
  return result;
}

double tucker_congruence(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw DataError("tucker_congruence: length mismatch");
  double xx = x.squaredNorm();
  double yy = y.squaredNorm();
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return x.dot(y) / std::sqrt(xx * yy);
}

std::vector<CongruenceMatch> match_congruence(const Eigen::MatrixXd& recovered,
                                              const Eigen::MatrixXd& planted) {
  if (recovered.rows() != planted.rows())
    throw DataError("match_congruence: variable counts differ");

  const Eigen::Index nr = recovered.cols();
  const Eigen::Index np = planted.cols();
  Eigen::MatrixXd c(nr, np);
  for (Eigen::Index i = 0; i < nr; ++i)
    for (Eigen::Index j = 0; j < np; ++j)
      c(i, j) = tucker_congruence(recovered.col(i), planted.col(j));

  std::vector<bool> used_r(static_cast<std::size_t>(nr), false);
  std::vector<bool> used_p(static_cast<std::size_t>(np), false);
  std::vector<CongruenceMatch> matches;
  Eigen::Index pairs = std::min(nr, np);
  for (Eigen::Index step = 0; step < pairs; ++step) {
    double best = -1.0;
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < nr; ++i) {
      if (used_r[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = 0; j < np; ++j) {
        if (used_p[static_cast<std::size_t>(j)]) continue;
        if (std::abs(c(i, j)) > best) {
          best = std::abs(c(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    used_r[static_cast<std::size_t>(bi)] = true;
    used_p[static_cast<std::size_t>(bj)] = true;
    matches.push_back({static_cast<int>(bi), static_cast<int>(bj), c(bi, bj)});
  }
  return matches;
}

namespace {

std::vector<int> parse_day_set(const std::string& text) {
  static const std::map<std::string, int> names = {{"mon", 0}, {"tue", 1}, {"wed", 2},
                                                   {"thu", 3}, {"fri", 4}, {"sat", 5},
                                                   {"sun", 6}};
  if (text == "all") return {0, 1, 2, 3, 4, 5, 6};
  std::vector<int> days;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string part = text.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t dash = part.find('-');
    if (dash != std::string::npos) {
      auto a = names.find(part.substr(0, dash));
      auto b = names.find(part.substr(dash + 1));
      if (a == names.end() || b == names.end() || a->second > b->second)
        throw InvalidProfileError("bad day range: " + part);
      for (int d = a->second; d <= b->second; ++d) days.push_back(d);
    } else {
      auto a = names.find(part);
      if (a == names.end()) throw InvalidProfileError("bad day name: " + part);
      days.push_back(a->second);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return days;
}

std::vector<int> parse_hour_set(const std::string& text) {
  std::vector<int> hours;
  std::size_t start = 0;
  auto to_hour = [](const std::string& s) {
    int h = -1;
    try {
      h = std::stoi(s);
    } catch (...) {
      throw InvalidProfileError("bad hour: " + s);
    }
    if (h < 0 || h > 23) throw InvalidProfileError("hour out of range: " + s);
    return h;
  };
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string part = text.substr(start, comma == std::string::npos ? comma : comma - start);
    std::size_t dash = part.find('-');
    if (dash != std::string::npos) {
      int a = to_hour(part.substr(0, dash));
      int b = to_hour(part.substr(dash + 1));
      if (a > b) throw InvalidProfileError("bad hour range: " + part);
      for (int h = a; h <= b; ++h) hours.push_back(h);
    } else {
      hours.push_back(to_hour(part));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return hours;
}

}  // namespace

std::vector<ProfileSpec> load_profiles_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile config: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidProfileError("profile config is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.contains("profiles") || !doc["profiles"].is_array())
    throw InvalidProfileError("profile config must contain a 'profiles' array");

  std::vector<ProfileSpec> profiles;
  for (const json& entry : doc["profiles"]) {
    ProfileSpec p;
    p.name = entry.value("name", "");
    p.cell_count = entry.value("cells", 0);
    p.base_volume = entry.value("base_volume", 1.0);
    p.noise_sigma = entry.value("noise_sigma", 0.0);
    p.amp_sigma = entry.value("amp_sigma", 0.0);
    p.template_values.assign(kSlotsPerWeek, 0.0);
    if (entry.contains("template")) {
      const json& tpl = entry["template"];
      if (!tpl.is_array() || tpl.size() != kSlotsPerWeek)
        throw InvalidProfileError("profile '" + p.name + "': template must have 168 values");
      for (std::size_t i = 0; i < kSlotsPerWeek; ++i)
        p.template_values[i] = tpl[i].get<double>();
    } else if (entry.contains("windows")) {
      for (const json& w : entry["windows"]) {
        std::vector<int> days = parse_day_set(w.value("days", "all"));
        std::vector<int> hours = parse_hour_set(w.value("hours", ""));
        double level = w.value("level", 1.0);
        for (int d : days)
          for (int h : hours) p.template_values[static_cast<std::size_t>(d * 24 + h)] = level;
      }
    } else {
      throw InvalidProfileError("profile '" + p.name + "': needs 'template' or 'windows'");
    }
    profiles.push_back(std::move(p));
  }
  validate_profiles(profiles);
  return profiles;
}

void write_ground_truth_json(const std::filesystem::path& path,
                             const SyntheticGroundTruth& truth) {
  json doc;
  doc["seed"] = truth.seed;
  json profiles = json::array();
  for (const ProfileSpec& p : truth.profiles) {
    json entry;
    entry["name"] = p.name;
    entry["cells"] = p.cell_count;
    entry["base_volume"] = p.base_volume;
    entry["noise_sigma"] = p.noise_sigma;
    entry["amp_sigma"] = p.amp_sigma;
    entry["template"] = p.template_values;
    profiles.push_back(std::move(entry));
  }
  doc["profiles"] = std::move(profiles);
  doc["assignment"] = truth.assignment;
  doc["amplitudes"] = truth.amplitudes;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

SyntheticGroundTruth read_ground_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("ground truth is not valid JSON: " + std::string(e.what()));
  }
  SyntheticGroundTruth truth;
  truth.seed = doc.value("seed", 0ULL);
  for (const json& entry : doc["profiles"]) {
    ProfileSpec p;
    p.name = entry.value("name", "");
    p.cell_count = entry.value("cells", 0);
    p.base_volume = entry.value("base_volume", 1.0);
    p.noise_sigma = entry.value("noise_sigma", 0.0);
    p.amp_sigma = entry.value("amp_sigma", 0.0);
    p.template_values = entry["template"].get<std::vector<double>>();
    truth.profiles.push_back(std::move(p));
  }
  truth.assignment = doc.value("assignment", std::map<std::string, std::string>{});
  truth.amplitudes = doc.value("amplitudes", std::map<std::string, double>{});
  return truth;
}

}  // namespace cellfa
