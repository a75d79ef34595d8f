#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "cellfa/condense.hpp"
#include "cellfa/errors.hpp"
#include "cellfa/pipeline.hpp"
#include "cellfa/rng.hpp"
#include "cellfa/synth.hpp"
#include "support/helpers.hpp"

using namespace cellfa;

TEST_CASE("noise-free single cell reproduces the template exactly") {
  std::vector<double> tpl(kSlotsPerWeek);
  for (int s = 0; s < kSlotsPerWeek; ++s) tpl[static_cast<std::size_t>(s)] = 0.5 + (s % 5);
  std::vector<ProfileSpec> profiles = {{"p", tpl, 1, 3.5, 0.0, 0.0}};
  SynthResult r = generate(profiles, 7, 1);

  CHECK(r.dataset.records().size() == 7 * 24);
  CondenseResult condensed = build_median_week(r.dataset, Metric::DL);
  REQUIRE(condensed.matrix.cell_ids.size() == 1);
  for (int s = 0; s < kSlotsPerWeek; ++s)
    CHECK(condensed.matrix.values(0, s) == 3.5 * tpl[static_cast<std::size_t>(s)]);
}

TEST_CASE("noise-free multi-profile generation reproduces scaled templates") {
  std::vector<double> t1(kSlotsPerWeek, 1.0);
  std::vector<double> t2(kSlotsPerWeek, 0.0);
  for (int s = 0; s < kSlotsPerWeek; s += 2) t2[static_cast<std::size_t>(s)] = 2.0;
  std::vector<ProfileSpec> profiles = {{"a", t1, 3, 4.0, 0.0, 0.0}, {"b", t2, 2, 1.5, 0.0, 0.0}};
  SynthResult r = generate(profiles, 14, 5);

  CondenseResult condensed = build_median_week(r.dataset, Metric::DL);
  REQUIRE(condensed.matrix.cell_ids.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string& cell = condensed.matrix.cell_ids[i];
    const std::string& profile = r.truth.assignment.at(cell);
    const std::vector<double>& tpl = profile == "a" ? t1 : t2;
    double base = profile == "a" ? 4.0 : 1.5;
    for (int s = 0; s < kSlotsPerWeek; ++s)
      CHECK(condensed.matrix.values(static_cast<Eigen::Index>(i), s) ==
            base * tpl[static_cast<std::size_t>(s)]);
  }
}

TEST_CASE("same seed gives byte-identical output, different seed differs") {
  std::vector<ProfileSpec> profiles = built_in_profiles();
  for (ProfileSpec& p : profiles) p.cell_count = 4;
  SynthOptions options;
  options.noise_floor_gb = 0.01;

  SynthResult a = generate(profiles, 7, 42, options);
  SynthResult b = generate(profiles, 7, 42, options);
  CHECK(a.dataset.records() == b.dataset.records());
  CHECK(a.dataset.locations() == b.dataset.locations());
  CHECK(a.truth.amplitudes == b.truth.amplitudes);

  SynthResult c = generate(profiles, 7, 43, options);
  CHECK(a.dataset.records() != c.dataset.records());
}

TEST_CASE("built-in profiles match their quoted time windows") {
  std::vector<ProfileSpec> profiles = built_in_profiles();
  REQUIRE(profiles.size() == 5);
  std::map<std::string, const ProfileSpec*> by_name;
  for (const ProfileSpec& p : profiles) by_name[p.name] = &p;
  REQUIRE(by_name.count("residential"));
  REQUIRE(by_name.count("business"));
  REQUIRE(by_name.count("morning_commute"));
  REQUIRE(by_name.count("evening_commute"));
  REQUIRE(by_name.count("nightlife"));

  SUBCASE("business: weekday 8-17 slots are 1, everything else at most 0.1") {
    const auto& t = by_name["business"]->template_values;
    for (int d = 0; d < 7; ++d)
      for (int h = 0; h < 24; ++h) {
        double v = t[static_cast<std::size_t>(d * 24 + h)];
        if (d < 5 && h >= 8 && h <= 17)
          CHECK(v == 1.0);
        else
          CHECK(v <= 0.1);
      }
  }
  SUBCASE("morning commute: nonzero only weekdays 7-9") {
    const auto& t = by_name["morning_commute"]->template_values;
    bool any = false;
    for (int d = 0; d < 7; ++d)
      for (int h = 0; h < 24; ++h) {
        double v = t[static_cast<std::size_t>(d * 24 + h)];
        if (d < 5 && h >= 7 && h <= 9) {
          any = any || v > 0.0;
        } else {
          CHECK(v == 0.0);
        }
      }
    CHECK(any);
  }
  SUBCASE("evening commute: nonzero only weekdays 17-20") {
    const auto& t = by_name["evening_commute"]->template_values;
    for (int d = 0; d < 7; ++d)
      for (int h = 0; h < 24; ++h) {
        double v = t[static_cast<std::size_t>(d * 24 + h)];
        if (d < 5 && h >= 17 && h <= 20)
          CHECK(v > 0.0);
        else
          CHECK(v == 0.0);
      }
  }
  SUBCASE("nightlife: nonzero only 2-4, every day") {
    const auto& t = by_name["nightlife"]->template_values;
    for (int d = 0; d < 7; ++d)
      for (int h = 0; h < 24; ++h) {
        double v = t[static_cast<std::size_t>(d * 24 + h)];
        if (h >= 2 && h <= 4)
          CHECK(v == 1.0);
        else
          CHECK(v == 0.0);
      }
  }
  SUBCASE("residential: evenings and weekend daytime high, weekday working hours off") {
    const auto& t = by_name["residential"]->template_values;
    CHECK(t[static_cast<std::size_t>(slot_index(0, 22))] == 1.0);   // weekday evening
    CHECK(t[static_cast<std::size_t>(slot_index(5, 14))] == 1.0);   // weekend afternoon
    CHECK(t[static_cast<std::size_t>(slot_index(6, 20))] == 1.0);   // weekend evening
    CHECK(t[static_cast<std::size_t>(slot_index(2, 10))] == 0.0);   // weekday working hours
  }
}

TEST_CASE("four planted profiles drive the pipeline to K = 4") {
  std::vector<ProfileSpec> profiles = built_in_profiles();
  profiles.erase(profiles.begin() + 4);  // drop nightlife, keep four
  for (ProfileSpec& p : profiles) p.cell_count = 125;
  SynthOptions options;
  options.noise_floor_gb = 0.01;
  SynthResult synth = generate(profiles, 28, 7, options);

  testsupport::TempDir dir("synth4");
  write_kpi_csv(dir.file("kpi.csv"), synth.dataset.records());
  write_locations_csv(dir.file("locations.csv"), synth.dataset.locations());

  PipelineConfig config;
  config.kpi_csv = dir.file("kpi.csv");
  config.locations_csv = dir.file("locations.csv");
  config.out_dir = dir.path() / "run";
  config.seed = 7;
  AnalyzeOutcome outcome = run_analyze(config);
  CHECK(outcome.retained_k == 4);

  std::ifstream in(dir.path() / "run/model.json");
  nlohmann::json model;
  in >> model;
  CHECK(model["k"] == 4);
}

TEST_CASE("generation validates profiles and parameters") {
  CHECK_THROWS_AS(generate({}, 7, 1), InvalidProfileError);

  std::vector<double> tpl(kSlotsPerWeek, 1.0);
  std::vector<ProfileSpec> ok = {{"p", tpl, 1, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(generate(ok, 6, 1), UsageError);

  std::vector<ProfileSpec> zero_template = {{"p", std::vector<double>(kSlotsPerWeek, 0.0), 1,
                                             1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(generate(zero_template, 7, 1), InvalidProfileError);

  std::vector<ProfileSpec> short_template = {{"p", std::vector<double>(10, 1.0), 1, 1.0, 0.0,
                                              0.0}};
  CHECK_THROWS_AS(generate(short_template, 7, 1), InvalidProfileError);

  std::vector<ProfileSpec> no_cells = {{"p", tpl, 0, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(generate(no_cells, 7, 1), InvalidProfileError);

  std::vector<ProfileSpec> dup = {{"p", tpl, 1, 1.0, 0.0, 0.0}, {"p", tpl, 1, 1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(generate(dup, 7, 1), InvalidProfileError);
}

TEST_CASE("generated data is well-formed") {
  std::vector<ProfileSpec> profiles = built_in_profiles();
  for (ProfileSpec& p : profiles) p.cell_count = 3;
  SynthOptions options;
  options.noise_floor_gb = 0.01;
  SynthResult r = generate(profiles, 7, 2, options);

  CHECK(r.dataset.records().size() == 15u * 7 * 24);
  CHECK(r.dataset.locations().size() == 15);
  CHECK(r.truth.assignment.size() == 15);
  for (const KpiRecord& rec : r.dataset.records()) {
    CHECK(rec.dl_gb >= 0.0);
    CHECK(rec.ul_gb >= 0.0);
    CHECK(rec.active_users >= 0.0);
    CHECK(r.dataset.locations().contains(rec.site_id));
  }
  for (const auto& [site, loc] : r.dataset.locations()) {
    CHECK(loc.latitude >= 40.0);
    CHECK(loc.latitude <= 42.0);
    CHECK(loc.longitude >= 28.0);
    CHECK(loc.longitude <= 30.0);
  }
}

TEST_CASE("tucker congruence basics") {
  Eigen::VectorXd x(4), y(4), z(4);
  x << 1, 2, 3, 4;
  y = x;
  z << -2, 1, 0, 0;  // orthogonal to x? 1*-2+2*1 = 0, rest 0
  CHECK(tucker_congruence(x, y) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tucker_congruence(x, z) == doctest::Approx(0.0).epsilon(1e-15));
  Eigen::VectorXd flipped = -x;
  double c = tucker_congruence(x, flipped);
  CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c < 0.0);
  CHECK(tucker_congruence(x, Eigen::VectorXd::Zero(4)) == 0.0);
}

TEST_CASE("congruence magnitude never exceeds one") {
  RngStream rng(55, 0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    CHECK(std::abs(tucker_congruence(a, b)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("greedy matching recovers a shuffled sign-flipped correspondence") {
  RngStream rng(66, 0);
  Eigen::MatrixXd planted(30, 4);
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 4; ++j) planted(i, j) = rng.normal();
  Eigen::MatrixXd recovered(30, 4);
  int shuffle[4] = {2, 0, 3, 1};
  double sign[4] = {1, -1, 1, -1};
  for (int j = 0; j < 4; ++j) recovered.col(shuffle[j]) = sign[j] * planted.col(j);

  auto matches = match_congruence(recovered, planted);
  REQUIRE(matches.size() == 4);
  for (const auto& m : matches) {
    CHECK(m.recovered == shuffle[m.planted]);
    CHECK(std::abs(m.coefficient) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((m.coefficient < 0) == (sign[m.planted] < 0));
  }
}

TEST_CASE("profile JSON supports window rules and explicit templates") {
  testsupport::TempDir dir("synth");
  testsupport::write_file(dir.file("profiles.json"), R"({
    "profiles": [
      {"name": "office", "cells": 2, "base_volume": 5.0, "noise_sigma": 0.1,
       "windows": [{"days": "mon-fri", "hours": "9-17", "level": 1.0},
                   {"days": "sat", "hours": "10", "level": 0.5}]},
      {"name": "flat", "cells": 1, "base_volume": 2.0,
       "template": [)" + [] {
        std::string values;
        for (int i = 0; i < kSlotsPerWeek; ++i) values += (i ? ",1" : "1");
        return values;
      }() + R"(]}
    ]
  })");

  auto profiles = load_profiles_json(dir.file("profiles.json"));
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].template_values[static_cast<std::size_t>(slot_index(0, 9))] == 1.0);
  CHECK(profiles[0].template_values[static_cast<std::size_t>(slot_index(5, 10))] == 0.5);
  CHECK(profiles[0].template_values[static_cast<std::size_t>(slot_index(6, 10))] == 0.0);
  CHECK(profiles[1].template_values[0] == 1.0);

  testsupport::write_file(dir.file("bad.json"), R"({"profiles": [{"name": "x", "cells": 1}]})");
  CHECK_THROWS_AS(load_profiles_json(dir.file("bad.json")), InvalidProfileError);
  testsupport::write_file(dir.file("nojson.json"), "not json");
  CHECK_THROWS_AS(load_profiles_json(dir.file("nojson.json")), InvalidProfileError);
}

TEST_CASE("ground truth JSON round-trips") {
  testsupport::TempDir dir("synth");
  std::vector<ProfileSpec> profiles = built_in_profiles();
  for (ProfileSpec& p : profiles) p.cell_count = 2;
  SynthResult r = generate(profiles, 7, 13);

  write_ground_truth_json(dir.file("gt.json"), r.truth);
  SyntheticGroundTruth back = read_ground_truth_json(dir.file("gt.json"));
  CHECK(back.seed == r.truth.seed);
  CHECK(back.assignment == r.truth.assignment);
  CHECK(back.amplitudes == r.truth.amplitudes);
  REQUIRE(back.profiles.size() == r.truth.profiles.size());
  for (std::size_t i = 0; i < back.profiles.size(); ++i) {
    CHECK(back.profiles[i].name == r.truth.profiles[i].name);
    CHECK(back.profiles[i].template_values == r.truth.profiles[i].template_values);
  }
}
