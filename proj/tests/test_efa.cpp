#include <doctest.h>

#include <cmath>

#include "cellfa/condense.hpp"
#include "cellfa/efa.hpp"
#include "cellfa/errors.hpp"
#include "cellfa/rng.hpp"
#include "cellfa/standardize.hpp"
#include "cellfa/synth.hpp"

using namespace cellfa;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  RngStream rng(seed, 0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

Eigen::MatrixXd random_correlation(int n_rows, int n_vars, std::uint64_t seed) {
  return correlation_matrix(standardize_columns_fast(random_matrix(n_rows, n_vars, seed)));
}

}  // namespace

TEST_CASE("standardize maps {1,3} to +-1/sqrt(2)") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 3.0;
  Standardized s = standardize(x);
  CHECK(s.mean[0] == 2.0);
  CHECK(s.stddev[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s.z(0, 0) == doctest::Approx(-0.7071067811865475).epsilon(1e-15));
  CHECK(s.z(1, 0) == doctest::Approx(0.7071067811865475).epsilon(1e-15));
}

TEST_CASE("constant columns raise ZeroVariance with their slot indices") {
  Eigen::MatrixXd x = random_matrix(10, 4, 3);
  x.col(1).setConstant(5.0);
  x.col(3).setConstant(0.0);
  try {
    standardize(x);
    FAIL("expected ZeroVarianceError");
  } catch (const ZeroVarianceError& e) {
    CHECK(e.slots == std::vector<int>{1, 3});
  }
}

TEST_CASE("standardize rejects degenerate input") {
  Eigen::MatrixXd one_row(1, 3);
  one_row.setOnes();
  CHECK_THROWS_AS(standardize(one_row), DataError);
  Eigen::MatrixXd with_nan = random_matrix(5, 2, 9);
  with_nan(2, 1) = std::nan("");
  CHECK_THROWS_AS(standardize(with_nan), DataError);
}

TEST_CASE("standardized columns have mean 0 and sample stddev 1") {
  Eigen::MatrixXd x = random_matrix(200, 12, 17, 4.2);
  x.array() += 3.0;
  Standardized s = standardize(x);
  for (int j = 0; j < 12; ++j) {
    double mean = s.z.col(j).mean();
    double var = s.z.col(j).squaredNorm() / 199.0;
    CHECK(std::abs(mean) <= 1e-10);
    CHECK(std::abs(var - 1.0) <= 1e-10);
  }
}

TEST_CASE("exact per-variable rescaling leaves Z and R bit-identical") {
  // Values are powers of two, so multiplying by fl(3.7) is exact.
  RngStream rng(21, 0);
  Eigen::MatrixXd x(40, 12);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 12; ++j)
      x(i, j) = std::exp2(static_cast<double>(rng.next_u64() % 10) - 3.0);

  Eigen::MatrixXd scaled = x;
  scaled.col(5) *= 3.7;

  Standardized a = standardize(x);
  Standardized b = standardize(scaled);
  CHECK((a.z.array() == b.z.array()).all());
  CHECK(b.stddev[5] == 3.7 * a.stddev[5]);

  Eigen::MatrixXd ra = correlation_matrix(a.z);
  Eigen::MatrixXd rb = correlation_matrix(b.z);
  CHECK((ra.array() == rb.array()).all());
}

TEST_CASE("correlation of identical and negated columns") {
  Eigen::MatrixXd x(50, 3);
  Eigen::VectorXd base = random_matrix(50, 1, 5).col(0);
  x.col(0) = base;
  x.col(1) = base;
  x.col(2) = -base;
  Eigen::MatrixXd r = correlation_matrix(standardize(x).z);
  CHECK(r(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r(0, 0) == 1.0);
  CHECK((r.array().abs() <= 1.0).all());
  CHECK((r - r.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("correlation matches a pairwise Pearson oracle") {
  Eigen::MatrixXd x = random_matrix(60, 6, 11, 2.5);
  Eigen::MatrixXd r = correlation_matrix(standardize(x).z);
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b) {
      double ma = x.col(a).mean(), mb = x.col(b).mean();
      double num = 0, da = 0, db = 0;
      for (int i = 0; i < 60; ++i) {
        num += (x(i, a) - ma) * (x(i, b) - mb);
        da += (x(i, a) - ma) * (x(i, a) - ma);
        db += (x(i, b) - mb) * (x(i, b) - mb);
      }
      CHECK(r(a, b) == doctest::Approx(num / std::sqrt(da * db)).epsilon(1e-12));
    }
}

TEST_CASE("independent noise has near-zero off-diagonal correlations") {
  Eigen::MatrixXd r = random_correlation(5000, 8, 2024);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b)
      if (a != b) CHECK(std::abs(r(a, b)) <= 0.05);
}

TEST_CASE("sym_eigen on identity and the analytic 2x2") {
  EigenDecomposition id = sym_eigen(Eigen::MatrixXd::Identity(12, 12));
  for (int i = 0; i < 12; ++i) CHECK(id.values[i] == doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.5, 0.5, 1.0;
  EigenDecomposition d = sym_eigen(m);
  CHECK(d.values[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(d.values[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK((m - d.vectors * d.values.asDiagonal() * d.vectors.transpose()).cwiseAbs().maxCoeff() <=
        1e-14);
}

TEST_CASE("sym_eigen reconstructs 168x168 correlation fixtures") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Eigen::MatrixXd r = random_correlation(400, 168, seed);
    EigenDecomposition d = sym_eigen(r);
    Eigen::MatrixXd reconstructed = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    CHECK((r - reconstructed).cwiseAbs().maxCoeff() <= 1e-8);
    Eigen::MatrixXd gram = d.vectors.transpose() * d.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(168, 168)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(d.values.sum() - 168.0) <= 1e-8);
    for (int i = 1; i < 168; ++i) CHECK(d.values[i - 1] >= d.values[i]);
  }
}

TEST_CASE("parallel analysis is deterministic and validates inputs") {
  Eigen::MatrixXd z = standardize(random_matrix(100, 10, 77)).z;
  ParallelAnalysisOptions options{50, 0.95, 42};
  ParallelAnalysisResult a = parallel_analysis(z, options);
  ParallelAnalysisResult b = parallel_analysis(z, options);
  CHECK((a.observed.array() == b.observed.array()).all());
  CHECK((a.thresholds.array() == b.thresholds.array()).all());
  CHECK(a.retained == b.retained);

  CHECK_THROWS_AS(parallel_analysis(z, {0, 0.95, 1}), UsageError);
  CHECK_THROWS_AS(parallel_analysis(z, {10, 1.0, 1}), UsageError);
}

TEST_CASE("pure noise retains no factors in at least 18 of 20 seeds") {
  int zero_count = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RngStream data_rng(seed, 900);
    Eigen::MatrixXd x(500, 20);
    for (int i = 0; i < 500; ++i)
      for (int j = 0; j < 20; ++j) x(i, j) = data_rng.normal();
    ParallelAnalysisResult pa = parallel_analysis(standardize(x).z, {100, 0.95, seed});
    if (pa.retained == 0) ++zero_count;
  }
  CHECK(zero_count >= 18);
}

TEST_CASE("three planted orthogonal profiles give K = 3") {
  // Disjoint windows, signal-to-noise 5:1 (sigma = 0.2).
  auto window = [](std::initializer_list<int> days, std::initializer_list<int> hours) {
    std::vector<double> t(kSlotsPerWeek, 0.0);
    for (int d : days)
      for (int h : hours) t[static_cast<std::size_t>(d * 24 + h)] = 1.0;
    return t;
  };
  std::vector<ProfileSpec> profiles = {
      {"office", window({0, 1, 2, 3, 4}, {9, 10, 11, 12, 13, 14, 15, 16}), 100, 10.0, 0.2, 0.6},
      {"night", window({0, 1, 2, 3, 4, 5, 6}, {1, 2, 3}), 100, 5.0, 0.2, 0.6},
      {"weekend", window({5, 6}, {11, 12, 13, 14, 15, 16, 17}), 100, 8.0, 0.2, 0.6}};
  SynthOptions options;
  options.noise_floor_gb = 0.01;
  SynthResult synth = generate(profiles, 28, 5, options);
  CondenseResult condensed = build_median_week(synth.dataset, Metric::DL);
  ParallelAnalysisResult pa =
      parallel_analysis(standardize(condensed.matrix.values).z, {100, 0.95, 5});
  CHECK(pa.retained == 3);
}

TEST_CASE("principal-axis extraction on a one-factor structure") {
  const int n = 12;
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(n, n, 0.64);
  r.diagonal().setOnes();
  FactorModel model = extract_factors(r, 1);
  CHECK(model.extraction_converged);
  for (int i = 0; i < n; ++i) {
    CHECK(model.pattern(i, 0) == doctest::Approx(0.8).epsilon(0.0125));  // +-0.01
    CHECK(model.communality[i] == doctest::Approx(0.64).epsilon(0.05));
  }
  CHECK(model.phi(0, 0) == 1.0);
}

TEST_CASE("identity correlation has no common variance") {
  FactorModel model = extract_factors(Eigen::MatrixXd::Identity(10, 10), 1);
  CHECK(model.pattern.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(model.communality.maxCoeff() <= 1e-8);
}

TEST_CASE("extraction validates K") {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(5, 5);
  CHECK_THROWS_AS(extract_factors(r, 0), UsageError);
  CHECK_THROWS_AS(extract_factors(r, 5), UsageError);
}

TEST_CASE("hitting the iteration cap flags the model instead of throwing") {
  Eigen::MatrixXd r(3, 3);
  r << 1.0, 0.8, 0.7, 0.8, 1.0, 0.56, 0.7, 0.56, 1.0;  // converges slowly toward h = 1
  ExtractionOptions options;
  options.max_iterations = 3;
  FactorModel model = extract_factors(r, 1, options);
  CHECK_FALSE(model.extraction_converged);
  CHECK(model.extraction_iterations == 3);
  CHECK(model.pattern.allFinite());
}

TEST_CASE("singular correlation falls back from the SMC init") {
  Eigen::MatrixXd r(3, 3);
  r << 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0;  // rank 2
  FactorModel model = extract_factors(r, 1);
  CHECK(model.smc_fallback);
  // The duplicated pair forms the single common factor.
  CHECK(std::abs(model.pattern(0, 0)) >= 0.9);
  CHECK(std::abs(model.pattern(1, 0)) >= 0.9);
}

TEST_CASE("near-unit communalities hit the Heywood clamp") {
  // R built from loadings (1.0, 0.8, 0.7): the first communality iterates to 1.
  Eigen::MatrixXd r(3, 3);
  r << 1.0, 0.8, 0.7, 0.8, 1.0, 0.56, 0.7, 0.56, 1.0;
  FactorModel model = extract_factors(r, 1);
  CHECK(model.heywood_adjusted);
  for (int i = 0; i < 3; ++i) {
    CHECK(model.uniqueness[i] >= 1e-3);
    CHECK(model.communality[i] <= 1.0 - 1e-3);
    CHECK(model.communality[i] >= 0.0);
    CHECK(model.communality[i] + model.uniqueness[i] == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("reconstruction residual is small on a planted three-factor structure") {
  // R built analytically from three window-shaped loading columns:
  // R = L L' + diag(1 - h^2) is an exact factor-model correlation matrix.
  Eigen::MatrixXd planted = Eigen::MatrixXd::Zero(kSlotsPerWeek, 3);
  for (int d = 0; d < 5; ++d)
    for (int h = 9; h <= 16; ++h) planted(d * 24 + h, 0) = 0.85;
  for (int d = 0; d < 7; ++d)
    for (int h = 1; h <= 3; ++h) planted(d * 24 + h, 1) = 0.8;
  for (int d = 5; d < 7; ++d)
    for (int h = 11; h <= 17; ++h) planted(d * 24 + h, 2) = 0.75;

  Eigen::MatrixXd r = planted * planted.transpose();
  for (int i = 0; i < kSlotsPerWeek; ++i) r(i, i) = 1.0;

  FactorModel model = extract_factors(r, 3);  // unrotated, phi = I
  Eigen::MatrixXd fitted = model.pattern * model.phi * model.pattern.transpose();
  Eigen::MatrixXd residual = r - fitted;
  residual.diagonal().setZero();
  CHECK(residual.cwiseAbs().maxCoeff() <= 0.05);

  // The planted columns themselves are recovered.
  for (const auto& m : match_congruence(model.pattern, planted))
    CHECK(std::abs(m.coefficient) >= 0.999);
}

TEST_CASE("scale invariance carries through parallel analysis and the final model") {
  RngStream rng(77, 1);
  Eigen::MatrixXd x(60, 24);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 24; ++j)
      x(i, j) = std::exp2(static_cast<double>((i * 7 + j * 3) % 9) - 2.0 +
                          static_cast<double>(rng.next_u64() % 2));
  Eigen::MatrixXd scaled = x;
  scaled.col(7) *= 3.7;  // exact: power-of-two values

  Standardized za = standardize(x);
  Standardized zb = standardize(scaled);
  REQUIRE((za.z.array() == zb.z.array()).all());

  ParallelAnalysisResult pa_a = parallel_analysis(za.z, {60, 0.95, 13});
  ParallelAnalysisResult pa_b = parallel_analysis(zb.z, {60, 0.95, 13});
  CHECK((pa_a.observed.array() == pa_b.observed.array()).all());
  CHECK(pa_a.retained == pa_b.retained);

  Eigen::MatrixXd ra = correlation_matrix(za.z);
  Eigen::MatrixXd rb = correlation_matrix(zb.z);
  int k = std::max(1, pa_a.retained);
  FactorModel ma = fit_factor_model(ra, k);
  FactorModel mb = fit_factor_model(rb, k);
  CHECK((ma.pattern.array() == mb.pattern.array()).all());
  CHECK((ma.phi.array() == mb.phi.array()).all());
  CHECK((ma.uniqueness.array() == mb.uniqueness.array()).all());
}
