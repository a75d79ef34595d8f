#include "cellfa/efa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cellfa/errors.hpp"
#include "cellfa/rng.hpp"
#include "cellfa/standardize.hpp"

namespace cellfa {

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw DataError("correlation requires at least 2 rows");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(z.cols(), z.cols());
  r.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / static_cast<double>(n - 1));
  r.triangularView<Eigen::StrictlyUpper>() = r.transpose();
  r = r.cwiseMax(-1.0).cwiseMin(1.0);
  r.diagonal().setOnes();
  return r;
}

EigenDecomposition sym_eigen(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("symmetric eigendecomposition did not converge");
  EigenDecomposition d;
  d.values = solver.eigenvalues().reverse();
  d.vectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("symmetric eigendecomposition did not converge");
  return solver.eigenvalues().reverse();
}

namespace {

// Type-7 quantile (linear interpolation between order statistics) of an
// ascending-sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = q * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo >= n - 1) return sorted[n - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ParallelAnalysisResult parallel_analysis(const Eigen::MatrixXd& z,
                                         const ParallelAnalysisOptions& options) {
  if (options.replicates < 1) throw UsageError("parallel analysis needs replicates >= 1");
  if (!(options.quantile > 0.0 && options.quantile < 1.0))
    throw UsageError("parallel analysis quantile must be in (0, 1)");

  const Eigen::Index n = z.rows();
  const Eigen::Index nvar = z.cols();

  ParallelAnalysisResult result;
  result.replicates = options.replicates;
  result.quantile = options.quantile;
  result.seed = options.seed;
  result.observed = sym_eigenvalues(correlation_matrix(z));

  // rank-major store of replicate eigenvalues
  std::vector<std::vector<double>> random_by_rank(static_cast<std::size_t>(nvar));
  for (auto& v : random_by_rank) v.reserve(static_cast<std::size_t>(options.replicates));

  Eigen::MatrixXd noise(n, nvar);
  for (int rep = 0; rep < options.replicates; ++rep) {
    RngStream rng(options.seed, static_cast<std::uint64_t>(rep));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < nvar; ++j) noise(i, j) = rng.normal();
    Eigen::VectorXd values =
        sym_eigenvalues(correlation_matrix(standardize_columns_fast(noise)));
    for (Eigen::Index r = 0; r < nvar; ++r)
      random_by_rank[static_cast<std::size_t>(r)].push_back(values[r]);
  }

  result.thresholds.resize(nvar);
  for (Eigen::Index r = 0; r < nvar; ++r) {
    auto& v = random_by_rank[static_cast<std::size_t>(r)];
    std::sort(v.begin(), v.end());
    result.thresholds[r] = quantile_sorted(v, options.quantile);
  }

  result.retained = 0;
  while (result.retained < nvar &&
         result.observed[result.retained] > result.thresholds[result.retained])
    ++result.retained;
  return result;
}

std::string rotation_name(Rotation r) {
  switch (r) {
    case Rotation::None: return "none";
    case Rotation::Varimax: return "varimax";
    case Rotation::Promax: return "promax";
  }
  return "none";
}

namespace {

// Flip each column so its sum is non-negative; adjusts phi consistently.
void apply_sign_convention(Eigen::MatrixXd& pattern, Eigen::MatrixXd* phi) {
  for (Eigen::Index k = 0; k < pattern.cols(); ++k) {
    if (pattern.col(k).sum() >= 0.0) continue;
    pattern.col(k) = -pattern.col(k);
    if (phi) {
      phi->col(k) = -phi->col(k);
      phi->row(k) = -phi->row(k);
    }
  }
}

}  // namespace

FactorModel extract_factors(const Eigen::MatrixXd& correlation, int k,
                            const ExtractionOptions& options) {
  const Eigen::Index nvar = correlation.rows();
  if (k < 1 || k >= nvar)
    throw UsageError("factor count must satisfy 1 <= K < N (got K=" + std::to_string(k) +
                     ", N=" + std::to_string(nvar) + ")");

  FactorModel model;
  model.n_variables = static_cast<int>(nvar);
  model.k = k;
  model.rotation = Rotation::None;

  // Initial communalities: squared multiple correlations when R is invertible.
  Eigen::VectorXd h2(nvar);
  Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  bool smc_ok = llt.info() == Eigen::Success;
  if (smc_ok) {
    Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(nvar, nvar));
    for (Eigen::Index i = 0; i < nvar; ++i) {
      double dii = inverse(i, i);
      if (!(dii > 0.0) || !std::isfinite(dii)) {
        smc_ok = false;
        break;
      }
      h2[i] = 1.0 - 1.0 / dii;
    }
  }
  if (!smc_ok) {
    model.smc_fallback = true;
    for (Eigen::Index i = 0; i < nvar; ++i) {
      double best = 0.0;
      for (Eigen::Index j = 0; j < nvar; ++j)
        if (j != i) best = std::max(best, std::abs(correlation(i, j)));
      h2[i] = best;
    }
  }
  h2 = h2.cwiseMax(0.0).cwiseMin(1.0);

  Eigen::MatrixXd reduced = correlation;
  Eigen::MatrixXd loadings;
  model.extraction_converged = false;
  for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
    model.extraction_iterations = iteration;
    reduced.diagonal() = h2;
    EigenDecomposition eig = sym_eigen(reduced);
    loadings.resize(nvar, k);
    for (int f = 0; f < k; ++f)
      loadings.col(f) = eig.vectors.col(f) * std::sqrt(std::max(0.0, eig.values[f]));
    Eigen::VectorXd next = loadings.array().square().rowwise().sum();
    next = next.cwiseMax(0.0).cwiseMin(1.0);
    double delta = (next - h2).cwiseAbs().maxCoeff();
    h2 = next;
    if (delta <= options.tolerance) {
      model.extraction_converged = true;
      break;
    }
  }

  model.pattern = loadings;
  apply_sign_convention(model.pattern, nullptr);
  model.phi = Eigen::MatrixXd::Identity(k, k);

  model.uniqueness.resize(nvar);
  model.communality.resize(nvar);
  for (Eigen::Index i = 0; i < nvar; ++i) {
    double u = 1.0 - h2[i];
    if (u < options.min_uniqueness) {
      u = options.min_uniqueness;
      model.heywood_adjusted = true;
    }
    model.uniqueness[i] = u;
    model.communality[i] = 1.0 - u;
  }

  model.explained_variance = model.pattern.array().square().colwise().sum();
  return model;
}

namespace {

// Per-column varimax contribution: sum(l^4) - (sum(l^2))^2 / N.
double varimax_column_term(const Eigen::VectorXd& column) {
  double s2 = 0.0, s4 = 0.0;
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    double sq = column[i] * column[i];
    s2 += sq;
    s4 += sq * sq;
  }
  return s4 - s2 * s2 / static_cast<double>(column.size());
}

double varimax_criterion(const Eigen::MatrixXd& loadings) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < loadings.cols(); ++j)
    total += varimax_column_term(loadings.col(j));
  return total;
}

}  // namespace

VarimaxResult varimax(const Eigen::MatrixXd& loadings, const VarimaxOptions& options) {
  const Eigen::Index nvar = loadings.rows();
  const Eigen::Index k = loadings.cols();

  VarimaxResult result;
  result.transform = Eigen::MatrixXd::Identity(k, k);
  if (k < 2) {
    result.loadings = loadings;
    result.criterion_history.push_back(varimax_criterion(loadings));
    return result;
  }

  // Kaiser normalization: rotate rows scaled to unit communality.
  Eigen::VectorXd row_norm = loadings.array().square().rowwise().sum().sqrt();
  Eigen::VectorXd scale = row_norm;
  for (Eigen::Index i = 0; i < nvar; ++i)
    if (scale[i] == 0.0) scale[i] = 1.0;
  Eigen::MatrixXd w = loadings.array().colwise() / scale.array();

  const double fn = static_cast<double>(nvar);
  result.criterion_history.push_back(varimax_criterion(w));

  // A rotation is applied only when the measured pair improvement clears this
  // margin, which keeps the per-sweep criterion history non-decreasing even
  // under floating-point re-summation.
  const double min_improvement = 1e-13;

  result.converged = false;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    result.sweeps = sweep;
    bool rotated = false;
    for (Eigen::Index j = 0; j + 1 < k; ++j) {
      for (Eigen::Index l = j + 1; l < k; ++l) {
        double a = 0, b = 0, c = 0, d = 0;
        for (Eigen::Index i = 0; i < nvar; ++i) {
          double u = w(i, j) * w(i, j) - w(i, l) * w(i, l);
          double v = 2.0 * w(i, j) * w(i, l);
          a += u;
          b += v;
          c += u * u - v * v;
          d += u * v;
        }
        double numerator = 2.0 * (fn * d - a * b);
        double denominator = fn * c - (a * a - b * b);
        if (numerator == 0.0 && denominator == 0.0) continue;
        double angle = 0.25 * std::atan2(numerator, denominator);
        if (std::abs(angle) < 1e-12) continue;

        double before = varimax_column_term(w.col(j)) + varimax_column_term(w.col(l));
        double cs = std::cos(angle), sn = std::sin(angle);
        Eigen::VectorXd new_j = cs * w.col(j) + sn * w.col(l);
        Eigen::VectorXd new_l = -sn * w.col(j) + cs * w.col(l);
        double after = varimax_column_term(new_j) + varimax_column_term(new_l);
        if (after <= before + min_improvement) continue;

        w.col(j) = new_j;
        w.col(l) = new_l;
        Eigen::VectorXd t_j = cs * result.transform.col(j) + sn * result.transform.col(l);
        result.transform.col(l) =
            -sn * result.transform.col(j) + cs * result.transform.col(l);
        result.transform.col(j) = t_j;
        rotated = true;
      }
    }
    double swept = varimax_criterion(w);
    double gain = swept - result.criterion_history.back();
    result.criterion_history.push_back(swept);
    if (!rotated || gain <= options.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.loadings = w.array().colwise() * scale.array();
  return result;
}

PromaxResult promax(const Eigen::MatrixXd& varimax_loadings, int kappa) {
  if (kappa < 1) throw UsageError("promax kappa must be >= 1");
  const Eigen::Index k = varimax_loadings.cols();

  PromaxResult result;
  if (k < 2) {
    result.pattern = varimax_loadings;
    result.phi = Eigen::MatrixXd::Identity(k, k);
    return result;
  }

  auto fallback = [&] {
    PromaxResult fb;
    fb.pattern = varimax_loadings;
    fb.phi = Eigen::MatrixXd::Identity(k, k);
    fb.fallback_to_varimax = true;
    return fb;
  };

  // Target: P = sign(l) |l|^kappa, i.e. |l|^(kappa+1) / l with 0 -> 0.
  Eigen::MatrixXd target(varimax_loadings.rows(), k);
  for (Eigen::Index i = 0; i < varimax_loadings.rows(); ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      double l = varimax_loadings(i, j);
      target(i, j) = l == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(l), kappa), l);
    }

  Eigen::MatrixXd gram = varimax_loadings.transpose() * varimax_loadings;
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);
  if (gram_ldlt.info() != Eigen::Success) return fallback();
  Eigen::MatrixXd u = gram_ldlt.solve(varimax_loadings.transpose() * target);
  if (!u.allFinite()) return fallback();

  Eigen::LDLT<Eigen::MatrixXd> utu_ldlt(u.transpose() * u);
  if (utu_ldlt.info() != Eigen::Success) return fallback();
  Eigen::MatrixXd utu_inv = utu_ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  if (!utu_inv.allFinite()) return fallback();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(utu_inv(j, j) > 0.0)) return fallback();
    u.col(j) *= std::sqrt(utu_inv(j, j));
  }

  result.pattern = varimax_loadings * u;

  Eigen::LDLT<Eigen::MatrixXd> final_ldlt(u.transpose() * u);
  if (final_ldlt.info() != Eigen::Success) return fallback();
  Eigen::MatrixXd phi = final_ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  if (!phi.allFinite()) return fallback();

  // Unit diagonal exactly; symmetrize and clamp.
  Eigen::VectorXd d = phi.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) phi(i, j) /= d[i] * d[j];
  phi = ((phi + phi.transpose()) / 2.0).eval();
  phi = phi.cwiseMax(-1.0).cwiseMin(1.0);
  phi.diagonal().setOnes();
  result.phi = phi;
  return result;
}

FactorModel finalize_model(FactorModel model) {
  apply_sign_convention(model.pattern, &model.phi);

  // Explained variance = column sums of squared structure loadings. The inner
  // pattern*phi products are accumulated in value order so the result does not
  // depend on the current column permutation; finalize is then idempotent at
  // the bit level.
  Eigen::VectorXd explained(model.k);
  std::vector<double> products(static_cast<std::size_t>(model.k));
  for (int k = 0; k < model.k; ++k) {
    double ss = 0.0;
    for (Eigen::Index i = 0; i < model.pattern.rows(); ++i) {
      for (int j = 0; j < model.k; ++j)
        products[static_cast<std::size_t>(j)] = model.pattern(i, j) * model.phi(j, k);
      std::sort(products.begin(), products.end());
      double entry = 0.0;
      for (double p : products) entry += p;
      ss += entry * entry;
    }
    explained[k] = ss;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return explained[a] > explained[b]; });

  Eigen::MatrixXd pattern(model.pattern.rows(), model.k);
  Eigen::MatrixXd phi(model.k, model.k);
  Eigen::VectorXd ev(model.k);
  for (int dst = 0; dst < model.k; ++dst) {
    pattern.col(dst) = model.pattern.col(order[static_cast<std::size_t>(dst)]);
    ev[dst] = explained[order[static_cast<std::size_t>(dst)]];
  }
  for (int r = 0; r < model.k; ++r)
    for (int c = 0; c < model.k; ++c)
      phi(r, c) = model.phi(order[static_cast<std::size_t>(r)], order[static_cast<std::size_t>(c)]);

  model.pattern = std::move(pattern);
  model.phi = std::move(phi);
  model.explained_variance = std::move(ev);
  return model;
}

FactorModel fit_factor_model(const Eigen::MatrixXd& correlation, int k,
                             const FitOptions& options) {
  FactorModel model = extract_factors(correlation, k, options.extraction);
  VarimaxResult rotated = varimax(model.pattern, options.varimax);
  model.varimax_converged = rotated.converged;
  model.varimax_sweeps = rotated.sweeps;

  PromaxResult oblique = promax(rotated.loadings, options.kappa);
  model.pattern = oblique.pattern;
  model.phi = oblique.phi;
  model.promax_fallback = oblique.fallback_to_varimax;
  model.rotation = oblique.fallback_to_varimax ? Rotation::Varimax : Rotation::Promax;

  return finalize_model(std::move(model));
}

}  // namespace cellfa
