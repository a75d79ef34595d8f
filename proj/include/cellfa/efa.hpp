#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace cellfa {

// Pearson correlations of an already z-scored matrix: R = Z'Z/(n-1), forced
// exactly symmetric, unit diagonal, entries clamped to [-1, 1].
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& z);

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns match values; orthonormal
};

// Symmetric eigendecomposition with R = Q diag(values) Q'. Throws
// ConvergenceError when the underlying iteration fails.
EigenDecomposition sym_eigen(const Eigen::MatrixXd& symmetric);

// Eigenvalues only, descending.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& symmetric);

struct ParallelAnalysisOptions {
  int replicates = 100;
  double quantile = 0.95;
  std::uint64_t seed = 0;
};

struct ParallelAnalysisResult {
  Eigen::VectorXd observed;    // data correlation eigenvalues, descending
  Eigen::VectorXd thresholds;  // per-rank quantile of the random eigenvalues
  int retained = 0;            // longest top prefix with observed > threshold
  int replicates = 0;
  double quantile = 0.0;
  std::uint64_t seed = 0;
};

// Horn's parallel analysis. Each replicate draws an i.i.d. standard-normal
// matrix of the same shape from its own (seed, replicate) stream, so results
// are independent of evaluation order.
ParallelAnalysisResult parallel_analysis(const Eigen::MatrixXd& z,
                                         const ParallelAnalysisOptions& options = {});

enum class Rotation { None, Varimax, Promax };

std::string rotation_name(Rotation r);

struct FactorModel {
  int n_variables = 0;
  int k = 0;
  Eigen::MatrixXd pattern;             // N x K loadings
  Eigen::MatrixXd phi;                 // K x K factor correlations
  Eigen::VectorXd uniqueness;          // N, clamped >= min_uniqueness
  Eigen::VectorXd communality;         // N, = 1 - uniqueness
  Eigen::VectorXd explained_variance;  // K, sum of squared structure loadings
  Rotation rotation = Rotation::None;

  bool extraction_converged = true;
  int extraction_iterations = 0;
  bool smc_fallback = false;     // squared-multiple-correlation init unavailable
  bool heywood_adjusted = false; // some communality hit the clamp
  bool varimax_converged = true;
  int varimax_sweeps = 0;
  bool promax_fallback = false;  // singular transform; varimax solution kept

  Eigen::MatrixXd structure() const { return pattern * phi; }
};

struct ExtractionOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;       // on max |delta communality|
  double min_uniqueness = 1e-3;  // Heywood clamp
};

// Iterated principal-axis factoring for a fixed K on a correlation matrix.
// Initial communalities are squared multiple correlations 1 - 1/(R^-1)_ii;
// if R is not positive definite the init falls back to max |r| per row and
// the model is flagged. Hitting the iteration cap flags the model instead of
// throwing; the last iterate is returned.
FactorModel extract_factors(const Eigen::MatrixXd& correlation, int k,
                            const ExtractionOptions& options = {});

struct VarimaxOptions {
  int max_sweeps = 1000;
  double tolerance = 1e-8;  // criterion gain per sweep
};

struct VarimaxResult {
  Eigen::MatrixXd loadings;               // rotated, Kaiser normalization undone
  Eigen::MatrixXd transform;              // orthogonal T with loadings = input * T
  std::vector<double> criterion_history;  // initial value, then one per sweep
  int sweeps = 0;
  bool converged = true;
};

// Kaiser-normalized varimax via pairwise planar rotations. Each rotation is
// kept only if it does not decrease the criterion as computed, so the recorded
// per-sweep history is non-decreasing. K = 1 returns the input with T = [1].
VarimaxResult varimax(const Eigen::MatrixXd& loadings, const VarimaxOptions& options = {});

struct PromaxResult {
  Eigen::MatrixXd pattern;  // N x K oblique pattern
  Eigen::MatrixXd phi;      // K x K, symmetric, unit diagonal
  bool fallback_to_varimax = false;
};

// Promax: powers the varimax loadings into a target P = sign(l)|l|^kappa,
// fits the oblique transform by least squares and rescales its columns so the
// implied factor covariance has unit diagonal. A singular transform falls back
// to the varimax solution with phi = I and sets the flag.
PromaxResult promax(const Eigen::MatrixXd& varimax_loadings, int kappa = 4);

// Canonical ordering: columns sorted by explained variance (descending),
// each pattern column sign-flipped so its sum is >= 0, with phi rows/columns
// permuted and flipped consistently. Idempotent.
FactorModel finalize_model(FactorModel model);

struct FitOptions {
  ExtractionOptions extraction;
  VarimaxOptions varimax;
  int kappa = 4;
};

// extract -> varimax -> promax -> finalize.
FactorModel fit_factor_model(const Eigen::MatrixXd& correlation, int k,
                             const FitOptions& options = {});

}  // namespace cellfa
