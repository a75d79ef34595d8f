#pragma once

#include <Eigen/Dense>

namespace cellfa {

struct Standardized {
  Eigen::MatrixXd z;       // rows x variables, column mean 0, sample stddev 1
  Eigen::VectorXd mean;    // per variable
  Eigen::VectorXd stddev;  // per variable, divisor n-1
};

// Z-scores each column. Column sums and squared-deviation sums are accumulated
// exactly in extended precision and each z entry is produced by a single final
// rounding of (n*x - S) * sqrt((n-1) / sum(d^2)). In that expression a common
// per-variable scale factor cancels in exact arithmetic, so any rescaling of a
// variable that is exact at the double level leaves Z bit-identical.
//
// Throws ZeroVarianceError listing every constant column, DataError for fewer
// than two rows or non-finite input.
Standardized standardize(const Eigen::MatrixXd& values);

// Plain double column z-scoring for internal Monte-Carlo replicates.
Eigen::MatrixXd standardize_columns_fast(const Eigen::MatrixXd& values);

}  // namespace cellfa
