#include "cellfa/standardize.hpp"

#include <mpfr.h>

#include <cmath>
#include <string>

#include "cellfa/errors.hpp"

namespace cellfa {

namespace {

constexpr mpfr_prec_t kPrecision = 512;

// Minimal RAII handle for one mpfr value.
class Big {
 public:
  Big() { mpfr_init2(v_, kPrecision); }
  ~Big() { mpfr_clear(v_); }
  Big(const Big&) = delete;
  Big& operator=(const Big&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

}  // namespace

Standardized standardize(const Eigen::MatrixXd& values) {
  const Eigen::Index n = values.rows();
  const Eigen::Index cols = values.cols();
  if (n < 2) throw DataError("standardize requires at least 2 rows");
  if (!values.allFinite()) throw DataError("standardize input contains non-finite values");

  Standardized out;
  out.z.resize(n, cols);
  out.mean.resize(cols);
  out.stddev.resize(cols);

  std::vector<int> zero_variance;

  Big sum, dev, acc, factor, tmp;
  for (Eigen::Index j = 0; j < cols; ++j) {
    // S = sum of the column, exact.
    mpfr_set_zero(sum.get(), 1);
    for (Eigen::Index i = 0; i < n; ++i)
      mpfr_add_d(sum.get(), sum.get(), values(i, j), MPFR_RNDN);

    // A = sum over rows of (n*x - S)^2, exact.
    mpfr_set_zero(acc.get(), 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      mpfr_set_d(dev.get(), values(i, j), MPFR_RNDN);
      mpfr_mul_ui(dev.get(), dev.get(), static_cast<unsigned long>(n), MPFR_RNDN);
      mpfr_sub(dev.get(), dev.get(), sum.get(), MPFR_RNDN);
      mpfr_sqr(tmp.get(), dev.get(), MPFR_RNDN);
      mpfr_add(acc.get(), acc.get(), tmp.get(), MPFR_RNDN);
    }

    mpfr_div_ui(tmp.get(), sum.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    out.mean[j] = mpfr_get_d(tmp.get(), MPFR_RNDN);

    if (mpfr_zero_p(acc.get())) {
      zero_variance.push_back(static_cast<int>(j));
      out.stddev[j] = 0.0;
      out.z.col(j).setZero();
      continue;
    }

    // stddev = sqrt(A / (n-1)) / n
    mpfr_div_ui(tmp.get(), acc.get(), static_cast<unsigned long>(n - 1), MPFR_RNDN);
    mpfr_sqrt(tmp.get(), tmp.get(), MPFR_RNDN);
    mpfr_div_ui(tmp.get(), tmp.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    out.stddev[j] = mpfr_get_d(tmp.get(), MPFR_RNDN);

    // factor = sqrt((n-1) / A); z_i = (n*x_i - S) * factor
    mpfr_ui_div(factor.get(), static_cast<unsigned long>(n - 1), acc.get(), MPFR_RNDN);
    mpfr_sqrt(factor.get(), factor.get(), MPFR_RNDN);
    for (Eigen::Index i = 0; i < n; ++i) {
      mpfr_set_d(dev.get(), values(i, j), MPFR_RNDN);
      mpfr_mul_ui(dev.get(), dev.get(), static_cast<unsigned long>(n), MPFR_RNDN);
      mpfr_sub(dev.get(), dev.get(), sum.get(), MPFR_RNDN);
      mpfr_mul(dev.get(), dev.get(), factor.get(), MPFR_RNDN);
      out.z(i, j) = mpfr_get_d(dev.get(), MPFR_RNDN);
    }
  }

  if (!zero_variance.empty()) {
    std::string msg = "zero-variance variable(s) at slot index";
    for (int s : zero_variance) msg += " " + std::to_string(s);
    throw ZeroVarianceError(std::move(msg), std::move(zero_variance));
  }
  return out;
}

Eigen::MatrixXd standardize_columns_fast(const Eigen::MatrixXd& values) {
  const Eigen::Index n = values.rows();
  Eigen::MatrixXd z = values;
  Eigen::RowVectorXd mean = values.colwise().mean();
  z.rowwise() -= mean;
  Eigen::RowVectorXd sd =
      (z.array().square().colwise().sum() / static_cast<double>(n - 1)).sqrt();
  for (Eigen::Index j = 0; j < z.cols(); ++j) z.col(j) /= sd[j];
  return z;
}

}  // namespace cellfa
