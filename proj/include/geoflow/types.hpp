#pragma once

#include <Eigen/Dense>

namespace geoflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Largest singular value (matrix 2-norm).
inline double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

inline double smallest_singular_value(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// 2-norm condition number; infinity when singular.
inline double condition_number(const Mat& m) {
  const double lo = smallest_singular_value(m);
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return operator_norm(m) / lo;
}

/// Cross product on length-3 dynamic vectors.
inline Vec cross3(const Vec& a, const Vec& b) {
  Vec c(3);
  c << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
  return c;
}

}  // namespace geoflow
