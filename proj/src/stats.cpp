#include "layerscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace layerscope {

double pearson(const Series<double>& x, const Series<double>& y) {
  require(x.size() == y.size(), ErrorCode::Dimension, "pearson: length mismatch");
  require(x.size() >= 3, ErrorCode::Validation, "pearson: need at least 3 points");
  require(x.allFinite() && y.allFinite(), ErrorCode::Validation, "pearson: non-finite input");
  const Series<double> dx = x.array() - x.mean();
  const Series<double> dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  require(sxx > 0.0 && syy > 0.0, ErrorCode::Numerical, "pearson: correlation undefined for zero variance");
  const double r = dx.dot(dy) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

RegressionFit linear_regression(const Series<double>& x, const Series<double>& y) {
  require(x.size() == y.size(), ErrorCode::Dimension, "linear_regression: length mismatch");
  require(x.size() >= 3, ErrorCode::Validation, "linear_regression: need at least 3 points");
  require(x.allFinite() && y.allFinite(), ErrorCode::Validation, "linear_regression: non-finite input");

  RegressionFit fit;
  fit.n = x.size();
  const double n = static_cast<double>(fit.n);
  const Series<double> dx = x.array() - x.mean();
  const Series<double> dy = y.array() - y.mean();
  const double sxx = dx.squaredNorm();
  require(sxx > 0.0, ErrorCode::Numerical, "linear_regression: x has zero variance");

  fit.slope = dx.dot(dy) / sxx;
  fit.intercept = y.mean() - fit.slope * x.mean();
  const double syy = dy.squaredNorm();
  const double sse = std::max(0.0, (dy - fit.slope * dx).squaredNorm());
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - 2.0);

  const double dof = n - 2.0;
  const double se = std::sqrt(sse / dof / sxx);
  if (se > 0.0) {
    fit.t_stat = fit.slope / se;
    fit.p_value = student_t_two_sided_p(fit.t_stat, dof);
  } else {
    fit.t_stat = fit.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  fail(ErrorCode::Numerical, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, ErrorCode::Validation, "incomplete_beta: a and b must be positive");
  require(x >= 0.0 && x <= 1.0, ErrorCode::Validation, "incomplete_beta: x outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on one side of the mean; use symmetry.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  require(dof > 0.0, ErrorCode::Validation, "student_t: degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

}  // namespace layerscope
