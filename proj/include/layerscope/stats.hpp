#pragma once

#include "layerscope/tensor.hpp"

namespace layerscope {

/// Pearson product-moment correlation. Throws Numerical when either input
/// has zero variance.
double pearson(const Series<double>& x, const Series<double>& y);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_stat = 0.0;   // slope / standard error; infinite for an exact fit
  double p_value = 1.0;  // two-sided
  double r2 = 0.0;
  double adj_r2 = 0.0;
  Index n = 0;
};

/// Ordinary least squares y = intercept + slope * x with a t test on the slope.
RegressionFit linear_regression(const Series<double>& x, const Series<double>& y);

/// Regularized incomplete beta I_x(a, b), evaluated by continued fraction.
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace layerscope
