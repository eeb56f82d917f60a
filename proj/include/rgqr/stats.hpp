#pragma once

#include "rgqr/errors.hpp"

namespace rgqr {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// series + continued-fraction evaluation, relative error below 1e-12.
double lower_reg_gamma(double a, double x);
double upper_reg_gamma(double a, double x);

// Survival function of the chi-squared distribution with df degrees of
// freedom, Q(df/2, x/2).
double chi2_sf(double x, double df);

double normal_cdf(double x);

// Inverse of the standard normal CDF; rational approximation polished with
// one Halley step, accurate to full double precision away from 0 and 1.
double normal_quantile(double p);

}  // namespace rgqr
