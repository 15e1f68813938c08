#pragma once
// Gamma-family special functions evaluated in log space so that shapes in
// the hundreds (alpha * t over long horizons) stay finite.

namespace cbm {

//! ln Gamma(x) for x > 0 (reentrant).
double log_gamma(double x);

//! Regularized lower/upper incomplete gamma P(s, x), Q(s, x) = 1 - P.
double regularized_lower_gamma(double shape, double x);
double regularized_upper_gamma(double shape, double x);
//! ln Q(s, x); stays accurate far into the tail where Q underflows.
double log_regularized_upper_gamma(double shape, double x);

//! Gamma(s, x) = integral from x to infinity of z^(s-1) e^(-z) dz, s > 0.
double upper_incomplete_gamma(double shape, double x);
double log_upper_incomplete_gamma(double shape, double x);

//! ln of Gamma(s, x1) - Gamma(s, x2) = integral over [x1, x2] of
//! z^(s-1) e^(-z) dz for 0 < x1 < x2. Any real s is accepted, which covers the
//! s = alpha*t - 1 <= 0 case of the random-effects density.
double log_incomplete_gamma_difference(double s, double x1, double x2);

//! Gamma(shape, rate) density, log density and distribution function.
double gamma_pdf(double shape, double rate, double x);
double gamma_log_pdf(double shape, double rate, double x);
double gamma_cdf(double shape, double rate, double x);

//! Exponential integral E1(x), x > 0.
double exponential_integral_e1(double x);

}  // namespace cbm
