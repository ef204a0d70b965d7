#pragma once

namespace mvt {

// Standard normal density and distribution functions used by the probit
// likelihood, accurate to better than 1e-12 over the full double range.

double normal_pdf(double x);

// Phi(x) via erfc; switches to a Mills-ratio continued fraction in the far
// left tail where erfc underflows.
double normal_cdf(double x);

// log Phi(x), finite for any x (asymptotic tail handling beyond erfc range).
double log_normal_cdf(double x);

// Inverse Mills ratio v(t) = pdf(t) / cdf(t). Guarded for t << 0, where the
// naive ratio degenerates to 0/0.
double inverse_mills(double t);

// w(t) = v(t) * (v(t) + t), the variance-shrink factor of the moment-matched
// probit update. Lies in (0, 1).
double mills_w(double t);

}  // namespace mvt
