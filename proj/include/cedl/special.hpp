#pragma once

namespace cedl {

// Natural log of the gamma function for x > 0 (Lanczos, g = 7, n = 9).
// Throws DomainError for x <= 0 or non-finite x.
double log_gamma(double x);

// psi(x) = d/dx ln Gamma(x) for x > 0. Upward recurrence to x >= 10, then an
// asymptotic series.
double digamma(double x);

// psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

}  // namespace cedl
