#pragma once

#include <span>

namespace ptbcc {

/// Digamma psi(x) for x > 0. Shifts x up with psi(x) = psi(x+1) - 1/x and
/// finishes with the asymptotic series; absolute error below 1e-10 for
/// x >= 1e-4. Throws Error(Domain) for x <= 0 or non-finite x.
double digamma(double x);

/// log B(alpha) = sum log Gamma(alpha_i) - log Gamma(sum alpha_i).
double log_beta(std::span<const double> alpha);

}  // namespace ptbcc
