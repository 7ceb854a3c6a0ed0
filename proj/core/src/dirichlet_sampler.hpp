#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

namespace ptbcc::detail {

/// Dirichlet draw computed in log space: for alpha < 1 a Gamma(alpha)
/// variate is G(alpha + 1) * U^(1/alpha), which keeps tiny concentrations
/// from underflowing to an all-zero row.
template <class Rng>
void sample_dirichlet(std::span<const double> alpha, Rng& rng, std::span<double> out) {
  std::vector<double> logs(alpha.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double max_log = -INFINITY;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const double a = alpha[k];
    double log_g;
    if (a < 1.0) {
      std::gamma_distribution<double> gamma(a + 1.0, 1.0);
      double u = uniform(rng);
      while (u <= 0.0) u = uniform(rng);
      log_g = std::log(gamma(rng)) + std::log(u) / a;
    } else {
      std::gamma_distribution<double> gamma(a, 1.0);
      log_g = std::log(gamma(rng));
    }
    logs[k] = log_g;
    max_log = std::max(max_log, log_g);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out[k] = std::exp(logs[k] - max_log);
    total += out[k];
  }
  for (auto& v : out) v /= total;
}

template <class Rng>
std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return k;
  }
  return probs.size() - 1;
}

}  // namespace ptbcc::detail
