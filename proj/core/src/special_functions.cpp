#include "ptbcc/special_functions.hpp"

#include <cmath>
#include <string>

#include "ptbcc/error.hpp"

namespace ptbcc {

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::Domain, "special-functions",
                "digamma requires a positive finite argument, got " + std::to_string(x));
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^2n)
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
      inv2 * (1.0 / 120.0 -
      inv2 * (1.0 / 252.0 -
      inv2 * (1.0 / 240.0 -
      inv2 * (1.0 / 132.0 -
      inv2 * (691.0 / 32760.0 -
      inv2 * (1.0 / 12.0)))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double log_beta(std::span<const double> alpha) {
  double sum = 0.0;
  double acc = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(ErrorKind::Domain, "special-functions",
                  "log_beta requires positive finite entries, got " + std::to_string(a));
    }
    acc += std::lgamma(a);
    sum += a;
  }
  return acc - std::lgamma(sum);
}

}  // namespace ptbcc
