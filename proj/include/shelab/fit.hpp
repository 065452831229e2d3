#pragma once

// Ordinary least squares on log-log data, used to read off power-law
// exponents from sampled curves y ~ c * x^beta.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace shelab {

struct PowerFit {
  double exponent = 0.0;       // slope of log y against log x
  double log_prefactor = 0.0;  // intercept, i.e. log c
  double r_squared = 0.0;      // coefficient of determination of the log fit
};

inline PowerFit fit_power_law(std::span<const double> x,
                              std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) {
    throw std::invalid_argument(
        "fit_power_law: need matching arrays with at least 3 points");
  }
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument(
          "fit_power_law: all coordinates must be positive");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit_power_law: abscissae are all equal");
  }
  PowerFit fit;
  fit.exponent = sxy / sxx;
  fit.log_prefactor = my - fit.exponent * mx;
  const double ss_res = syy - sxy * sxy / sxx;
  fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace shelab
