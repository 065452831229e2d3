#pragma once

// The variance functional of the stochastic heat flow and its growth laws.
//
// For a covariance kernel with spectral measure mu, the mild-solution
// variance accumulated over a horizon t is
//
//   Phi(t) = int_0^t int_{R^d} exp(-r |xi|^2) mu(dxi) dr,
//
// i.e. the time integral of the "rate" R(r) = int exp(-r|xi|^2) mu(dxi), the
// squared Fourier mass of the heat kernel at elapsed time r weighted by mu.
// (The heat semigroup here is generated by Laplacian/2, whose kernel has
// |F Gamma(r)|^2 = exp(-r |xi|^2).)
//
// White, riesz and fractional kernels give exact power laws
// Phi(t) = c t^beta whose prefactors come from one-time quadratures; the
// bessel family has no closed form and is integrated numerically.  The
// expected growth exponents are
//
//   white: 1 - d/2   riesz: 1 - gamma/2   bessel: 1 + (alpha-d)/2
//   fractional: 1 + sum(H) - d
//
// (for bessel the power law is only asymptotic as t -> 0; at laboratory
// scales the effective slope is visibly below the limit, and the scaling
// checks report that honestly).
//
// Also provided here:
//  * check_h1            -- fits Phi(eps) over a small-eps grid and compares
//                           the slope against the family exponent;
//  * check_h2            -- the same for two weighted refinements of Phi:
//                           (i) the |x|^gamma2-weighted heat-kernel pairing
//                           g(r) = <|x|^gamma2 Gamma(r,.), Gamma(r,.)>_mu
//                           integrated in r, and (ii) int_0^eps r^gamma1 R(r) dr;
//  * check_two_sided     -- monotone lower growth and an upper envelope
//                           Phi(t) <= C t^(1-eta);
//  * WeightedHeatPairing -- the Fourier-side evaluation of g(r), using a
//                           cached transform of |a|^gamma2 exp(-|a|^2/2).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/fit.hpp"
#include "shelab/kernels.hpp"
#include "shelab/quadrature.hpp"

namespace shelab {

// Family growth exponent beta in Phi(t) ~ c t^beta as t -> 0.
inline double phi_growth_exponent(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::White: return 1.0 - 0.5 * k.dim;
    case KernelFamily::Riesz: return 1.0 - 0.5 * k.gamma;
    case KernelFamily::Bessel: return 1.0 + 0.5 * (k.alpha - k.dim);
    case KernelFamily::Fractional: return 1.0 + k.hurst_sum() - k.dim;
  }
  return 0.0;
}

namespace detail {

inline void require_integrable(const KernelSpec& k) {
  if (!check_integrability(k).holds) {
    throw std::domain_error(
        "variance functional diverges: spectral integrability fails for " +
        k.describe());
  }
}

// One-time radial constants J(p) = int_0^inf exp(-v^2) v^p dv computed by
// quadrature (p > -1).
inline double gaussian_radial_moment(double p) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  return integrate_power_endpoint(
      [p](double v) { return std::pow(v, p) * std::exp(-v * v); }, 10.0, opt);
}

}  // namespace detail

// R(r) = int exp(-r |xi|^2) mu(dxi), the instantaneous variance rate.
inline double phi_rate(const KernelSpec& k, double r) {
  if (!(r > 0.0)) {
    throw std::invalid_argument("phi_rate: need r > 0");
  }
  switch (k.family) {
    case KernelFamily::White: {
      return std::pow(2.0 * M_PI, -k.dim) * std::pow(M_PI / r, 0.5 * k.dim);
    }
    case KernelFamily::Riesz: {
      static thread_local double cached_gamma = -1.0, cached_j = 0.0;
      if (cached_gamma != k.gamma) {
        cached_j = detail::gaussian_radial_moment(k.gamma - 1.0);
        cached_gamma = k.gamma;
      }
      return riesz_normalization(k.dim, k.gamma) * sphere_measure(k.dim) *
             cached_j * std::pow(r, -0.5 * k.gamma);
    }
    case KernelFamily::Bessel: {
      // Substituting w = rho sqrt(r) keeps the integrand well conditioned for
      // every r: R(r) = c S r^{-d/2} int exp(-w^2) (1+w^2/r)^{-alpha/2} w^{d-1} dw.
      QuadratureOptions opt;
      opt.rel_tol = 1e-8;
      const double body = integrate_power_endpoint(
          [&k, r](double w) {
            return std::exp(-w * w) *
                   std::pow(1.0 + w * w / r, -0.5 * k.alpha) *
                   std::pow(w, k.dim - 1.0);
          },
          10.0, opt);
      return bessel_normalization(k.dim, k.alpha) * sphere_measure(k.dim) *
             std::pow(r, -0.5 * k.dim) * body;
    }
    case KernelFamily::Fractional: {
      double rate = 1.0;
      for (double h : k.hurst) {
        rate *= fractional_axis_normalization(h) * 2.0 *
                detail::gaussian_radial_moment(1.0 - 2.0 * h) *
                std::pow(r, h - 1.0);
      }
      return rate;
    }
  }
  return 0.0;
}

struct PhiProfile {
  std::vector<double> t;
  std::vector<double> value;
  bool closed_form = false;
  double beta = 0.0;       // exact growth exponent for closed-form families
  double prefactor = 0.0;  // Phi(t) = prefactor * t^beta when closed_form
};

// Phi at a single time.
inline double phi_at(const KernelSpec& k, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("phi_at: need t > 0");
  }
  detail::require_integrable(k);
  const double beta = phi_growth_exponent(k);
  switch (k.family) {
    case KernelFamily::White:
      return std::pow(2.0 * M_PI, -k.dim) * std::pow(M_PI, 0.5 * k.dim) *
             std::pow(t, beta) / beta;
    case KernelFamily::Riesz:
      return riesz_normalization(k.dim, k.gamma) * sphere_measure(k.dim) *
             detail::gaussian_radial_moment(k.gamma - 1.0) *
             std::pow(t, beta) / beta;
    case KernelFamily::Fractional: {
      double c = 1.0;
      for (double h : k.hurst) {
        c *= fractional_axis_normalization(h) * 2.0 *
             detail::gaussian_radial_moment(1.0 - 2.0 * h);
      }
      return c * std::pow(t, beta) / beta;
    }
    case KernelFamily::Bessel: {
      QuadratureOptions opt;
      opt.rel_tol = 1e-6;
      return integrate_power_endpoint(
          [&k](double r) { return phi_rate(k, r); }, t, opt);
    }
  }
  return 0.0;
}

// Phi over an ascending grid of times.
inline PhiProfile compute_phi(const KernelSpec& k, std::span<const double> t_grid) {
  if (t_grid.empty()) {
    throw std::invalid_argument("compute_phi: empty time grid");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw std::invalid_argument(
          "compute_phi: time grid must be positive and strictly increasing");
    }
  }
  detail::require_integrable(k);
  PhiProfile profile;
  profile.t.assign(t_grid.begin(), t_grid.end());
  profile.value.resize(t_grid.size());
  profile.beta = phi_growth_exponent(k);
  if (k.family == KernelFamily::Bessel) {
    profile.closed_form = false;
    // Integrate rate increments between grid points; only the first segment
    // sees the r -> 0 power singularity.
    QuadratureOptions opt;
    opt.rel_tol = 1e-6;
    double acc = integrate_power_endpoint(
        [&k](double r) { return phi_rate(k, r); }, t_grid[0], opt);
    profile.value[0] = acc;
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      acc += integrate([&k](double r) { return phi_rate(k, r); }, t_grid[i - 1],
                       t_grid[i], opt);
      profile.value[i] = acc;
    }
  } else {
    profile.closed_form = true;
    profile.prefactor = phi_at(k, 1.0);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      profile.value[i] = profile.prefactor * std::pow(t_grid[i], profile.beta);
    }
  }
  return profile;
}

// Physical-side cross-check for spatially uncorrelated noise: the variance
// rate is the squared L^2 mass of the heat kernel, int Gamma(r,x)^2 dx =
// (4 pi r)^{-d/2}, integrated in time by quadrature.
inline double phi_white_physical(int dim, double t) {
  if (dim != 1) {
    throw std::domain_error(
        "physical-route variance requires dim = 1 (not integrable otherwise)");
  }
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  return integrate_power_endpoint(
      [dim](double r) { return std::pow(4.0 * M_PI * r, -0.5 * dim); }, t, opt);
}

struct ScalingReport {
  std::string quantity;
  double fitted_exponent = 0.0;
  double reference_exponent = 0.0;
  double tolerance = 0.0;
  double r_squared = 0.0;
  bool pass = false;
  std::vector<double> abscissae;
  std::vector<double> values;
};

namespace detail {

inline std::vector<double> default_epsilon_grid() {
  std::vector<double> eps;
  for (int k = 0; k <= 16; ++k) {
    eps.push_back(std::pow(10.0, -3.0 + static_cast<double>(k) / 8.0));
  }
  return eps;
}

inline ScalingReport fit_scaling(std::string quantity,
                                 std::vector<double> abscissae,
                                 std::vector<double> values, double reference,
                                 double tolerance, double min_r2 = 0.999) {
  const PowerFit fit = fit_power_law(abscissae, values);
  ScalingReport rep;
  rep.quantity = std::move(quantity);
  rep.fitted_exponent = fit.exponent;
  rep.reference_exponent = reference;
  rep.tolerance = tolerance;
  rep.r_squared = fit.r_squared;
  rep.pass = std::abs(fit.exponent - reference) <= tolerance &&
             fit.r_squared >= min_r2;
  rep.abscissae = std::move(abscissae);
  rep.values = std::move(values);
  return rep;
}

}  // namespace detail

// Small-time growth law of Phi: fit Phi(eps) ~ c eps^beta over a logarithmic
// grid and compare against the family exponent within +-0.02.
inline ScalingReport check_h1(const KernelSpec& k,
                              std::span<const double> eps_grid = {}) {
  std::vector<double> eps = eps_grid.empty()
                                ? detail::default_epsilon_grid()
                                : std::vector<double>(eps_grid.begin(),
                                                      eps_grid.end());
  const PhiProfile profile = compute_phi(k, eps);
  return detail::fit_scaling("phi small-time growth", std::move(eps),
                             profile.value, phi_growth_exponent(k), 0.02);
}

// ---------------------------------------------------------------------------
// Weighted heat-kernel pairing for the refined growth law.
//
// g(r) = int |x|^gamma2 Gamma(r,x) Gamma(r,x-y)... evaluated in Fourier form:
// with psi(a) = |a|^gamma2 (2 pi)^{-d/2} exp(-|a|^2/2) and its transform
// psihat, the scaling Gamma(r,x) = r^{-d/2} psi_0(x/sqrt r) gives
//   F[|x|^gamma2 Gamma(r, .)](xi) = r^{gamma2/2} psihat(|xi| sqrt r),
// so that
//   g(r) = r^{gamma2/2} int psihat(|xi| sqrt r) exp(-r |xi|^2 / 2) mu(dxi).
// psihat is cached on a uniform spline because it is re-evaluated thousands
// of times inside the r- and eps-quadratures.
// ---------------------------------------------------------------------------

namespace detail {

class UniformCubicSpline {
 public:
  UniformCubicSpline() = default;
  UniformCubicSpline(double x0, double dx, std::vector<double> y)
      : x0_(x0), dx_(dx), y_(std::move(y)) {
    const std::size_t n = y_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    // Natural cubic spline: m_0 = m_{n-1} = 0 and for the interior nodes
    //   m_{i-1} + 4 m_i + m_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}) / dx^2,
    // solved by a Thomas sweep (sub- and super-diagonals are 1).
    const std::size_t interior = n - 2;
    std::vector<double> piv(interior), rhs(interior);
    for (std::size_t j = 0; j < interior; ++j) {
      rhs[j] = 6.0 * (y_[j] - 2.0 * y_[j + 1] + y_[j + 2]) / (dx_ * dx_);
    }
    piv[0] = 4.0;
    for (std::size_t j = 1; j < interior; ++j) {
      const double w = 1.0 / piv[j - 1];
      piv[j] = 4.0 - w;
      rhs[j] -= w * rhs[j - 1];
    }
    for (std::size_t j = interior; j-- > 0;) {
      m_[j + 1] = (rhs[j] - m_[j + 2]) / piv[j];
    }
  }

  double operator()(double x) const {
    if (y_.empty()) return 0.0;
    if (x <= x0_) return y_.front();
    const double s = (x - x0_) / dx_;
    const auto n = y_.size();
    if (s >= static_cast<double>(n - 1)) return 0.0;  // table decays to ~0
    const std::size_t i = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i);
    const double a = 1.0 - t;
    return a * y_[i] + t * y_[i + 1] +
           (dx_ * dx_ / 6.0) *
               ((a * a * a - a) * m_[i] + (t * t * t - t) * m_[i + 1]);
  }

 private:
  double x0_ = 0.0, dx_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;
};

}  // namespace detail

class WeightedHeatPairing {
 public:
  WeightedHeatPairing(const KernelSpec& kernel, double gamma2)
      : kernel_(kernel), gamma2_(gamma2) {
    detail::require_integrable(kernel_);
    if (!(gamma2 > 0.0)) {
      throw config_error("weighted pairing exponent gamma2 must be positive");
    }
    build_transform_table();
    if (kernel_.dim == 2 && kernel_.family == KernelFamily::Fractional) {
      angular_ = detail::fractional_angular_mass(kernel_.hurst[0],
                                                 kernel_.hurst[1]);
    }
  }

  // g(r) = r^{gamma2/2} * int psihat(|xi| sqrt r) exp(-r|xi|^2/2) mu(dxi).
  double operator()(double r) const {
    if (!(r > 0.0)) {
      throw std::invalid_argument("weighted pairing: need r > 0");
    }
    const double sr = std::sqrt(r);
    QuadratureOptions opt;
    opt.rel_tol = 3e-8;
    // Substitute w = |xi| sqrt r and fold the radial measure into the
    // integrand; the origin behaviour is a pure power (exponent > -1).
    const double body = integrate_power_endpoint(
        [this, sr](double w) {
          return transform_(w) * std::exp(-0.5 * w * w) * radial_mass(w / sr);
        },
        w_max_, opt);
    return std::pow(r, 0.5 * gamma2_) * body / sr;
  }

 private:
  // Radial spectral mass: mu restricted to |xi| = rho, including the surface
  // measure (and for the planar fractional family its angular constant).
  double radial_mass(double rho) const {
    switch (kernel_.family) {
      case KernelFamily::White:
        return std::pow(2.0 * M_PI, -kernel_.dim) * sphere_measure(kernel_.dim) *
               std::pow(rho, kernel_.dim - 1.0);
      case KernelFamily::Riesz:
        return riesz_normalization(kernel_.dim, kernel_.gamma) *
               sphere_measure(kernel_.dim) * std::pow(rho, kernel_.gamma - 1.0);
      case KernelFamily::Bessel:
        return bessel_normalization(kernel_.dim, kernel_.alpha) *
               sphere_measure(kernel_.dim) *
               std::pow(1.0 + rho * rho, -0.5 * kernel_.alpha) *
               std::pow(rho, kernel_.dim - 1.0);
      case KernelFamily::Fractional: {
        if (kernel_.dim == 1) {
          return 2.0 * fractional_axis_normalization(kernel_.hurst[0]) *
                 std::pow(rho, 1.0 - 2.0 * kernel_.hurst[0]);
        }
        double c = angular_;
        for (double h : kernel_.hurst) c *= fractional_axis_normalization(h);
        return c * std::pow(rho, 3.0 - 2.0 * kernel_.hurst_sum());
      }
    }
    return 0.0;
  }

  void build_transform_table() {
    // psihat(w) = F[|a|^gamma2 (2 pi)^{-d/2} exp(-|a|^2/2)](w), radial in w.
    const double dw = 0.01;
    const int n = static_cast<int>(w_max_ / dw) + 1;
    std::vector<double> values(static_cast<std::size_t>(n));
    QuadratureOptions opt;
    opt.rel_tol = 1e-9;
    opt.max_intervals = 20000;
    for (int i = 0; i < n; ++i) {
      const double w = dw * i;
      if (kernel_.dim == 1) {
        values[static_cast<std::size_t>(i)] =
            2.0 * integrate_power_endpoint(
                      [this, w](double a) {
                        return std::pow(a, gamma2_) *
                               std::pow(2.0 * M_PI, -0.5) *
                               std::exp(-0.5 * a * a) * std::cos(w * a);
                      },
                      12.0, opt);
      } else {
        values[static_cast<std::size_t>(i)] =
            integrate_power_endpoint(
                [this, w](double a) {
                  return std::pow(a, gamma2_ + 1.0) * std::exp(-0.5 * a * a) *
                         std::cyl_bessel_j(0.0, w * a);
                },
                12.0, opt);
      }
    }
    transform_ = detail::UniformCubicSpline(0.0, dw, std::move(values));
  }

  KernelSpec kernel_;
  double gamma2_ = 0.0;
  double angular_ = 0.0;
  double w_max_ = 16.0;
  detail::UniformCubicSpline transform_;
};

// Convenience single-shot evaluation (builds the transform table each call;
// prefer holding a WeightedHeatPairing when evaluating many r).
inline double h2_weighted_pairing(const KernelSpec& k, double gamma2, double r) {
  return WeightedHeatPairing(k, gamma2)(r);
}

struct H2Report {
  ScalingReport weighted;  // (i): int_0^eps g(r) dr ~ eps^{beta + gamma2/2}
  ScalingReport plain;     // (ii): int_0^eps r^gamma1 R(r) dr ~ eps^{beta + gamma1}
  bool weighted_dominates = false;  // beta1 > max(gamma2, beta)
  bool plain_dominates = false;     // beta2 > gamma1
  bool pass = false;
};

// Refined growth law: fits the two weighted small-time integrals of the
// variance rate.  gamma1 and gamma2 must sit strictly inside the windows
// allowed by the kernel roughness: gamma1 < (1 - eta)/2 and gamma2 < 1 - eta
// with eta the critical spectral exponent (clamped at 0).
inline H2Report check_h2(const KernelSpec& k, double gamma1, double gamma2,
                         std::span<const double> eps_grid = {}) {
  const double eta_min = std::max(0.0, minimal_eta(k));
  if (!(eta_min < 1.0)) {
    throw config_error("kernel too rough: no admissible Holder window");
  }
  if (!(gamma1 > 0.0) || !(gamma1 < 0.5 * (1.0 - eta_min))) {
    throw config_error("gamma1 outside (0, (1 - eta)/2)");
  }
  if (!(gamma2 > 0.0) || !(gamma2 < 1.0 - eta_min)) {
    throw config_error("gamma2 outside (0, 1 - eta)");
  }
  std::vector<double> eps = eps_grid.empty()
                                ? detail::default_epsilon_grid()
                                : std::vector<double>(eps_grid.begin(),
                                                      eps_grid.end());
  const double beta = phi_growth_exponent(k);

  WeightedHeatPairing pairing(k, gamma2);
  QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  std::vector<double> weighted_values(eps.size());
  double acc = integrate_power_endpoint([&pairing](double r) { return pairing(r); },
                                        eps[0], opt);
  weighted_values[0] = acc;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    acc += integrate([&pairing](double r) { return pairing(r); }, eps[i - 1],
                     eps[i], opt);
    weighted_values[i] = acc;
  }

  std::vector<double> plain_values(eps.size());
  auto weighted_rate = [&k, gamma1](double r) {
    return std::pow(r, gamma1) * phi_rate(k, r);
  };
  acc = integrate_power_endpoint(weighted_rate, eps[0], opt);
  plain_values[0] = acc;
  for (std::size_t i = 1; i < eps.size(); ++i) {
    acc += integrate(weighted_rate, eps[i - 1], eps[i], opt);
    plain_values[i] = acc;
  }

  H2Report rep;
  rep.weighted = detail::fit_scaling("weighted pairing growth", eps,
                                     weighted_values, beta + 0.5 * gamma2, 0.02);
  rep.plain = detail::fit_scaling("power-weighted rate growth", eps,
                                  plain_values, beta + gamma1, 0.02);
  rep.weighted_dominates =
      rep.weighted.fitted_exponent > std::max(gamma2, beta);
  rep.plain_dominates = rep.plain.fitted_exponent > gamma1;
  rep.pass = rep.weighted.pass && rep.plain.pass && rep.weighted_dominates &&
             rep.plain_dominates;
  return rep;
}

struct TwoSidedReport {
  double min_increment_rate = 0.0;  // min of Phi increments per unit time
  double sup_ratio = 0.0;           // sup of Phi(t) / t^(1-eta)
  double ratio_at_smallest = 0.0;
  double ratio_at_largest = 0.0;
  bool pass_lower = false;
  bool pass_upper = false;
  bool pass = false;
};

// Two-sided growth control of Phi on (0, t_max]: strictly increasing (the
// lower side) and dominated by t^(1-eta) (the upper side).  The upper side
// can only hold when eta is strictly above the kernel's critical exponent;
// the check observes the ratio on a logarithmic grid and fails if it grows
// toward small times.
inline TwoSidedReport check_two_sided(const KernelSpec& k, double eta,
                                      double t_max, int n_grid = 33) {
  if (!(t_max > 0.0) || n_grid < 5) {
    throw std::invalid_argument("check_two_sided: bad grid");
  }
  TwoSidedReport rep;
  // Lower: uniform grid increments.
  {
    std::vector<double> t(static_cast<std::size_t>(n_grid));
    for (int i = 0; i < n_grid; ++i) {
      t[static_cast<std::size_t>(i)] =
          t_max * static_cast<double>(i + 1) / static_cast<double>(n_grid);
    }
    const PhiProfile profile = compute_phi(k, t);
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < t.size(); ++i) {
      min_rate = std::min(min_rate, (profile.value[i] - profile.value[i - 1]) /
                                        (t[i] - t[i - 1]));
    }
    rep.min_increment_rate = min_rate;
    rep.pass_lower = min_rate > 0.0;
  }
  // Upper: logarithmic grid over four decades.
  {
    std::vector<double> t(static_cast<std::size_t>(n_grid));
    for (int i = 0; i < n_grid; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(n_grid - 1);
      t[static_cast<std::size_t>(i)] = t_max * std::pow(10.0, -4.0 * (1.0 - frac));
    }
    const PhiProfile profile = compute_phi(k, t);
    double sup = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      sup = std::max(sup, profile.value[i] / std::pow(t[i], 1.0 - eta));
    }
    rep.sup_ratio = sup;
    rep.ratio_at_smallest =
        profile.value.front() / std::pow(t.front(), 1.0 - eta);
    rep.ratio_at_largest = profile.value.back() / std::pow(t.back(), 1.0 - eta);
    rep.pass_upper = rep.ratio_at_smallest <= rep.ratio_at_largest * (1.0 + 1e-9);
  }
  rep.pass = rep.pass_lower && rep.pass_upper;
  return rep;
}

}  // namespace shelab
