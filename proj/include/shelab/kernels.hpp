#pragma once

// Spatially homogeneous covariance kernels and their spectral measures.
//
// A noise covariance is described by a kernel f >= 0 on R^d together with its
// spectral measure mu(dxi) = s(xi) dxi.  With the Fourier convention
// (F phi)(xi) = integral phi(x) exp(-i xi.x) dx the two sides are linked by
// the duality  integral f(x) phi(x) dx = integral (F phi)(xi) s(xi) dxi  for
// Gaussian test functions phi.  Four families are supported:
//
//   white       f = point mass at 0                s(xi) = (2 pi)^-d
//   riesz       f(x) = |x|^-gamma                  s(xi) = c |xi|^(gamma-d)
//   bessel      f(x) = int_0^inf u^((alpha-d-2)/2)
//                       e^-u e^(-|x|^2/(4u)) du    s(xi) = c (1+|xi|^2)^(-alpha/2)
//   fractional  f(x) = prod_j |x_j|^(2 H_j - 2)    s(xi) = prod_j c_j |xi_j|^(1-2 H_j)
//
// The normalization constants c are fixed by the duality above and are
// verified numerically by validate_normalization (Gaussian test functions at
// several widths).  Spectral moment conditions of the form
//   integral (1 + |xi|^2)^-eta mu(dxi) < inf
// decide which dynamics are well posed (eta = 1) and how rough the resulting
// fields are (smaller admissible eta means smoother fields); each family has
// an explicit critical exponent, computed by minimal_eta.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/quadrature.hpp"

namespace shelab {

enum class KernelFamily { White, Riesz, Bessel, Fractional };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::White: return "white";
    case KernelFamily::Riesz: return "riesz";
    case KernelFamily::Bessel: return "bessel";
    case KernelFamily::Fractional: return "fractional";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "white") return KernelFamily::White;
  if (name == "riesz") return KernelFamily::Riesz;
  if (name == "bessel") return KernelFamily::Bessel;
  if (name == "fractional") return KernelFamily::Fractional;
  throw config_error("unknown kernel family '" + name + "'");
}

// Surface measure of the unit sphere in R^d (d = 1 counts the two points).
inline double sphere_measure(int dim) { return dim == 1 ? 2.0 : 2.0 * M_PI; }

inline double riesz_normalization(int dim, double gamma) {
  return std::pow(2.0 * M_PI, -dim) * std::pow(2.0, dim - gamma) *
         std::pow(M_PI, 0.5 * dim) * std::tgamma(0.5 * (dim - gamma)) /
         std::tgamma(0.5 * gamma);
}

inline double bessel_normalization(int dim, double alpha) {
  return std::pow(M_PI, -0.5 * dim) * std::tgamma(0.5 * alpha);
}

inline double fractional_axis_normalization(double hurst) {
  return riesz_normalization(1, 2.0 - 2.0 * hurst);
}

struct KernelSpec {
  KernelFamily family = KernelFamily::White;
  int dim = 1;
  double gamma = 0.0;         // riesz exponent, 0 < gamma < min(2, dim)
  double alpha = 0.0;         // bessel smoothness, alpha > max(0, dim - 2)
  std::vector<double> hurst;  // fractional indices, each in (1/2, 1)

  static KernelSpec white(int dim) {
    require_dim(dim);
    KernelSpec k;
    k.family = KernelFamily::White;
    k.dim = dim;
    return k;
  }

  static KernelSpec riesz(int dim, double gamma) {
    require_dim(dim);
    if (!(gamma > 0.0) || !(gamma < std::min(2.0, static_cast<double>(dim)))) {
      throw config_error("riesz kernel needs 0 < gamma < min(2, dim)");
    }
    KernelSpec k;
    k.family = KernelFamily::Riesz;
    k.dim = dim;
    k.gamma = gamma;
    return k;
  }

  static KernelSpec bessel(int dim, double alpha) {
    require_dim(dim);
    if (!(alpha > 0.0) || !(alpha > dim - 2)) {
      throw config_error("bessel kernel needs alpha > max(0, dim - 2)");
    }
    KernelSpec k;
    k.family = KernelFamily::Bessel;
    k.dim = dim;
    k.alpha = alpha;
    return k;
  }

  static KernelSpec fractional(int dim, std::vector<double> hurst) {
    require_dim(dim);
    if (hurst.size() != static_cast<std::size_t>(dim)) {
      throw config_error("fractional kernel needs one Hurst index per axis");
    }
    for (double h : hurst) {
      if (!(h > 0.5) || !(h < 1.0)) {
        throw config_error("fractional Hurst indices must lie in (1/2, 1)");
      }
    }
    KernelSpec k;
    k.family = KernelFamily::Fractional;
    k.dim = dim;
    k.hurst = std::move(hurst);
    return k;
  }

  double hurst_sum() const {
    double s = 0.0;
    for (double h : hurst) s += h;
    return s;
  }

  std::string describe() const {
    std::string out = to_string(family) + "(dim=" + std::to_string(dim);
    switch (family) {
      case KernelFamily::White:
        break;
      case KernelFamily::Riesz:
        out += ", gamma=" + std::to_string(gamma);
        break;
      case KernelFamily::Bessel:
        out += ", alpha=" + std::to_string(alpha);
        break;
      case KernelFamily::Fractional:
        out += ", hurst=(";
        for (std::size_t j = 0; j < hurst.size(); ++j) {
          if (j) out += ",";
          out += std::to_string(hurst[j]);
        }
        out += ")";
        break;
    }
    return out + ")";
  }

 private:
  static void require_dim(int dim) {
    if (dim < 1 || dim > 2) {
      throw config_error("kernel dimension must be 1 or 2");
    }
  }
};

namespace detail {

inline double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline void require_point_dim(const KernelSpec& k, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(k.dim)) {
    throw std::invalid_argument("kernel point has wrong dimension");
  }
}

}  // namespace detail

// Pointwise kernel value f(x).  Preconditions: x != 0 for the riesz family,
// every coordinate nonzero for the fractional family, and x != 0 for bessel
// when alpha <= dim (the kernel diverges there); the white kernel has no
// pointwise density at all.
inline double evaluate_f(const KernelSpec& k, std::span<const double> x) {
  detail::require_point_dim(k, x);
  switch (k.family) {
    case KernelFamily::White:
      throw std::domain_error(
          "white-noise covariance is a point mass; it has no pointwise value");
    case KernelFamily::Riesz: {
      const double r2 = detail::squared_norm(x);
      if (!(r2 > 0.0)) {
        throw std::domain_error("riesz kernel is singular at the origin");
      }
      return std::pow(r2, -0.5 * k.gamma);
    }
    case KernelFamily::Bessel: {
      const double r2 = detail::squared_norm(x);
      if (!(r2 > 0.0) && k.alpha <= k.dim) {
        throw std::domain_error("bessel kernel is singular at the origin");
      }
      // f = int u^((alpha-d-2)/2) e^-u e^(-r^2/(4u)) du over (0, inf);
      // substituting u = e^v tames both endpoints (double-exponential decay).
      const double p = 0.5 * (k.alpha - k.dim);
      QuadratureOptions opt;
      opt.rel_tol = 1e-8;
      return integrate_real_line(
          [p, r2](double v) {
            const double u = std::exp(v);
            return std::exp(p * v - u - r2 / (4.0 * u));
          },
          opt);
    }
    case KernelFamily::Fractional: {
      double prod = 1.0;
      for (int j = 0; j < k.dim; ++j) {
        const double a = std::abs(x[static_cast<std::size_t>(j)]);
        if (!(a > 0.0)) {
          throw std::domain_error(
              "fractional kernel is singular on the coordinate axes");
        }
        prod *= std::pow(a, 2.0 * k.hurst[static_cast<std::size_t>(j)] - 2.0);
      }
      return prod;
    }
  }
  return 0.0;
}

// Spectral density s(xi) of the kernel's spectral measure mu(dxi) = s dxi.
// Families with a power-law singularity at xi = 0 (riesz) or on the axes
// (fractional) reject those points.
inline double spectral_density(const KernelSpec& k, std::span<const double> xi) {
  detail::require_point_dim(k, xi);
  switch (k.family) {
    case KernelFamily::White:
      return std::pow(2.0 * M_PI, -k.dim);
    case KernelFamily::Riesz: {
      const double r2 = detail::squared_norm(xi);
      if (!(r2 > 0.0)) {
        throw std::domain_error("riesz spectral density diverges at 0");
      }
      return riesz_normalization(k.dim, k.gamma) *
             std::pow(r2, 0.5 * (k.gamma - k.dim));
    }
    case KernelFamily::Bessel:
      return bessel_normalization(k.dim, k.alpha) *
             std::pow(1.0 + detail::squared_norm(xi), -0.5 * k.alpha);
    case KernelFamily::Fractional: {
      double prod = 1.0;
      for (int j = 0; j < k.dim; ++j) {
        const double a = std::abs(xi[static_cast<std::size_t>(j)]);
        if (!(a > 0.0)) {
          throw std::domain_error(
              "fractional spectral density diverges on the coordinate axes");
        }
        prod *= fractional_axis_normalization(k.hurst[static_cast<std::size_t>(j)]) *
                std::pow(a, 1.0 - 2.0 * k.hurst[static_cast<std::size_t>(j)]);
      }
      return prod;
    }
  }
  return 0.0;
}

// Critical exponent: integral (1+|xi|^2)^-eta mu(dxi) is finite exactly for
// eta strictly above this value.  A non-positive result means every eta > 0
// works.
inline double minimal_eta(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::White: return 0.5 * k.dim;
    case KernelFamily::Riesz: return 0.5 * k.gamma;
    case KernelFamily::Bessel: return 0.5 * (k.dim - k.alpha);
    case KernelFamily::Fractional: return k.dim - k.hurst_sum();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct ConditionReport {
  std::string condition;
  bool holds = false;
  double value = std::numeric_limits<double>::infinity();
  double threshold = 0.0;  // critical exponent the tested eta must exceed
};

namespace detail {

// integral over (0, inf) of rho^p (1 + rho^2)^-q drho, requiring p > -1 and
// p - 2q < -1.  Split at rho = 1.  Near the critical exponent the tail decays
// barely faster than 1/rho, so it is inverted analytically (rho = 1/u) into a
// second power-type endpoint integral instead of being compactified by a
// rational map, which would leave unresolvable mass at huge rho.
inline double radial_power_weight_integral(double p, double q) {
  auto f = [p, q](double rho) {
    return std::pow(rho, p) * std::pow(1.0 + rho * rho, -q);
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  const double head = integrate_power_endpoint(f, 1.0, opt);
  const double tail = integrate_power_endpoint(
      [p, q](double u) {
        return std::pow(u, 2.0 * q - p - 2.0) * std::pow(1.0 + u * u, -q);
      },
      1.0, opt);
  return head + tail;
}

// Angular constant of the planar fractional density:
// integral over the circle of prod_j |omega_j|^(1-2 H_j).
inline double fractional_angular_mass(double h1, double h2) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  return 4.0 * integrate(
                   [h1, h2](double th) {
                     return std::pow(std::cos(th), 1.0 - 2.0 * h1) *
                            std::pow(std::sin(th), 1.0 - 2.0 * h2);
                   },
                   0.0, 0.5 * M_PI, opt);
}

}  // namespace detail

// Spectral moment integral M(eta) = integral (1+|xi|^2)^-eta mu(dxi),
// evaluated by quadrature when finite.
inline ConditionReport check_h_eta(const KernelSpec& k, double eta) {
  if (!(eta > 0.0)) {
    throw config_error("spectral moment exponent eta must be positive");
  }
  ConditionReport rep;
  rep.condition = "spectral moment eta=" + std::to_string(eta);
  rep.threshold = minimal_eta(k);
  rep.holds = eta > rep.threshold;
  if (!rep.holds) return rep;
  switch (k.family) {
    case KernelFamily::White:
      rep.value = std::pow(2.0 * M_PI, -k.dim) * sphere_measure(k.dim) *
                  detail::radial_power_weight_integral(k.dim - 1.0, eta);
      break;
    case KernelFamily::Riesz:
      rep.value = riesz_normalization(k.dim, k.gamma) * sphere_measure(k.dim) *
                  detail::radial_power_weight_integral(k.gamma - 1.0, eta);
      break;
    case KernelFamily::Bessel:
      rep.value = bessel_normalization(k.dim, k.alpha) * sphere_measure(k.dim) *
                  detail::radial_power_weight_integral(k.dim - 1.0,
                                                       eta + 0.5 * k.alpha);
      break;
    case KernelFamily::Fractional: {
      double c = 1.0;
      for (double h : k.hurst) c *= fractional_axis_normalization(h);
      if (k.dim == 1) {
        rep.value = 2.0 * c *
                    detail::radial_power_weight_integral(1.0 - 2.0 * k.hurst[0],
                                                         eta);
      } else {
        rep.value = c *
                    detail::fractional_angular_mass(k.hurst[0], k.hurst[1]) *
                    detail::radial_power_weight_integral(
                        3.0 - 2.0 * k.hurst_sum(), eta);
      }
      break;
    }
  }
  return rep;
}

// Well-posedness condition for the dynamics: the eta = 1 spectral moment.
inline ConditionReport check_integrability(const KernelSpec& k) {
  ConditionReport rep = check_h_eta(k, 1.0);
  rep.condition = "spectral integrability";
  return rep;
}

struct NormalizationProbe {
  double width = 0.0;  // Gaussian test-function parameter s
  double physical = 0.0;
  double spectral = 0.0;
  double rel_mismatch = 0.0;
};

struct NormalizationReport {
  bool ok = false;
  double max_rel_mismatch = 0.0;
  std::vector<NormalizationProbe> probes;
};

namespace detail {

// integral over (0, R] of rho^p g(rho) drho for g smooth and decaying; the
// power-endpoint transform removes the origin singularity.  The tolerance is
// a parameter because nested quadratures (g itself computed by quadrature)
// must keep the outer tolerance looser than the inner one.
template <typename G>
inline double radial_power_integral(double p, const G& g, double cutoff,
                                    double rel_tol = 1e-9) {
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  return integrate_power_endpoint(
      [p, &g](double rho) { return std::pow(rho, p) * g(rho); }, cutoff, opt);
}

}  // namespace detail

// Numerical check of the kernel <-> spectral-density pairing through the
// duality  integral f phi_s = integral (F phi_s) s  with phi_s(x) =
// exp(-s |x|^2) and (F phi_s)(xi) = (pi/s)^(d/2) exp(-|xi|^2 / (4 s)).
// Both sides are evaluated by independent quadratures at several widths.
inline NormalizationReport validate_normalization(
    const KernelSpec& k, std::span<const double> widths = {},
    double tolerance = 1e-4) {
  static constexpr double kDefaultWidths[3] = {0.5, 1.0, 2.0};
  std::span<const double> ws =
      widths.empty() ? std::span<const double>(kDefaultWidths) : widths;
  NormalizationReport report;
  for (const double s : ws) {
    NormalizationProbe probe;
    probe.width = s;
    const double cutoff = 40.0 * std::max(1.0, 2.0 * std::sqrt(s));
    const double fourier_amp = std::pow(M_PI / s, 0.5 * k.dim);
    switch (k.family) {
      case KernelFamily::White: {
        probe.physical = 1.0;  // the point mass picks out phi_s(0)
        probe.spectral =
            std::pow(2.0 * M_PI, -k.dim) * fourier_amp * sphere_measure(k.dim) *
            detail::radial_power_integral(
                k.dim - 1.0,
                [s](double r) { return std::exp(-r * r / (4.0 * s)); }, cutoff);
        break;
      }
      case KernelFamily::Riesz: {
        probe.physical =
            sphere_measure(k.dim) *
            detail::radial_power_integral(
                k.dim - 1.0 - k.gamma,
                [s](double r) { return std::exp(-s * r * r); }, cutoff);
        probe.spectral =
            riesz_normalization(k.dim, k.gamma) * fourier_amp *
            sphere_measure(k.dim) *
            detail::radial_power_integral(
                k.gamma - 1.0,
                [s](double r) { return std::exp(-r * r / (4.0 * s)); }, cutoff);
        break;
      }
      case KernelFamily::Bessel: {
        const KernelSpec& kk = k;
        probe.physical =
            sphere_measure(k.dim) *
            detail::radial_power_integral(
                std::min(0.0, k.alpha - k.dim),
                [&kk, s](double r) {
                  std::vector<double> x(static_cast<std::size_t>(kk.dim), 0.0);
                  x[0] = r;
                  const double singular =
                      std::pow(r, std::min(0.0, kk.alpha - kk.dim));
                  return evaluate_f(kk, x) / singular *
                         std::pow(r, static_cast<double>(kk.dim) - 1.0) *
                         std::exp(-s * r * r);
                },
                cutoff, 3e-7);
        probe.spectral =
            bessel_normalization(k.dim, k.alpha) * fourier_amp *
            sphere_measure(k.dim) *
            detail::radial_power_integral(
                k.dim - 1.0,
                [&kk, s](double r) {
                  return std::pow(1.0 + r * r, -0.5 * kk.alpha) *
                         std::exp(-r * r / (4.0 * s));
                },
                cutoff);
        break;
      }
      case KernelFamily::Fractional: {
        probe.physical = 1.0;
        probe.spectral = 1.0;
        for (double h : k.hurst) {
          probe.physical *=
              2.0 * detail::radial_power_integral(
                        2.0 * h - 2.0,
                        [s](double r) { return std::exp(-s * r * r); }, cutoff);
          probe.spectral *=
              fractional_axis_normalization(h) * std::sqrt(M_PI / s) * 2.0 *
              detail::radial_power_integral(
                  1.0 - 2.0 * h,
                  [s](double r) { return std::exp(-r * r / (4.0 * s)); },
                  cutoff);
        }
        break;
      }
    }
    probe.rel_mismatch = std::abs(probe.physical - probe.spectral) /
                         std::max(std::abs(probe.physical), 1e-300);
    report.max_rel_mismatch = std::max(report.max_rel_mismatch, probe.rel_mismatch);
    report.probes.push_back(probe);
  }
  report.ok = report.max_rel_mismatch <= tolerance;
  return report;
}

// Throws when the kernel's closed-form constants disagree with the duality.
inline void require_valid_normalization(const KernelSpec& k) {
  const NormalizationReport rep = validate_normalization(k);
  if (!rep.ok) {
    throw std::domain_error("kernel normalization mismatch for " + k.describe());
  }
}

}  // namespace shelab
