#pragma once

// Adaptive Gauss-Kronrod quadrature (7-15 pair) with error-directed interval
// refinement, plus rational changes of variable for half-line and whole-line
// integrals.  The node/weight pair is the classic one: the embedded 7-point
// Gauss rule provides the error estimate for the 15-point Kronrod value.
//
// The adaptive driver keeps a max-heap of subintervals ordered by local error
// and always splits the worst one.  Endpoint singularities that are merely
// integrable (|x|^{-p}, p < 1) are handled by this bisection cascade because
// no node ever touches an interval endpoint; callers integrating sharper
// singularities should substitute them away first.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

namespace shelab {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_intervals = 4000;
  // When false, running out of intervals returns the best estimate instead of
  // throwing.  The default is strict: silent inaccuracy is worse than a loud
  // failure.
  bool strict = true;
};

namespace detail {

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights on the odd-indexed abscissae.
inline constexpr double kKronrodX[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGaussW[4] = {0.129484966168870, 0.279705391489277,
                                      0.381830050505119, 0.417959183673469};

template <typename F>
inline void kronrod15(const F& f, double a, double b, double& value,
                      double& error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kKronrodX[i]);
    fv[14 - i] = f(c + h * kKronrodX[i]);
  }
  fv[7] = f(c);
  double kronrod = kKronrodW[7] * fv[7];
  double gauss = kGaussW[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kronrod += kKronrodW[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) {
      gauss += kGaussW[i / 2] * (fv[i] + fv[14 - i]);
    }
  }
  value = kronrod * h;
  // The standard QUADPACK rescaling of |K15 - G7| is overkill here; the raw
  // difference is a serviceable (slightly conservative) error estimate once
  // the adaptive driver takes over.
  error = std::abs((kronrod - gauss) * h);
}

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace detail

// Integrate f over the finite interval [a, b].
template <typename F>
inline double integrate(const F& f, double a, double b,
                        const QuadratureOptions& opt = {}) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    throw std::invalid_argument("integrate: interval endpoints out of order");
  }
  std::priority_queue<detail::Interval> heap;
  detail::Interval whole{a, b, 0.0, 0.0};
  detail::kronrod15(f, a, b, whole.value, whole.error);
  double total = whole.value;
  double total_err = whole.error;
  heap.push(whole);
  int used = 1;
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (used >= opt.max_intervals) {
      if (opt.strict) {
        throw std::runtime_error(
            "integrate: failed to reach requested tolerance");
      }
      break;
    }
    detail::Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Interval collapsed to machine precision; accept its contribution.
      total_err -= worst.error;
      continue;
    }
    detail::Interval left{worst.a, mid, 0.0, 0.0};
    detail::Interval right{mid, worst.b, 0.0, 0.0};
    detail::kronrod15(f, left.a, left.b, left.value, left.error);
    detail::kronrod15(f, right.a, right.b, right.value, right.error);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++used;
  }
  if (!std::isfinite(total)) {
    throw std::runtime_error("integrate: integrand produced a non-finite value");
  }
  return total;
}

// Integrate f over [0, inf) via x = t / (1 - t).
template <typename F>
inline double integrate_half_line(const F& f, const QuadratureOptions& opt = {}) {
  auto g = [&f](double t) {
    const double om = 1.0 - t;
    const double x = t / om;
    return f(x) / (om * om);
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Integrate f over (-inf, inf) via x = t / (1 - t^2).
template <typename F>
inline double integrate_real_line(const F& f, const QuadratureOptions& opt = {}) {
  auto g = [&f](double t) {
    const double d = 1.0 - t * t;
    const double x = t / d;
    return f(x) * (1.0 + t * t) / (d * d);
  };
  return integrate(g, -1.0, 1.0, opt);
}

// Integrate f over (0, b] when f(r) ~ r^p near zero with p > -1.  The
// substitution r = b v^4 turns any such endpoint behaviour with p >= -3/4
// into a C^1 integrand; for p down to -1 the adaptive cascade finishes the
// job quickly because the transformed singularity is much softer.
template <typename F>
inline double integrate_power_endpoint(const F& f, double b,
                                       const QuadratureOptions& opt = {}) {
  if (!(b > 0.0)) {
    throw std::invalid_argument("integrate_power_endpoint: need b > 0");
  }
  auto g = [&f, b](double v) {
    const double v2 = v * v;
    const double r = b * v2 * v2;
    return f(r) * 4.0 * b * v2 * v;
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace shelab
