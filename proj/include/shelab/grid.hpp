#pragma once

// Periodic lattice geometry for the simulations.
//
// The dynamics of interest live on the whole space with decaying data; the
// simulation runs on a periodic box [0, L)^d chosen large enough that the
// heat flow cannot feel the wrap-around within the horizon.  The box rule
// makes this quantitative: with Gamma(t, x) = (2 pi t)^{-d/2} e^{-|x|^2/(2t)}
// (the kernel of Laplacian/2), the wrap-around contamination after time T at
// distance W from the observation window is bounded by
// Gamma(T, L/2 - W) L^d, and L is chosen so that this is at most 1e-10.
//
// Lattice conventions (shared by every consumer):
//  * N points per axis (power of two), spacing h = L/N, cells indexed
//    row-major;
//  * axis frequency of index k is xi = (2 pi / L) k_signed with
//    k_signed in [-N/2 + 1, N/2];
//  * fields are stored as [component][cell] blocks of doubles.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/fft.hpp"

namespace shelab {

inline constexpr double kHeatLeakBound = 1e-10;

// Gaussian heat kernel of Laplacian/2 at radius rho.
inline double heat_kernel_value(int dim, double t, double rho) {
  return std::pow(2.0 * M_PI * t, -0.5 * dim) *
         std::exp(-rho * rho / (2.0 * t));
}

// Wrap-around contamination proxy: kernel mass at the half-box distance
// (reduced by the probe window) scaled by the box volume.
inline double heat_leakage(int dim, double t, double box_length,
                           double probe_window = 0.0) {
  const double reach = 0.5 * box_length - probe_window;
  if (!(reach > 0.0)) return std::numeric_limits<double>::infinity();
  return heat_kernel_value(dim, t, reach) * std::pow(box_length, dim);
}

// Smallest box with heat_leakage <= bound, found by bisection.  The result
// scales like c(d) sqrt(T) (+ twice the probe window), with c ~ 14.1 on the
// line and ~ 14.6 in the plane.
inline double box_length_for(int dim, double t_final, double probe_window = 0.0,
                             double bound = kHeatLeakBound) {
  if (dim < 1 || dim > 2) throw config_error("box rule: dim must be 1 or 2");
  if (!(t_final > 0.0)) throw config_error("box rule: need t_final > 0");
  if (probe_window < 0.0) throw config_error("box rule: negative probe window");
  const double scale = std::sqrt(t_final);
  double lo = 2.0 * probe_window + 2.0 * scale;
  double hi = 2.0 * probe_window + 60.0 * scale;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (heat_leakage(dim, t_final, mid, probe_window) > bound) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

struct GridSpec {
  int dim = 1;
  std::size_t n = 0;          // points per axis, power of two >= 8
  double box_length = 0.0;    // L
  double dt = 0.0;
  std::size_t n_steps = 0;

  double h() const { return box_length / static_cast<double>(n); }
  double t_final() const { return dt * static_cast<double>(n_steps); }
  std::size_t cells() const {
    std::size_t c = 1;
    for (int a = 0; a < dim; ++a) c *= n;
    return c;
  }
  double cell_volume() const { return std::pow(h(), dim); }

  // Signed lattice wavenumber of an axis index: idx <= N/2 ? idx : idx - N.
  long axis_wavenumber(std::size_t idx) const {
    return idx <= n / 2 ? static_cast<long>(idx)
                        : static_cast<long>(idx) - static_cast<long>(n);
  }
  double axis_frequency(std::size_t idx) const {
    return 2.0 * M_PI * static_cast<double>(axis_wavenumber(idx)) / box_length;
  }
  // |xi_k|^2 for a row-major cell/mode index.
  double frequency_squared(std::size_t cell) const {
    double s = 0.0;
    for (int a = dim - 1; a >= 0; --a) {
      const double xi = axis_frequency(cell % n);
      s += xi * xi;
      cell /= n;
    }
    return s;
  }
  // Physical coordinate of a cell along each axis (positions in [0, L)).
  void cell_coordinates(std::size_t cell, double* x) const {
    for (int a = dim - 1; a >= 0; --a) {
      x[a] = h() * static_cast<double>(cell % n);
      cell /= n;
    }
  }
  // Row-major cell index of per-axis indices.
  std::size_t cell_index(const std::size_t* idx) const {
    std::size_t c = 0;
    for (int a = 0; a < dim; ++a) c = c * n + idx[a];
    return c;
  }
  // Nearest lattice cell to a physical point (coordinates wrapped into [0,L)).
  std::size_t nearest_cell(const double* x) const {
    std::size_t c = 0;
    for (int a = 0; a < dim; ++a) {
      double frac = x[a] / box_length;
      frac -= std::floor(frac);
      std::size_t idx = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n)));
      if (idx >= n) idx = 0;
      c = c * n + idx;
    }
    return c;
  }
};

// Validated grid with the box chosen by the leakage rule unless an explicit
// length is given (an explicit length must itself satisfy the rule).
inline GridSpec make_grid(int dim, std::size_t n, std::size_t n_steps,
                          double t_final, double probe_window = 0.0,
                          double explicit_box = 0.0) {
  if (dim < 1 || dim > 2) throw config_error("grid: dim must be 1 or 2");
  if (!is_power_of_two(n) || n < 8) {
    throw config_error("grid: points per axis must be a power of two >= 8");
  }
  if (n_steps == 0) throw config_error("grid: need at least one time step");
  if (!(t_final > 0.0)) throw config_error("grid: need t_final > 0");
  GridSpec g;
  g.dim = dim;
  g.n = n;
  g.n_steps = n_steps;
  g.dt = t_final / static_cast<double>(n_steps);
  g.box_length = explicit_box > 0.0
                     ? explicit_box
                     : box_length_for(dim, t_final, probe_window);
  if (heat_leakage(dim, t_final, g.box_length, probe_window) > kHeatLeakBound) {
    throw config_error(
        "grid: box too small, wrap-around leakage exceeds " +
        std::to_string(kHeatLeakBound));
  }
  return g;
}

// Multi-component lattice field, [component][cell].
struct Fields {
  std::size_t components = 0;
  std::size_t cells = 0;
  std::vector<double> data;

  Fields() = default;
  Fields(std::size_t components, std::size_t cells)
      : components(components), cells(cells), data(components * cells, 0.0) {}

  double* comp(std::size_t c) { return data.data() + c * cells; }
  const double* comp(std::size_t c) const { return data.data() + c * cells; }
  double& at(std::size_t c, std::size_t z) { return data[c * cells + z]; }
  double at(std::size_t c, std::size_t z) const { return data[c * cells + z]; }
};

}  // namespace shelab
