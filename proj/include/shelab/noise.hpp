#pragma once

// Lattice discretization of the driving noise and the matching discrete
// Walsh calculus.
//
// On the periodic box the noise has one independent complex Gaussian per
// lattice mode k with per-step second moment
//     E |c_k|^2 = dt * m_L(k),
// where the mode mass m_L(k) discretizes the spectral measure over the
// Brillouin cell of width 2*pi/L around xi_k = (2*pi/L) k:
//   * regular modes use the midpoint value  m_L(k) = (2*pi/L)^d s(xi_k);
//   * modes where the density is singular (the zero mode of the riesz
//     family, zero axes of the fractional family) use the exact cell
//     integral instead, so no mass is dropped.
// The physical increment field is w_n = Re IDFT(c) (unnormalized inverse
// DFT), one field per channel, scaled as a density: smoothing u against a
// test function phi is approximated by sum_z phi(z) u(z) h^d.
//
// The discrete counterpart of the covariance inner product is
//     <phi, psi> = Re sum_ch sum_k m_L(k) Fphi(k) conj(Fpsi(k)),
// with Fphi = h^d DFT(phi).  For white noise this collapses to the plain
// lattice pairing h^d sum_z phi psi.  The discrete Walsh integral of a
// step-indexed kernel g against the increments w_n is
//     I(g) = sum_n sum_ch sum_z g_n(z) w_n(z) h^d,
// whose variance is sum_n dt <g_n, g_n> -- the lattice isometry.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/fft.hpp"
#include "shelab/grid.hpp"
#include "shelab/kernels.hpp"
#include "shelab/quadrature.hpp"
#include "shelab/rng.hpp"

namespace shelab {

namespace detail {

// Exact spectral mass of the one-dimensional cell [-pi/L, pi/L] for a pure
// power density c |xi|^(-p) with p < 1.
inline double power_cell_mass(double coeff, double p, double box_length) {
  const double edge = M_PI / box_length;
  return 2.0 * coeff * std::pow(edge, 1.0 - p) / (1.0 - p);
}

// Exact mass of the planar cell [-pi/L, pi/L]^2 for norm * |xi|^(gamma - 2):
// eight-fold symmetry reduces it to a wedge with radial limit edge/cos(theta).
inline double riesz_plane_cell_mass(double gamma, double box_length) {
  const double edge = M_PI / box_length;
  const double wedge = integrate(
      [gamma](double theta) { return std::pow(std::cos(theta), -gamma); }, 0.0,
      0.25 * M_PI, QuadratureOptions{1e-12, 0.0, 4000, true});
  return riesz_normalization(2, gamma) * 8.0 / gamma * std::pow(edge, gamma) *
         wedge;
}

}  // namespace detail

// Mode-mass table m_L(k), one entry per row-major lattice mode.
inline std::vector<double> mode_masses(const KernelSpec& kernel,
                                       const GridSpec& grid) {
  if (kernel.dim != grid.dim) {
    throw config_error("noise: kernel and grid dimension differ");
  }
  const double L = grid.box_length;
  const double box_factor = std::pow(2.0 * M_PI / L, grid.dim);
  std::vector<double> mass(grid.cells());

  if (kernel.family == KernelFamily::Fractional) {
    // Fully factorized: the cell integral of a product density is the
    // product of per-axis masses, and only zero axes are singular.
    std::vector<std::vector<double>> axis(grid.dim);
    for (int a = 0; a < grid.dim; ++a) {
      const double hurst = kernel.hurst[static_cast<std::size_t>(a)];
      const double coeff = fractional_axis_normalization(hurst);
      const double p = 2.0 * hurst - 1.0;  // density coeff |xi|^(-p)
      axis[a].resize(grid.n);
      for (std::size_t i = 0; i < grid.n; ++i) {
        if (grid.axis_wavenumber(i) == 0) {
          axis[a][i] = detail::power_cell_mass(coeff, p, L);
        } else {
          axis[a][i] =
              (2.0 * M_PI / L) * coeff *
              std::pow(std::abs(grid.axis_frequency(i)), -p);
        }
      }
    }
    for (std::size_t cell = 0; cell < mass.size(); ++cell) {
      double m = 1.0;
      std::size_t rest = cell;
      for (int a = grid.dim - 1; a >= 0; --a) {
        m *= axis[a][rest % grid.n];
        rest /= grid.n;
      }
      mass[cell] = m;
    }
    return mass;
  }

  for (std::size_t cell = 0; cell < mass.size(); ++cell) {
    double xi[2] = {0.0, 0.0};
    std::size_t rest = cell;
    bool zero_mode = true;
    for (int a = grid.dim - 1; a >= 0; --a) {
      xi[a] = grid.axis_frequency(rest % grid.n);
      if (grid.axis_wavenumber(rest % grid.n) != 0) zero_mode = false;
      rest /= grid.n;
    }
    if (kernel.family == KernelFamily::Riesz && zero_mode) {
      mass[cell] =
          grid.dim == 1
              ? detail::power_cell_mass(riesz_normalization(1, kernel.gamma),
                                        kernel.dim - kernel.gamma, L)
              : detail::riesz_plane_cell_mass(kernel.gamma, L);
    } else {
      mass[cell] = box_factor * spectral_density(
                                    kernel, std::span<const double>(
                                                xi, static_cast<std::size_t>(
                                                        grid.dim)));
    }
  }
  return mass;
}

// Per-thread scratch for noise synthesis and spectral pairings.
struct SpectralWorkspace {
  explicit SpectralWorkspace(const GridSpec& grid)
      : fft(grid.dim, grid.n),
        spectrum(grid.cells()),
        mirror(grid.cells()) {}
  CubeFft fft;
  std::vector<cplx> spectrum;
  std::vector<cplx> mirror;
};

// Samples the channel-indexed noise increment fields.  Every draw is a pure
// function of (seed, path, step, channel, mode), so output is independent of
// traversal order and thread count.
class NoiseSampler {
 public:
  NoiseSampler(const KernelSpec& kernel, const GridSpec& grid, int channels,
               std::uint64_t seed)
      : grid_(grid), channels_(channels), seed_(seed),
        white_(kernel.family == KernelFamily::White),
        mass_(mode_masses(kernel, grid)) {
    if (channels < 1) throw config_error("noise: need at least one channel");
    double total = 0.0;
    for (double m : mass_) total += m;
    point_variance_ = grid.dt * total;
    white_sigma_ = std::sqrt(grid.dt / grid.cell_volume());
  }

  const GridSpec& grid() const { return grid_; }
  int channels() const { return channels_; }
  bool white_shortcut() const { return white_; }
  const std::vector<double>& mode_mass() const { return mass_; }
  // Variance of the increment field at a single cell (= dt * total mass).
  double point_variance() const { return point_variance_; }

  // Writes channels() * cells doubles, [channel][cell].
  void sample(std::uint64_t path, std::uint64_t step, double* out,
              SpectralWorkspace& ws) const {
    const std::size_t cells = grid_.cells();
    const std::uint64_t key =
        derive_stream_key(seed_, rng_domain::kNoise, path);
    for (int ch = 0; ch < channels_; ++ch) {
      CounterRng rng(key, substream_word(step, static_cast<std::uint64_t>(ch)));
      double* w = out + static_cast<std::size_t>(ch) * cells;
      if (white_) {
        for (std::size_t z = 0; z < cells; ++z) {
          w[z] = white_sigma_ * rng.normal_at(z);
        }
        continue;
      }
      // Hermitian spectrum: mode k and its mirror share one complex draw.
      for (std::size_t idx = 0; idx < cells; ++idx) {
        const std::size_t mirror = mirror_index(idx);
        if (mirror < idx) continue;  // written together with its partner
        if (mirror == idx) {
          ws.spectrum[idx] =
              std::sqrt(grid_.dt * mass_[idx]) * rng.normal_at(2 * idx);
        } else {
          const double amp = std::sqrt(0.5 * grid_.dt * mass_[idx]);
          const cplx c(amp * rng.normal_at(2 * idx),
                       amp * rng.normal_at(2 * idx + 1));
          ws.spectrum[idx] = c;
          ws.spectrum[mirror] = std::conj(c);
        }
      }
      ws.fft.inverse(ws.spectrum.data());
      for (std::size_t z = 0; z < cells; ++z) w[z] = ws.spectrum[z].real();
    }
  }

  // Row-major index of the frequency-negated mode.
  std::size_t mirror_index(std::size_t idx) const {
    std::size_t out = 0;
    std::size_t axis[2] = {0, 0};
    for (int a = grid_.dim - 1; a >= 0; --a) {
      axis[a] = idx % grid_.n;
      idx /= grid_.n;
    }
    for (int a = 0; a < grid_.dim; ++a) {
      out = out * grid_.n + (grid_.n - axis[a]) % grid_.n;
    }
    return out;
  }

 private:
  GridSpec grid_;
  int channels_;
  std::uint64_t seed_;
  bool white_;
  std::vector<double> mass_;
  double point_variance_ = 0.0;
  double white_sigma_ = 0.0;
};

// Discrete covariance pairing of two channel-indexed lattice fields:
//   Re sum_ch sum_k m_L(k) Fphi(k) conj(Fpsi(k)),  Fphi = h^d DFT(phi).
class SpectralPairing {
 public:
  SpectralPairing(const KernelSpec& kernel, const GridSpec& grid)
      : grid_(grid), mass_(mode_masses(kernel, grid)) {}

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& mode_mass() const { return mass_; }

  // phi and psi hold channels * cells doubles, [channel][cell].
  double pair(std::span<const double> phi, std::span<const double> psi,
              int channels, SpectralWorkspace& ws) const {
    const std::size_t cells = grid_.cells();
    if (phi.size() != psi.size() ||
        phi.size() != static_cast<std::size_t>(channels) * cells) {
      throw std::invalid_argument("pair: field size mismatch");
    }
    const double vol2 = grid_.cell_volume() * grid_.cell_volume();
    double total = 0.0;
    for (int ch = 0; ch < channels; ++ch) {
      const double* p = phi.data() + static_cast<std::size_t>(ch) * cells;
      const double* q = psi.data() + static_cast<std::size_t>(ch) * cells;
      for (std::size_t z = 0; z < cells; ++z) ws.spectrum[z] = p[z];
      ws.fft.forward(ws.spectrum.data());
      if (p == q) {
        for (std::size_t k = 0; k < cells; ++k) {
          total += mass_[k] * std::norm(ws.spectrum[k]);
        }
      } else {
        for (std::size_t z = 0; z < cells; ++z) ws.mirror[z] = q[z];
        ws.fft.forward(ws.mirror.data());
        for (std::size_t k = 0; k < cells; ++k) {
          total += mass_[k] *
                   (ws.spectrum[k] * std::conj(ws.mirror[k])).real();
        }
      }
    }
    return vol2 * total;
  }

  double norm_squared(std::span<const double> phi, int channels,
                      SpectralWorkspace& ws) const {
    return pair(phi, phi, channels, ws);
  }

 private:
  GridSpec grid_;
  std::vector<double> mass_;
};

// Discrete Walsh integral of a step-indexed kernel against noise increments:
// g and w each hold n_steps blocks of channels * cells doubles.
inline double walsh_integral(const GridSpec& grid, int channels,
                             std::span<const double> g,
                             std::span<const double> w) {
  const std::size_t block = static_cast<std::size_t>(channels) * grid.cells();
  const std::size_t total = block * grid.n_steps;
  if (g.size() != total || w.size() != total) {
    throw std::invalid_argument("walsh_integral: field size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) acc += g[i] * w[i];
  return acc * grid.cell_volume();
}

}  // namespace shelab
