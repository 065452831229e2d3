#pragma once

// Pathwise derivative calculus for the spectral exponential-Euler scheme.
//
// For the scalar output F = u_target(t_out, x0) of one simulated path, the
// derivative of F with respect to the noise increment w_n^j(z) follows from
// one reverse (adjoint) sweep of the step recursion.  Writing C_M for the
// convolution with spectral symbol M (self-adjoint, since every symbol is
// real and even) and lambda^n_l(z) = dF / du^n_l(z):
//
//   lambda^{t_out} = e_target delta_{x0},
//   a = C_E lambda^{n+1},   c = C_G lambda^{n+1},
//   lambda^n_l = a_l + dt sum_i (db_i/du_l)(u^n) a_i
//                    + sum_{i,j} (dsigma_ij/du_l)(u^n) w_n^j c_i,
//
// and the density-scaled derivative kernel at step n is
//   D^{(j)}(r_n, z) = h^{-d} sum_i sigma_ij(u^n(z)) c_i(z).
//
// The quadratic pairing matrix of the m output components,
//   M_{ab} = sum_n dt < D_a(r_n, .), D_b(r_n, .) >
// (the covariance pairing of noise.hpp), is the lattice analogue of the
// derivative Gram matrix.  For constant amplitude the sweep telescopes:
// D(r_n, .) = sigma * band-limited heat propagator, and M equals
// sigma^2 * grid_point_variance exactly -- both identities are exercised by
// the tests at floating-point accuracy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/fft.hpp"
#include "shelab/grid.hpp"
#include "shelab/noise.hpp"
#include "shelab/phi.hpp"
#include "shelab/rng.hpp"
#include "shelab/solver.hpp"

namespace shelab {

namespace detail {

// out = IDFT( symbol . DFT(in) ) / N^d for a real field.
inline void apply_spectral_symbol(const double* in,
                                  const std::vector<double>& symbol,
                                  double* out, std::size_t cells,
                                  SpectralWorkspace& ws) {
  for (std::size_t z = 0; z < cells; ++z) ws.spectrum[z] = in[z];
  ws.fft.forward(ws.spectrum.data());
  for (std::size_t k = 0; k < cells; ++k) ws.spectrum[k] *= symbol[k];
  ws.fft.inverse(ws.spectrum.data());
  const double inv = 1.0 / static_cast<double>(cells);
  for (std::size_t z = 0; z < cells; ++z) out[z] = ws.spectrum[z].real() * inv;
}

}  // namespace detail

// Derivative kernel of one path output: entry [n] holds q * cells doubles,
// the channel-indexed field D^{(j)}(r_n, z).  Steps at or beyond the output
// time are identically zero (nothing after the output can influence it).
struct DerivativeField {
  std::size_t output_step = 0;
  int target = 0;
  std::size_t x0_cell = 0;
  std::vector<std::vector<double>> step;  // n_steps entries
};

inline DerivativeField derivative_field(const HeatSolver& solver,
                                        const PathResult& path, int target,
                                        std::size_t x0_cell,
                                        std::size_t output_step = SIZE_MAX) {
  const GridSpec& grid = solver.grid();
  const Model& model = solver.model();
  const std::size_t cells = grid.cells();
  const int m = model.m, q = model.q;
  if (output_step == SIZE_MAX) output_step = grid.n_steps;
  if (output_step > grid.n_steps) {
    throw std::invalid_argument("derivative_field: output step out of range");
  }
  if (target < 0 || target >= m) {
    throw std::invalid_argument("derivative_field: target component out of range");
  }
  if (path.trajectory.size() != grid.n_steps + 1 ||
      path.noise.size() != grid.n_steps) {
    throw std::invalid_argument(
        "derivative_field: path must carry trajectory and noise "
        "(solve with store_trajectory and store_noise)");
  }

  DerivativeField out;
  out.output_step = output_step;
  out.target = target;
  out.x0_cell = x0_cell;
  out.step.assign(grid.n_steps,
                  std::vector<double>(static_cast<std::size_t>(q) * cells, 0.0));

  Fields lambda(static_cast<std::size_t>(m), cells);
  lambda.at(static_cast<std::size_t>(target), x0_cell) = 1.0;
  Fields a(static_cast<std::size_t>(m), cells);
  Fields c(static_cast<std::size_t>(m), cells);
  SpectralWorkspace ws(grid);

  const bool sigma_constant = !model.sigma_state_dependent();
  const bool drift_zero = model.drift_zero();
  std::vector<double> sigma0;
  if (sigma_constant) {
    sigma0.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(q));
    const std::vector<double> origin(static_cast<std::size_t>(m), 0.0);
    model.sigma_values(origin.data(), sigma0.data());
  }
  std::vector<double> upoint(static_cast<std::size_t>(m));
  std::vector<double> spoint(static_cast<std::size_t>(m) *
                             static_cast<std::size_t>(q));
  std::vector<double> sjac(static_cast<std::size_t>(m) *
                           static_cast<std::size_t>(q) *
                           static_cast<std::size_t>(m));
  std::vector<double> bjac(static_cast<std::size_t>(m) *
                           static_cast<std::size_t>(m));
  const double inv_vol = 1.0 / grid.cell_volume();

  for (std::size_t n = output_step; n-- > 0;) {
    // a = C_E lambda^{n+1}, c = C_G lambda^{n+1}.
    for (int i = 0; i < m; ++i) {
      detail::apply_spectral_symbol(lambda.comp(static_cast<std::size_t>(i)),
                                    solver.decay(),
                                    a.comp(static_cast<std::size_t>(i)), cells, ws);
      detail::apply_spectral_symbol(lambda.comp(static_cast<std::size_t>(i)),
                                    solver.noise_filter(),
                                    c.comp(static_cast<std::size_t>(i)), cells, ws);
    }
    const Fields& u = path.trajectory[n];
    const std::vector<double>& w = path.noise[n];
    std::vector<double>& d = out.step[n];

    for (std::size_t z = 0; z < cells; ++z) {
      for (int i = 0; i < m; ++i) {
        upoint[static_cast<std::size_t>(i)] = u.at(static_cast<std::size_t>(i), z);
      }
      const double* sig = sigma0.data();
      if (!sigma_constant) {
        model.sigma_values(upoint.data(), spoint.data());
        sig = spoint.data();
      }
      // Derivative kernel at (r_n, z).
      for (int j = 0; j < q; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
          acc += sig[static_cast<std::size_t>(i * q + j)] *
                 c.at(static_cast<std::size_t>(i), z);
        }
        d[static_cast<std::size_t>(j) * cells + z] = acc * inv_vol;
      }
      // Adjoint state for the previous step.
      if (sigma_constant && drift_zero) {
        for (int l = 0; l < m; ++l) {
          lambda.at(static_cast<std::size_t>(l), z) =
              a.at(static_cast<std::size_t>(l), z);
        }
        continue;
      }
      if (!drift_zero) model.drift_jacobian(upoint.data(), bjac.data());
      if (!sigma_constant) model.sigma_jacobian(upoint.data(), sjac.data());
      for (int l = 0; l < m; ++l) {
        double acc = a.at(static_cast<std::size_t>(l), z);
        if (!drift_zero) {
          for (int i = 0; i < m; ++i) {
            acc += grid.dt * bjac[static_cast<std::size_t>(i * m + l)] *
                   a.at(static_cast<std::size_t>(i), z);
          }
        }
        if (!sigma_constant) {
          for (int i = 0; i < m; ++i) {
            double noise_dot = 0.0;
            for (int j = 0; j < q; ++j) {
              noise_dot += sjac[static_cast<std::size_t>((i * q + j) * m + l)] *
                           w[static_cast<std::size_t>(j) * cells + z];
            }
            acc += noise_dot * c.at(static_cast<std::size_t>(i), z);
          }
        }
        lambda.at(static_cast<std::size_t>(l), z) = acc;
      }
    }
  }
  return out;
}

// Exact derivative kernel of the constant-amplitude case, steps_remaining =
// t_out/dt - n >= 1 steps between the increment and the output:
//   L^{-d} sum_k G_k E_k^{steps_remaining - 1} e^{i xi_k (x_z - x_0)}.
inline std::vector<double> constant_amplitude_derivative(
    const HeatSolver& solver, std::size_t steps_remaining, std::size_t x0_cell) {
  if (steps_remaining == 0) {
    throw std::invalid_argument("constant_amplitude_derivative: need >= 1 step");
  }
  const GridSpec& grid = solver.grid();
  const std::size_t cells = grid.cells();
  SpectralWorkspace ws(grid);
  for (std::size_t z = 0; z < cells; ++z) ws.spectrum[z] = 0.0;
  ws.spectrum[x0_cell] = 1.0;
  ws.fft.forward(ws.spectrum.data());  // e^{-i xi_k x_0}
  for (std::size_t k = 0; k < cells; ++k) {
    ws.spectrum[k] *= solver.noise_filter()[k] *
                      std::pow(solver.decay()[k],
                               static_cast<double>(steps_remaining - 1));
  }
  ws.fft.inverse(ws.spectrum.data());
  std::vector<double> out(cells);
  const double scale = 1.0 / std::pow(grid.box_length, grid.dim);
  for (std::size_t z = 0; z < cells; ++z) out[z] = ws.spectrum[z].real() * scale;
  return out;
}

// Derivative Gram matrix of the m terminal components at one probe cell:
// M_{ab} = sum_n dt < D_a(r_n, .), D_b(r_n, .) >, row-major m x m.
inline std::vector<double> malliavin_matrix(const HeatSolver& solver,
                                            const PathResult& path,
                                            std::size_t x0_cell) {
  const GridSpec& grid = solver.grid();
  const Model& model = solver.model();
  const int m = model.m, q = model.q;
  std::vector<DerivativeField> fields;
  fields.reserve(static_cast<std::size_t>(m));
  for (int target = 0; target < m; ++target) {
    fields.push_back(derivative_field(solver, path, target, x0_cell));
  }
  SpectralPairing pairing(solver.kernel(), grid);
  SpectralWorkspace ws(grid);
  std::vector<double> gram(static_cast<std::size_t>(m) * static_cast<std::size_t>(m),
                           0.0);
  for (std::size_t n = 0; n < grid.n_steps; ++n) {
    for (int row = 0; row < m; ++row) {
      for (int col = row; col < m; ++col) {
        const double v = grid.dt * pairing.pair(fields[static_cast<std::size_t>(row)].step[n],
                                                fields[static_cast<std::size_t>(col)].step[n],
                                                q, ws);
        gram[static_cast<std::size_t>(row * m + col)] += v;
        if (col != row) gram[static_cast<std::size_t>(col * m + row)] += v;
      }
    }
  }
  return gram;
}

// Windowed derivative mass: for each window delta (a multiple of dt), the
// pairing mass accumulated over the last delta/dt steps before the output,
//   mass(delta) = sum_{r_n >= T - delta} dt < D(r_n, .), D(r_n, .) >,
// compared against the continuum variance functional Phi(delta).  For
// constant amplitude the discrete mass is sigma^2 * grid variance at delta,
// so the ratio column isolates the band-limit deficit; for state-dependent
// amplitude the ratio must stay pinched between the ellipticity bounds.
struct DerivativeScalingReport {
  std::vector<double> window;
  std::vector<double> mass;
  std::vector<double> reference;  // Phi(delta)
  std::vector<double> ratio;      // mass / reference
};

inline DerivativeScalingReport check_derivative_scaling(
    const HeatSolver& solver, const DerivativeField& field,
    const std::vector<double>& windows) {
  const GridSpec& grid = solver.grid();
  const int q = solver.model().q;
  SpectralPairing pairing(solver.kernel(), grid);
  SpectralWorkspace ws(grid);
  const std::size_t out_step = field.output_step;

  // Per-step pairing mass, reused across windows.
  std::vector<double> step_mass(out_step, 0.0);
  for (std::size_t n = 0; n < out_step; ++n) {
    step_mass[n] = grid.dt * pairing.pair(field.step[n], field.step[n], q, ws);
  }

  DerivativeScalingReport rep;
  for (double delta : windows) {
    const double steps = delta / grid.dt;
    const auto k = static_cast<std::size_t>(std::lround(steps));
    if (k == 0 || k > out_step || std::abs(steps - static_cast<double>(k)) > 1e-9) {
      throw std::invalid_argument(
          "derivative scaling: windows must be whole multiples of dt within "
          "the output horizon");
    }
    double mass = 0.0;
    for (std::size_t n = out_step - k; n < out_step; ++n) mass += step_mass[n];
    rep.window.push_back(delta);
    rep.mass.push_back(mass);
    const double phi = phi_at(solver.kernel(), delta);
    rep.reference.push_back(phi);
    rep.ratio.push_back(mass / phi);
  }
  return rep;
}

// Finite-difference cross-check of the adjoint sweep at sampled source
// coordinates.  One sampled point is a tuple (target component, step n,
// channel j, cell z): the noise increment w_n^j(z) is bumped by +/- eps, the
// path re-solved, and the centred quotient -- scaled by the inverse cell
// volume, matching the density convention of DerivativeField -- is compared
// against the adjoint value.  Errors are measured relative to the largest
// derivative magnitude so that near-zero entries do not dominate.
struct FdCheckReport {
  std::size_t points = 0;     // sampled source coordinates
  double epsilon = 0.0;       // bump size
  double scale = 0.0;         // max |D| over all targets and sources
  double max_rel_err = 0.0;   // worst |adjoint - fd| / scale
  double tolerance = 0.0;
  bool pass = false;
};

inline FdCheckReport check_derivative_fd(const HeatSolver& solver,
                                         std::uint64_t path_id,
                                         std::size_t x0, std::size_t points,
                                         std::uint64_t seed,
                                         double epsilon = 1e-6,
                                         double tolerance = 1e-4) {
  if (points == 0) throw std::invalid_argument("fd check: points must be > 0");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("fd check: epsilon must be > 0");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("fd check: tolerance must be > 0");
  const GridSpec& grid = solver.grid();
  const Model& model = solver.model();
  const std::size_t cells = grid.cells();
  if (x0 >= cells) throw std::invalid_argument("fd check: cell out of range");
  const auto m = static_cast<std::size_t>(model.m);
  const auto q = static_cast<std::size_t>(model.q);
  const double inv_vol = 1.0 / grid.cell_volume();

  SolveOptions stored;
  stored.store_trajectory = true;
  stored.store_noise = true;
  const PathResult path = solver.solve_path(path_id, stored);

  std::vector<DerivativeField> fields;
  fields.reserve(m);
  double scale = 0.0;
  for (std::size_t target = 0; target < m; ++target) {
    fields.push_back(
        derivative_field(solver, path, static_cast<int>(target), x0));
    for (const auto& step : fields.back().step)
      for (double v : step) scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) scale = 1.0;

  CounterRng draws(derive_stream_key(seed, rng_domain::kSynthetic, 0xFD), 0);
  FdCheckReport rep;
  rep.points = points;
  rep.epsilon = epsilon;
  rep.scale = scale;
  rep.tolerance = tolerance;
  for (std::size_t p = 0; p < points; ++p) {
    const std::size_t target = draws.u64_at(4 * p) % m;
    const std::size_t n = draws.u64_at(4 * p + 1) % grid.n_steps;
    const std::size_t j = draws.u64_at(4 * p + 2) % q;
    const std::size_t z = draws.u64_at(4 * p + 3) % cells;

    auto bumped = [&](double bump) {
      SolveOptions opt;
      opt.noise_mutator = [&, bump](std::size_t step, double* w) {
        if (step == n) w[j * cells + z] += bump;
      };
      return solver.solve_path(path_id, opt)
          .terminal.at(static_cast<int>(target), x0);
    };
    const double fd =
        (bumped(epsilon) - bumped(-epsilon)) / (2.0 * epsilon) * inv_vol;
    const double adj = fields[target].step[n][j * cells + z];
    rep.max_rel_err = std::max(rep.max_rel_err, std::abs(adj - fd) / scale);
  }
  rep.pass = rep.max_rel_err <= tolerance;
  return rep;
}

}  // namespace shelab
