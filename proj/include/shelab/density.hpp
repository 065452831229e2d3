#pragma once

// Ensemble statistics on top of the path solver: Monte-Carlo ensembles of
// probe values, kernel density estimation with bootstrap error bars, the
// two-sided Gaussian envelope check for the law of the solution at a point,
// power-law regularity fits in time and in space, and the deterministic
// drift-reach bound.  Every ensemble reduction stores per-path values in a
// path-indexed buffer and reduces serially afterwards, so results are
// bit-identical for every worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "shelab/errors.hpp"
#include "shelab/fit.hpp"
#include "shelab/parallel.hpp"
#include "shelab/rng.hpp"
#include "shelab/solver.hpp"

namespace shelab {

// ---------------------------------------------------------------------------
// Probe ensembles
// ---------------------------------------------------------------------------

struct EnsembleResult {
  std::size_t paths = 0;
  std::size_t components = 0;
  std::vector<ProbePoint> probes;
  // Path-major storage: values[(path * probes + pi) * components + comp].
  std::vector<double> values;

  double at(std::size_t path, std::size_t probe, std::size_t comp) const {
    return values[(path * probes.size() + probe) * components + comp];
  }

  // All paths' values of one probe, sample-major (n x components).
  std::vector<double> probe_samples(std::size_t probe) const {
    std::vector<double> out(paths * components);
    for (std::size_t p = 0; p < paths; ++p) {
      for (std::size_t c = 0; c < components; ++c) {
        out[p * components + c] = at(p, probe, c);
      }
    }
    return out;
  }
};

inline EnsembleResult run_ensemble(const HeatSolver& solver, std::size_t paths,
                                   std::vector<ProbePoint> probes,
                                   int workers = 1) {
  if (paths == 0) throw config_error("ensemble needs at least one path");
  if (probes.empty()) throw config_error("ensemble needs at least one probe");
  for (const ProbePoint& p : probes) {
    if (p.step > solver.grid().n_steps || p.cell >= solver.grid().cells()) {
      throw config_error("probe outside the space-time lattice");
    }
  }
  EnsembleResult res;
  res.paths = paths;
  res.components = static_cast<std::size_t>(solver.model().m);
  res.probes = std::move(probes);
  res.values.resize(paths * res.probes.size() * res.components);

  SolveOptions opt;
  opt.probes = res.probes;
  const std::size_t stride = res.probes.size() * res.components;
  parallel_for(paths, workers, [&](std::size_t path, int) {
    const PathResult pr = solver.solve_path(path, opt);
    double* slot = res.values.data() + path * stride;
    for (std::size_t pi = 0; pi < res.probes.size(); ++pi) {
      for (std::size_t c = 0; c < res.components; ++c) {
        slot[pi * res.components + c] = pr.probe_values[pi][c];
      }
    }
  });
  return res;
}

// ---------------------------------------------------------------------------
// Kernel density estimation
// ---------------------------------------------------------------------------

struct DensityOptions {
  std::size_t bins_per_axis = 0;    // 0 -> 1024 in 1-D, 256 per axis in 2-D
  std::size_t points_per_axis = 0;  // 0 -> 61 in 1-D, 41 per axis in 2-D
  std::size_t resamples = 200;      // bootstrap replications
  double coverage = 0.99;           // quantile setting the evaluation radius
  std::uint64_t seed = 1;           // bootstrap stream seed
  int workers = 1;
};

struct DensityEstimate {
  std::size_t dim = 0;
  std::size_t samples = 0;
  std::size_t points_per_axis = 0;
  double coverage_radius = 0.0;        // evaluation lattice spans [-R, R]
  std::vector<double> bandwidth;       // per axis
  std::vector<double> mean;            // per-axis sample mean
  std::vector<double> variance;        // per-axis sample variance
  std::vector<double> axis_points;     // dim * points_per_axis, axis-major
  std::vector<double> density;         // lattice values, row-major
  std::vector<double> boot_rel_err;    // bootstrap std / estimate, same shape
  double lattice_mass = 0.0;           // trapezoid mass over the lattice

  std::size_t lattice_size() const {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim; ++a) n *= points_per_axis;
    return n;
  }
  double axis_point(std::size_t axis, std::size_t p) const {
    return axis_points[axis * points_per_axis + p];
  }
};

namespace detail {

// Gaussian kernel table K[point][bin] for one axis.
inline std::vector<double> kernel_table(std::span<const double> points,
                                        std::span<const double> centers,
                                        double bandwidth) {
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * M_PI));
  std::vector<double> table(points.size() * centers.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t b = 0; b < centers.size(); ++b) {
      const double z = (points[p] - centers[b]) / bandwidth;
      table[p * centers.size() + b] = norm * std::exp(-0.5 * z * z);
    }
  }
  return table;
}

// Binned product-kernel evaluation on the lattice; counts are bin-major with
// the same row-major layout as the lattice.  Contracts one axis at a time so
// the cost is linear in bins * points per contraction, not in their product
// over all axes.
inline void binned_density(std::size_t dim, std::size_t bins,
                           std::size_t points,
                           const std::vector<double>& counts,
                           const std::vector<double>& k0,
                           const std::vector<double>& k1, double inv_n,
                           std::vector<double>& out) {
  if (dim == 1) {
    out.assign(points, 0.0);
    for (std::size_t p = 0; p < points; ++p) {
      double acc = 0.0;
      const double* row = k0.data() + p * bins;
      for (std::size_t b = 0; b < bins; ++b) acc += row[b] * counts[b];
      out[p] = acc * inv_n;
    }
    return;
  }
  // dim == 2: first contract the second axis, then the first.
  std::vector<double> half(bins * points, 0.0);
  for (std::size_t b0 = 0; b0 < bins; ++b0) {
    const double* crow = counts.data() + b0 * bins;
    for (std::size_t p1 = 0; p1 < points; ++p1) {
      double acc = 0.0;
      const double* row = k1.data() + p1 * bins;
      for (std::size_t b1 = 0; b1 < bins; ++b1) acc += row[b1] * crow[b1];
      half[b0 * points + p1] = acc;
    }
  }
  out.assign(points * points, 0.0);
  for (std::size_t p0 = 0; p0 < points; ++p0) {
    const double* row = k0.data() + p0 * bins;
    for (std::size_t b0 = 0; b0 < bins; ++b0) {
      const double w = row[b0];
      const double* hrow = half.data() + b0 * points;
      double* orow = out.data() + p0 * points;
      for (std::size_t p1 = 0; p1 < points; ++p1) orow[p1] += w * hrow[p1];
    }
  }
  const std::size_t total = points * points;
  for (std::size_t i = 0; i < total; ++i) out[i] *= inv_n;
}

}  // namespace detail

// Product-Gaussian kernel density estimate of n samples in `dim` dimensions
// (sample-major layout, n * dim values).  The estimate is evaluated on a
// symmetric lattice [-R, R]^dim whose radius R is the `coverage` quantile of
// the largest per-axis magnitude, and every lattice value carries a bootstrap
// relative error from `resamples` multinomial replications.
inline DensityEstimate estimate_density(std::span<const double> samples,
                                        std::size_t dim,
                                        const DensityOptions& opt = {}) {
  if (dim != 1 && dim != 2) {
    throw config_error("density estimation supports one or two components");
  }
  if (samples.size() % dim != 0) {
    throw config_error("sample array size is not a multiple of the dimension");
  }
  const std::size_t n = samples.size() / dim;
  if (n < 16) throw config_error("density estimation needs at least 16 samples");
  if (!(opt.coverage > 0.5 && opt.coverage < 1.0)) {
    throw config_error("coverage quantile must lie in (0.5, 1)");
  }
  if (opt.resamples < 2) throw config_error("need at least two bootstrap resamples");

  DensityEstimate est;
  est.dim = dim;
  est.samples = n;
  est.points_per_axis =
      opt.points_per_axis ? opt.points_per_axis : (dim == 1 ? 61 : 41);
  const std::size_t bins = opt.bins_per_axis ? opt.bins_per_axis
                                             : (dim == 1 ? 1024 : 256);
  if (est.points_per_axis < 3 || bins < 8) {
    throw config_error("density lattice is too small");
  }

  // Per-axis sample moments and the bandwidth rule
  // bw = 1.06 * sigma * n^{-1/(dim+4)}.
  est.mean.assign(dim, 0.0);
  est.variance.assign(dim, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < dim; ++a) est.mean[a] += samples[s * dim + a];
  }
  for (std::size_t a = 0; a < dim; ++a) est.mean[a] /= static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < dim; ++a) {
      const double d = samples[s * dim + a] - est.mean[a];
      est.variance[a] += d * d;
    }
  }
  est.bandwidth.assign(dim, 0.0);
  const double rate = std::pow(static_cast<double>(n),
                               -1.0 / (static_cast<double>(dim) + 4.0));
  for (std::size_t a = 0; a < dim; ++a) {
    est.variance[a] /= static_cast<double>(n - 1);
    if (!(est.variance[a] > 0.0)) {
      throw config_error("degenerate sample axis: zero variance");
    }
    est.bandwidth[a] = 1.06 * std::sqrt(est.variance[a]) * rate;
  }

  // Evaluation radius: coverage quantile of max_a |value_a|.
  std::vector<double> mags(n);
  for (std::size_t s = 0; s < n; ++s) {
    double m = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
      m = std::max(m, std::abs(samples[s * dim + a]));
    }
    mags[s] = m;
  }
  std::sort(mags.begin(), mags.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(opt.coverage * static_cast<double>(n)));
  est.coverage_radius = mags[std::min(n, std::max<std::size_t>(rank, 1)) - 1];
  if (!(est.coverage_radius > 0.0)) {
    throw config_error("degenerate sample cloud: zero coverage radius");
  }

  est.axis_points.resize(dim * est.points_per_axis);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t p = 0; p < est.points_per_axis; ++p) {
      const double frac = static_cast<double>(p) /
                          static_cast<double>(est.points_per_axis - 1);
      est.axis_points[a * est.points_per_axis + p] =
          -est.coverage_radius + 2.0 * est.coverage_radius * frac;
    }
  }

  // Bin the samples.  The bin range covers every sample so binned mass is
  // exact; bin width stays well below the bandwidth for the default sizes.
  std::vector<double> lo(dim), width(dim);
  for (std::size_t a = 0; a < dim; ++a) {
    double mn = samples[a], mx = samples[a];
    for (std::size_t s = 0; s < n; ++s) {
      mn = std::min(mn, samples[s * dim + a]);
      mx = std::max(mx, samples[s * dim + a]);
    }
    const double span = std::max(mx - mn, 1e-300);
    lo[a] = mn;
    width[a] = span / static_cast<double>(bins);
  }
  auto bin_of = [&](std::size_t s, std::size_t a) {
    const double rel = (samples[s * dim + a] - lo[a]) / width[a];
    auto b = static_cast<std::ptrdiff_t>(rel);
    b = std::max<std::ptrdiff_t>(0,
                                 std::min<std::ptrdiff_t>(
                                     b, static_cast<std::ptrdiff_t>(bins) - 1));
    return static_cast<std::size_t>(b);
  };
  const std::size_t lattice = est.lattice_size();
  const std::size_t bin_cells = dim == 1 ? bins : bins * bins;
  std::vector<std::uint32_t> sample_bin(n);
  std::vector<double> counts(bin_cells, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t flat = bin_of(s, 0);
    if (dim == 2) flat = flat * bins + bin_of(s, 1);
    sample_bin[s] = static_cast<std::uint32_t>(flat);
    counts[flat] += 1.0;
  }

  std::vector<double> centers0(bins), centers1;
  for (std::size_t b = 0; b < bins; ++b) {
    centers0[b] = lo[0] + (static_cast<double>(b) + 0.5) * width[0];
  }
  std::span<const double> pts0(est.axis_points.data(), est.points_per_axis);
  const std::vector<double> k0 =
      detail::kernel_table(pts0, centers0, est.bandwidth[0]);
  std::vector<double> k1;
  if (dim == 2) {
    centers1.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      centers1[b] = lo[1] + (static_cast<double>(b) + 0.5) * width[1];
    }
    std::span<const double> pts1(est.axis_points.data() + est.points_per_axis,
                                 est.points_per_axis);
    k1 = detail::kernel_table(pts1, centers1, est.bandwidth[1]);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  detail::binned_density(dim, bins, est.points_per_axis, counts, k0, k1, inv_n,
                         est.density);

  // Bootstrap: each replication draws n sample indices with replacement from
  // its own counter stream and reuses the precomputed bin assignment, so the
  // result depends only on (seed, replication index).
  std::vector<double> boot(opt.resamples * lattice);
  parallel_for(opt.resamples, opt.workers, [&](std::size_t r, int) {
    CounterRng rng(derive_stream_key(opt.seed, rng_domain::kBootstrap, r), 0);
    std::vector<double> rcounts(bin_cells, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
      const std::size_t idx = static_cast<std::size_t>(
          rng.u64_at(d) % static_cast<std::uint64_t>(n));
      rcounts[sample_bin[idx]] += 1.0;
    }
    std::vector<double> rdens;
    detail::binned_density(dim, bins, est.points_per_axis, rcounts, k0, k1,
                           inv_n, rdens);
    std::copy(rdens.begin(), rdens.end(), boot.begin() + r * lattice);
  });

  est.boot_rel_err.assign(lattice, std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < lattice; ++p) {
    double mean = 0.0;
    for (std::size_t r = 0; r < opt.resamples; ++r) {
      mean += boot[r * lattice + p];
    }
    mean /= static_cast<double>(opt.resamples);
    double m2 = 0.0;
    for (std::size_t r = 0; r < opt.resamples; ++r) {
      const double d = boot[r * lattice + p] - mean;
      m2 += d * d;
    }
    const double sd = std::sqrt(m2 / static_cast<double>(opt.resamples - 1));
    if (est.density[p] > 0.0) est.boot_rel_err[p] = sd / est.density[p];
  }

  // Trapezoid mass over the lattice.
  const double step0 = est.axis_point(0, 1) - est.axis_point(0, 0);
  auto tw = [&](std::size_t p) {
    return (p == 0 || p + 1 == est.points_per_axis) ? 0.5 : 1.0;
  };
  double mass = 0.0;
  if (dim == 1) {
    for (std::size_t p = 0; p < lattice; ++p) mass += tw(p) * est.density[p];
    mass *= step0;
  } else {
    const double step1 = est.axis_point(1, 1) - est.axis_point(1, 0);
    for (std::size_t p0 = 0; p0 < est.points_per_axis; ++p0) {
      for (std::size_t p1 = 0; p1 < est.points_per_axis; ++p1) {
        mass += tw(p0) * tw(p1) * est.density[p0 * est.points_per_axis + p1];
      }
    }
    mass *= step0 * step1;
  }
  est.lattice_mass = mass;
  return est;
}

// ---------------------------------------------------------------------------
// Two-sided Gaussian envelope of the density at a point
// ---------------------------------------------------------------------------

struct EnvelopeOptions {
  double lower_gate = 1e-3;      // require c1 >= lower_gate
  double upper_gate = 1e3;       // require c3 <= upper_gate
  double max_boot_rel_err = 0.1; // lattice points noisier than this are skipped
};

// One time slice entering the envelope fit: a density estimate together with
// the variance functional and the elapsed time it was taken at.
struct EnvelopeSlice {
  const DensityEstimate* density = nullptr;
  double phi = 0.0;
  double horizon = 0.0;
};

struct EnvelopeReport {
  double phi = 0.0;          // variance functional at the latest slice
  double drift_reach = 0.0;  // c4 * latest horizon
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0;
  int j2 = 0, j5 = 0;        // chosen dyadic offsets from the variance scale
  double variance_ratio = 0.0;  // max over slices of axis variance / phi
  std::size_t slices = 0;
  std::size_t admissible = 0;   // lattice points entering the fit
  std::size_t excluded = 0;     // points dropped for bootstrap noise
  bool lower_pass = false, upper_pass = false, pass = false;
};

// Fits one constant set for the sandwich, jointly over every slice (t, y):
//   c1 phi(t)^{-m/2} exp(-|y|^2 / (c2 phi(t))) <= p_t(y)
//   p_t(y) <= c3 phi(t)^{-m/2} exp(-max(|y| - c4 t, 0)^2 / (c5 phi(t)))
// Candidate c2 and c5 are dyadic multiples of twice the measured
// variance-to-phi ratio; the search walks pairs outward from the natural
// Gaussian scale and keeps the first pair whose fitted c1 and c3 clear the
// gates.
inline EnvelopeReport check_envelope(std::span<const EnvelopeSlice> slices,
                                     double drift_sup,
                                     const EnvelopeOptions& opt = {}) {
  if (slices.empty()) throw config_error("envelope fit needs at least one slice");
  if (!(drift_sup >= 0.0)) throw config_error("drift bound must be non-negative");
  const std::size_t dim = slices[0].density ? slices[0].density->dim : 0;
  for (const EnvelopeSlice& s : slices) {
    if (s.density == nullptr || s.density->dim != dim) {
      throw config_error("envelope slices must share one density dimension");
    }
    if (!(s.phi > 0.0) || !(s.horizon > 0.0)) {
      throw config_error("each slice needs positive phi and horizon");
    }
  }
  EnvelopeReport rep;
  rep.slices = slices.size();
  rep.phi = slices.back().phi;
  rep.c4 = drift_sup;
  rep.drift_reach = drift_sup * slices.back().horizon;
  for (const EnvelopeSlice& s : slices) {
    for (std::size_t a = 0; a < dim; ++a) {
      rep.variance_ratio =
          std::max(rep.variance_ratio, s.density->variance[a] / s.phi);
    }
  }
  const double base = 2.0 * rep.variance_ratio;
  if (!(base > 0.0)) throw config_error("degenerate variance ratio");

  // Collect admissible lattice points across slices: density, |y|^2, the
  // squared positive-part distance past the drift reach, and the slice phi.
  const double half_dim = 0.5 * static_cast<double>(dim);
  std::vector<double> dens, norm2, shifted2, phis, phi_pows;
  for (const EnvelopeSlice& s : slices) {
    const DensityEstimate& est = *s.density;
    const double reach = drift_sup * s.horizon;
    const double phi_pow = std::pow(s.phi, half_dim);
    const std::size_t lattice = est.lattice_size();
    for (std::size_t p = 0; p < lattice; ++p) {
      if (!(est.density[p] > 0.0) ||
          !(est.boot_rel_err[p] < opt.max_boot_rel_err)) {
        ++rep.excluded;
        continue;
      }
      double y2 = 0.0;
      if (dim == 1) {
        const double y = est.axis_point(0, p);
        y2 = y * y;
      } else {
        const double y0 = est.axis_point(0, p / est.points_per_axis);
        const double y1 = est.axis_point(1, p % est.points_per_axis);
        y2 = y0 * y0 + y1 * y1;
      }
      const double pos = std::max(std::sqrt(y2) - reach, 0.0);
      dens.push_back(est.density[p]);
      norm2.push_back(y2);
      shifted2.push_back(pos * pos);
      phis.push_back(s.phi);
      phi_pows.push_back(phi_pow);
    }
  }
  rep.admissible = dens.size();
  if (rep.admissible == 0) {
    throw config_error("no lattice point is admissible for the envelope fit");
  }

  constexpr int kLoJ = -2, kHiJ = 4;
  auto lower_constant = [&](int j) {
    const double c2 = std::ldexp(base, j);
    double c1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dens.size(); ++i) {
      c1 = std::min(c1, dens[i] * phi_pows[i] *
                            std::exp(norm2[i] / (c2 * phis[i])));
    }
    return c1;
  };
  auto upper_constant = [&](int j) {
    const double c5 = std::ldexp(base, j);
    double c3 = 0.0;
    for (std::size_t i = 0; i < dens.size(); ++i) {
      c3 = std::max(c3, dens[i] * phi_pows[i] *
                            std::exp(shifted2[i] / (c5 * phis[i])));
    }
    return c3;
  };
  std::vector<double> c1_of(kHiJ - kLoJ + 1), c3_of(kHiJ - kLoJ + 1);
  for (int j = kLoJ; j <= kHiJ; ++j) {
    c1_of[static_cast<std::size_t>(j - kLoJ)] = lower_constant(j);
    c3_of[static_cast<std::size_t>(j - kLoJ)] = upper_constant(j);
  }

  // Middle-out pair search: order candidate pairs by distance from the
  // natural scale, deterministic tie-breaks, keep the first passing pair or
  // the best-scoring one if none passes.
  struct Pair {
    int j2, j5;
  };
  std::vector<Pair> order;
  for (int j2 = kLoJ; j2 <= kHiJ; ++j2) {
    for (int j5 = kLoJ; j5 <= kHiJ; ++j5) order.push_back({j2, j5});
  }
  std::sort(order.begin(), order.end(), [](const Pair& a, const Pair& b) {
    const int da = std::abs(a.j2) + std::abs(a.j5);
    const int db = std::abs(b.j2) + std::abs(b.j5);
    if (da != db) return da < db;
    const int ma = std::max(std::abs(a.j2), std::abs(a.j5));
    const int mb = std::max(std::abs(b.j2), std::abs(b.j5));
    if (ma != mb) return ma < mb;
    if (a.j2 != b.j2) return a.j2 < b.j2;
    return a.j5 < b.j5;
  });

  double best_score = -std::numeric_limits<double>::infinity();
  for (const Pair& pr : order) {
    const double c1 = c1_of[static_cast<std::size_t>(pr.j2 - kLoJ)];
    const double c3 = c3_of[static_cast<std::size_t>(pr.j5 - kLoJ)];
    const double score = std::min(c1 / opt.lower_gate, opt.upper_gate / c3);
    if (score > best_score) {
      best_score = score;
      rep.j2 = pr.j2;
      rep.j5 = pr.j5;
      rep.c1 = c1;
      rep.c3 = c3;
      rep.c2 = std::ldexp(base, pr.j2);
      rep.c5 = std::ldexp(base, pr.j5);
    }
    if (score >= 1.0) break;  // first admissible pair in middle-out order
  }
  rep.lower_pass = rep.c1 >= opt.lower_gate;
  rep.upper_pass = rep.c3 <= opt.upper_gate;
  rep.pass = rep.lower_pass && rep.upper_pass;
  return rep;
}

// Single-slice convenience overload.
inline EnvelopeReport check_envelope(const DensityEstimate& est, double phi,
                                     double drift_sup, double horizon,
                                     const EnvelopeOptions& opt = {}) {
  const EnvelopeSlice slice{&est, phi, horizon};
  return check_envelope(std::span<const EnvelopeSlice>(&slice, 1), drift_sup,
                        opt);
}

// ---------------------------------------------------------------------------
// Regularity fits
// ---------------------------------------------------------------------------

struct RegularityReport {
  std::vector<double> separation;  // time lags or spatial distances
  std::vector<double> moment;      // mean squared increments
  PowerFit fit;                    // log-log fit of moment vs separation
  double exponent = 0.0;           // fit.exponent / 2
  std::size_t paths = 0;
};

namespace detail {

inline RegularityReport increment_fit(const HeatSolver& solver,
                                      const std::vector<ProbePoint>& probes,
                                      std::vector<double> separation,
                                      std::size_t paths, int workers) {
  const EnsembleResult ens = run_ensemble(solver, paths, probes, workers);
  const std::size_t m = ens.components;
  const std::size_t lags = separation.size();
  RegularityReport rep;
  rep.paths = paths;
  rep.separation = std::move(separation);
  rep.moment.assign(lags, 0.0);
  for (std::size_t p = 0; p < paths; ++p) {
    for (std::size_t l = 0; l < lags; ++l) {
      double inc2 = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const double d = ens.at(p, l + 1, c) - ens.at(p, 0, c);
        inc2 += d * d;
      }
      rep.moment[l] += inc2;
    }
  }
  for (double& v : rep.moment) v /= static_cast<double>(paths);
  rep.fit = fit_power_law(rep.separation, rep.moment);
  rep.exponent = 0.5 * rep.fit.exponent;
  return rep;
}

}  // namespace detail

// Mean squared increment in time at a fixed cell:
// E |u(t_base + lag, x) - u(t_base, x)|^2 against lag, fitted as a power law.
// The fitted exponent field reports half the slope.
inline RegularityReport estimate_time_regularity(
    const HeatSolver& solver, std::size_t base_step,
    std::span<const std::size_t> lag_steps, std::size_t cell,
    std::size_t paths, int workers = 1) {
  if (lag_steps.size() < 3) {
    throw config_error("time regularity fit needs at least three lags");
  }
  std::vector<ProbePoint> probes;
  probes.push_back({base_step, cell});
  std::vector<double> separation;
  for (std::size_t lag : lag_steps) {
    if (lag == 0 || base_step + lag > solver.grid().n_steps) {
      throw config_error("time lag outside the step range");
    }
    probes.push_back({base_step + lag, cell});
    separation.push_back(static_cast<double>(lag) * solver.grid().dt);
  }
  return detail::increment_fit(solver, probes, std::move(separation), paths,
                               workers);
}

// Mean squared increment in space at a fixed time:
// E |u(t, x + z) - u(t, x)|^2 against |z|, fitted as a power law.  Lags are
// in cells along the first axis; distances use the lattice spacing.
inline RegularityReport estimate_space_regularity(
    const HeatSolver& solver, std::size_t step, std::size_t base_cell,
    std::span<const std::size_t> lag_cells, std::size_t paths,
    int workers = 1) {
  if (lag_cells.size() < 3) {
    throw config_error("space regularity fit needs at least three lags");
  }
  const GridSpec& grid = solver.grid();
  std::vector<ProbePoint> probes;
  probes.push_back({step, base_cell});
  std::vector<double> separation;
  for (std::size_t lag : lag_cells) {
    if (lag == 0 || lag > grid.n / 2) {
      throw config_error("space lag must lie in [1, n/2] cells");
    }
    // Shift along the first axis with periodic wrap-around.
    std::size_t cell;
    if (grid.dim == 1) {
      cell = (base_cell + lag) % grid.cells();
    } else {
      const std::size_t row = base_cell / grid.n;
      const std::size_t col = base_cell % grid.n;
      cell = ((row + lag) % grid.n) * grid.n + col;
    }
    probes.push_back({step, cell});
    separation.push_back(static_cast<double>(lag) * grid.h());
  }
  return detail::increment_fit(solver, probes, std::move(separation), paths,
                               workers);
}

// ---------------------------------------------------------------------------
// Drift-reach bound
// ---------------------------------------------------------------------------

struct DriftBoundReport {
  double max_abs = 0.0;   // largest |drift companion| over paths and cells
  double bound = 0.0;     // sup |b| * horizon
  double tolerance = 0.0;
  bool pass = false;
  std::size_t paths = 0;
};

// The drift companion accumulates the propagated drift load; the heat
// propagator contracts the sup norm, so its magnitude can never exceed
// sup |b| times the elapsed time (up to rounding and the band-limit of the
// discrete propagator, covered by the tolerance).
inline DriftBoundReport check_drift_bound(const HeatSolver& solver,
                                          std::size_t paths,
                                          double tolerance = 1e-6,
                                          int workers = 1) {
  if (paths == 0) throw config_error("drift bound check needs paths");
  const double sup = solver.model().drift_sup();
  if (!std::isfinite(sup)) {
    throw config_error("drift bound check needs a bounded drift");
  }
  DriftBoundReport rep;
  rep.paths = paths;
  rep.tolerance = tolerance;
  rep.bound = sup * solver.grid().t_final();

  std::vector<double> per_path(paths, 0.0);
  SolveOptions opt;
  opt.track_drift = true;
  parallel_for(paths, workers, [&](std::size_t path, int) {
    const PathResult pr = solver.solve_path(path, opt);
    double mx = 0.0;
    for (double v : pr.drift_companion.data) mx = std::max(mx, std::abs(v));
    per_path[path] = mx;
  });
  for (double v : per_path) rep.max_abs = std::max(rep.max_abs, v);
  rep.pass = rep.max_abs <= rep.bound * (1.0 + tolerance) + tolerance * 1e-12;
  return rep;
}

}  // namespace shelab
