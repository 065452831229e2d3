#pragma once

// Coefficient catalog for the reaction and noise-amplitude fields of the
// simulated systems.
//
// Every scalar coefficient (one drift component b_i, one noise amplitude
// sigma_ij) is an entry of the form
//     value(u) = offset + scale * shape(weights . u + arg_shift),
// with shape one of {constant, identity, sin, cos, tanh}.  The family is
// closed under exact differentiation, so Jacobians (needed by the adjoint
// derivative sweep) and global bounds (needed by the ellipticity and
// drift-envelope checks) are available in closed form rather than by
// numerical differentiation.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "shelab/errors.hpp"

namespace shelab {

enum class CoefficientShape { Constant, Identity, Sin, Cos, Tanh };

inline std::string shape_name(CoefficientShape s) {
  switch (s) {
    case CoefficientShape::Constant: return "constant";
    case CoefficientShape::Identity: return "identity";
    case CoefficientShape::Sin: return "sin";
    case CoefficientShape::Cos: return "cos";
    case CoefficientShape::Tanh: return "tanh";
  }
  return "constant";
}

inline CoefficientShape shape_from_name(const std::string& name) {
  if (name == "constant") return CoefficientShape::Constant;
  if (name == "identity") return CoefficientShape::Identity;
  if (name == "sin") return CoefficientShape::Sin;
  if (name == "cos") return CoefficientShape::Cos;
  if (name == "tanh") return CoefficientShape::Tanh;
  throw config_error("unknown coefficient shape: " + name);
}

struct CoefficientEntry {
  double offset = 0.0;
  double scale = 0.0;
  CoefficientShape shape = CoefficientShape::Constant;
  std::vector<double> weights;  // one per state component
  double arg_shift = 0.0;

  static CoefficientEntry constant(double c) {
    CoefficientEntry e;
    e.offset = c;
    return e;
  }

  double argument(const double* u) const {
    double a = arg_shift;
    for (std::size_t l = 0; l < weights.size(); ++l) a += weights[l] * u[l];
    return a;
  }

  double value(const double* u) const {
    switch (shape) {
      case CoefficientShape::Constant: return offset + scale;
      case CoefficientShape::Identity: return offset + scale * argument(u);
      case CoefficientShape::Sin: return offset + scale * std::sin(argument(u));
      case CoefficientShape::Cos: return offset + scale * std::cos(argument(u));
      case CoefficientShape::Tanh:
        return offset + scale * std::tanh(argument(u));
    }
    return offset;
  }

  // Writes the partial derivatives with respect to each state component.
  void gradient(const double* u, double* out) const {
    double dphi = 0.0;
    switch (shape) {
      case CoefficientShape::Constant: dphi = 0.0; break;
      case CoefficientShape::Identity: dphi = 1.0; break;
      case CoefficientShape::Sin: dphi = std::cos(argument(u)); break;
      case CoefficientShape::Cos: dphi = -std::sin(argument(u)); break;
      case CoefficientShape::Tanh: {
        const double t = std::tanh(argument(u));
        dphi = 1.0 - t * t;
        break;
      }
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out[l] = scale * dphi * weights[l];
    }
  }

  bool state_dependent() const {
    if (shape == CoefficientShape::Constant || scale == 0.0) return false;
    for (double w : weights) {
      if (w != 0.0) return true;
    }
    return false;
  }

  bool bounded() const {
    return shape != CoefficientShape::Identity || !state_dependent();
  }

  // Value at the zero state (equals the constant value when the entry has no
  // state dependence).
  double value_at_origin() const {
    const std::vector<double> zeros(weights.size(), 0.0);
    return value(zeros.data());
  }

  // Supremum of |value| over all states (infinite for unbounded entries).
  double sup_abs() const {
    if (!state_dependent()) return std::abs(value_at_origin());
    switch (shape) {
      case CoefficientShape::Identity:
        return std::numeric_limits<double>::infinity();
      default:
        // sin/cos/tanh sweep (-1, 1) over the full state space whenever the
        // argument is state dependent.
        return std::abs(offset) + std::abs(scale);
    }
  }

  // Global Lipschitz constant with respect to the euclidean state norm.
  double lipschitz() const {
    if (!state_dependent()) return 0.0;
    double w2 = 0.0;
    for (double w : weights) w2 += w * w;
    return std::abs(scale) * std::sqrt(w2);  // max |shape'| = 1 for all shapes
  }
};

// A system: m state components driven by q noise channels, with an m x q
// noise-amplitude matrix sigma and an m-vector drift b.
struct Model {
  int m = 1;
  int q = 1;
  std::vector<CoefficientEntry> sigma;  // row-major, sigma[i * q + j]
  std::vector<CoefficientEntry> drift;  // drift[i]

  const CoefficientEntry& sigma_entry(int i, int j) const {
    return sigma[static_cast<std::size_t>(i * q + j)];
  }
  const CoefficientEntry& drift_entry(int i) const {
    return drift[static_cast<std::size_t>(i)];
  }

  void validate() const {
    if (m < 1 || q < 1) throw config_error("model: need m >= 1 and q >= 1");
    if (sigma.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(q)) {
      throw config_error("model: sigma must have m*q entries");
    }
    if (drift.size() != static_cast<std::size_t>(m)) {
      throw config_error("model: drift must have m entries");
    }
    for (const auto& e : sigma) {
      if (e.state_dependent() && e.weights.size() != static_cast<std::size_t>(m)) {
        throw config_error("model: sigma entry weights must have m components");
      }
    }
    for (const auto& e : drift) {
      if (e.state_dependent() && e.weights.size() != static_cast<std::size_t>(m)) {
        throw config_error("model: drift entry weights must have m components");
      }
    }
  }

  // u points at m state values; out receives m*q sigma values, [i][j].
  void sigma_values(const double* u, double* out) const {
    for (std::size_t e = 0; e < sigma.size(); ++e) out[e] = sigma[e].value(u);
  }
  void drift_values(const double* u, double* out) const {
    for (std::size_t e = 0; e < drift.size(); ++e) out[e] = drift[e].value(u);
  }
  // out receives m*q*m partials, [i][j][l] = d sigma_ij / d u_l.
  void sigma_jacobian(const double* u, double* out) const {
    std::vector<double> grad(static_cast<std::size_t>(m));
    for (std::size_t e = 0; e < sigma.size(); ++e) {
      if (!sigma[e].state_dependent()) {
        for (int l = 0; l < m; ++l) out[e * m + l] = 0.0;
        continue;
      }
      sigma[e].gradient(u, grad.data());
      for (int l = 0; l < m; ++l) out[e * m + l] = grad[static_cast<std::size_t>(l)];
    }
  }
  // out receives m*m partials, [i][l] = d b_i / d u_l.
  void drift_jacobian(const double* u, double* out) const {
    std::vector<double> grad(static_cast<std::size_t>(m));
    for (std::size_t e = 0; e < drift.size(); ++e) {
      if (!drift[e].state_dependent()) {
        for (int l = 0; l < m; ++l) out[e * m + l] = 0.0;
        continue;
      }
      drift[e].gradient(u, grad.data());
      for (int l = 0; l < m; ++l) out[e * m + l] = grad[static_cast<std::size_t>(l)];
    }
  }

  bool sigma_state_dependent() const {
    for (const auto& e : sigma) {
      if (e.state_dependent()) return true;
    }
    return false;
  }
  bool drift_zero() const {
    for (const auto& e : drift) {
      if (e.state_dependent() || e.value_at_origin() != 0.0) return false;
    }
    return true;
  }
  // max_i sup_u |b_i(u)|; the radius of the deterministic displacement cone.
  double drift_sup() const {
    double s = 0.0;
    for (const auto& e : drift) s = std::max(s, e.sup_abs());
    return s;
  }
  bool sigma_bounded() const {
    for (const auto& e : sigma) {
      if (!e.bounded()) return false;
    }
    return true;
  }

  // Diagonal constant noise amplitude, zero drift.
  static Model additive(int m, int q, double amplitude) {
    Model md;
    md.m = m;
    md.q = q;
    md.sigma.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(q));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < q; ++j) {
        md.sigma[static_cast<std::size_t>(i * q + j)] =
            CoefficientEntry::constant(i == j ? amplitude : 0.0);
      }
    }
    md.drift.resize(static_cast<std::size_t>(m));
    for (auto& e : md.drift) e = CoefficientEntry::constant(0.0);
    md.validate();
    return md;
  }

  // One component, one channel: sigma(u) = 2 + sin(u), b(u) = cos(u) / 2.
  // Uniformly elliptic (sigma^2 in [1, 9]) with bounded drift.
  static Model scalar_nonlinear() {
    Model md;
    md.m = 1;
    md.q = 1;
    CoefficientEntry s;
    s.offset = 2.0;
    s.scale = 1.0;
    s.shape = CoefficientShape::Sin;
    s.weights = {1.0};
    md.sigma = {s};
    CoefficientEntry b;
    b.offset = 0.0;
    b.scale = 0.5;
    b.shape = CoefficientShape::Cos;
    b.weights = {1.0};
    md.drift = {b};
    md.validate();
    return md;
  }

  // Two components, two channels: sigma = 2 I + (1/4) *
  //   [ sin(u1)      cos(u1+u2) ]
  //   [ cos(u2)      sin(u1-u2) ],
  // drift b = (cos(u1)/2, cos(u2)/2).  Diagonally dominant, hence elliptic.
  static Model coupled_pair() {
    Model md;
    md.m = 2;
    md.q = 2;
    auto entry = [](double offset, CoefficientShape shape, double w1,
                    double w2) {
      CoefficientEntry e;
      e.offset = offset;
      e.scale = 0.25;
      e.shape = shape;
      e.weights = {w1, w2};
      return e;
    };
    md.sigma = {entry(2.0, CoefficientShape::Sin, 1.0, 0.0),
                entry(0.0, CoefficientShape::Cos, 1.0, 1.0),
                entry(0.0, CoefficientShape::Cos, 0.0, 1.0),
                entry(2.0, CoefficientShape::Sin, 1.0, -1.0)};
    auto bent = [](double w1, double w2) {
      CoefficientEntry e;
      e.offset = 0.0;
      e.scale = 0.5;
      e.shape = CoefficientShape::Cos;
      e.weights = {w1, w2};
      return e;
    };
    md.drift = {bent(1.0, 0.0), bent(0.0, 1.0)};
    md.validate();
    return md;
  }
};

}  // namespace shelab
