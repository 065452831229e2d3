#include "shelab/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace {

using shelab::integrate;
using shelab::integrate_half_line;
using shelab::integrate_power_endpoint;
using shelab::integrate_real_line;
using shelab::QuadratureOptions;

TEST(Quadrature, PolynomialsAreExactOnASinglePanel) {
  auto cubic = [](double x) { return x * x * x; };
  EXPECT_NEAR(integrate(cubic, 0.0, 1.0), 0.25, 1e-15);
  auto deg12 = [](double x) { return std::pow(x, 12); };
  EXPECT_NEAR(integrate(deg12, -1.0, 1.0), 2.0 / 13.0, 1e-14);
}

TEST(Quadrature, SmoothIntegrands) {
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0,
              1e-13);
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, -8.0, 8.0),
              std::sqrt(M_PI), 1e-12);
}

TEST(Quadrature, HalfLineTransform) {
  EXPECT_NEAR(integrate_half_line([](double x) { return std::exp(-x); }), 1.0,
              1e-11);
  EXPECT_NEAR(integrate_half_line([](double x) { return std::exp(-x * x); }),
              0.5 * std::sqrt(M_PI), 1e-11);
  // A slowly decaying tail: 1/(1+x^2) over [0, inf) = pi/2.
  EXPECT_NEAR(integrate_half_line([](double x) { return 1.0 / (1.0 + x * x); }),
              0.5 * M_PI, 1e-11);
}

TEST(Quadrature, RealLineTransform) {
  EXPECT_NEAR(integrate_real_line([](double x) { return std::exp(-x * x); }),
              std::sqrt(M_PI), 1e-11);
  EXPECT_NEAR(
      integrate_real_line([](double x) { return 1.0 / (1.0 + x * x); }), M_PI,
      1e-11);
}

TEST(Quadrature, IntegrableEndpointSingularities) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-9;
  EXPECT_NEAR(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                        opt),
              2.0, 2e-9);
  EXPECT_NEAR(integrate([](double x) { return std::log(x); }, 0.0, 1.0, opt),
              -1.0, 1e-9);
  // The power-endpoint transform reaches full precision cheaply.
  EXPECT_NEAR(
      integrate_power_endpoint([](double r) { return 1.0 / std::sqrt(r); },
                               1.0),
      2.0, 1e-12);
  EXPECT_NEAR(integrate_power_endpoint(
                  [](double r) { return std::pow(r, -0.75) * std::exp(-r); },
                  50.0),
              std::tgamma(0.25) - 0.0, 2e-6);
}

TEST(Quadrature, NonIntegrableSingularityFailsLoudly) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  opt.max_intervals = 200;
  EXPECT_THROW(integrate([](double x) { return 1.0 / x; }, 0.0, 1.0, opt),
               std::runtime_error);
}

TEST(Quadrature, RejectsBadIntervals) {
  EXPECT_THROW(integrate([](double x) { return x; }, 1.0, 0.0),
               std::invalid_argument);
  EXPECT_EQ(integrate([](double x) { return x; }, 2.0, 2.0), 0.0);
}

}  // namespace
