#include "shelab/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "shelab/errors.hpp"

namespace {

using shelab::GridSpec;

TEST(HeatLeakage, MatchesClosedForm) {
  // Gamma(t, rho) L^d with Gamma the kernel of Laplacian/2.
  const double t = 0.7, L = 9.0;
  const double expected1 =
      std::pow(2.0 * M_PI * t, -0.5) * std::exp(-(L / 2) * (L / 2) / (2 * t)) * L;
  EXPECT_NEAR(shelab::heat_leakage(1, t, L), expected1, 1e-15 * expected1);
  const double expected2 = std::pow(2.0 * M_PI * t, -1.0) *
                           std::exp(-(L / 2) * (L / 2) / (2 * t)) * L * L;
  EXPECT_NEAR(shelab::heat_leakage(2, t, L), expected2, 1e-15 * expected2);
}

TEST(BoxRule, LineBoxNearFrozenConstant) {
  const double L = shelab::box_length_for(1, 1.0);
  EXPECT_NEAR(L, 14.0716, 2e-3);
  EXPECT_LE(shelab::heat_leakage(1, 1.0, L), shelab::kHeatLeakBound);
  EXPECT_GT(shelab::heat_leakage(1, 1.0, 0.999 * L), shelab::kHeatLeakBound);
}

TEST(BoxRule, PlaneBoxNearFrozenConstant) {
  const double L = shelab::box_length_for(2, 1.0);
  EXPECT_NEAR(L, 14.5729, 2e-3);
  EXPECT_LE(shelab::heat_leakage(2, 1.0, L), shelab::kHeatLeakBound);
  EXPECT_GT(shelab::heat_leakage(2, 1.0, 0.999 * L), shelab::kHeatLeakBound);
}

TEST(BoxRule, ScalesWithSqrtTime) {
  const double base = shelab::box_length_for(1, 1.0);
  const double quad = shelab::box_length_for(1, 4.0);
  EXPECT_NEAR(quad, 2.0 * base, 1e-9 * base);
}

TEST(BoxRule, ProbeWindowWidensBox) {
  const double base = shelab::box_length_for(1, 1.0);
  const double wide = shelab::box_length_for(1, 1.0, 2.0);
  EXPECT_GT(wide, base + 2.0 * 2.0 * 0.98);
  EXPECT_LE(shelab::heat_leakage(1, 1.0, wide, 2.0), shelab::kHeatLeakBound);
}

TEST(MakeGrid, DerivedQuantities) {
  const GridSpec g = shelab::make_grid(1, 128, 64, 0.5);
  EXPECT_EQ(g.dim, 1);
  EXPECT_EQ(g.n, 128u);
  EXPECT_EQ(g.n_steps, 64u);
  EXPECT_NEAR(g.dt, 0.5 / 64.0, 1e-18);
  EXPECT_NEAR(g.t_final(), 0.5, 1e-15);
  EXPECT_EQ(g.cells(), 128u);
  EXPECT_NEAR(g.h() * 128.0, g.box_length, 1e-12);
  EXPECT_NEAR(g.cell_volume(), g.h(), 1e-18);

  const GridSpec g2 = shelab::make_grid(2, 16, 8, 0.25);
  EXPECT_EQ(g2.cells(), 256u);
  EXPECT_NEAR(g2.cell_volume(), g2.h() * g2.h(), 1e-18);
}

TEST(MakeGrid, RejectsBadParameters) {
  EXPECT_THROW(shelab::make_grid(3, 16, 8, 1.0), shelab::config_error);
  EXPECT_THROW(shelab::make_grid(1, 12, 8, 1.0), shelab::config_error);
  EXPECT_THROW(shelab::make_grid(1, 4, 8, 1.0), shelab::config_error);
  EXPECT_THROW(shelab::make_grid(1, 16, 0, 1.0), shelab::config_error);
  EXPECT_THROW(shelab::make_grid(1, 16, 8, -1.0), shelab::config_error);
  // Explicit box below the leakage rule is refused; a generous one is kept.
  EXPECT_THROW(shelab::make_grid(1, 16, 8, 1.0, 0.0, 5.0), shelab::config_error);
  const GridSpec g = shelab::make_grid(1, 16, 8, 1.0, 0.0, 20.0);
  EXPECT_NEAR(g.box_length, 20.0, 1e-15);
}

TEST(GridSpec, FrequencyIndexMapping) {
  GridSpec g;
  g.dim = 1;
  g.n = 8;
  g.box_length = 4.0;
  const long expected[8] = {0, 1, 2, 3, 4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(g.axis_wavenumber(i), expected[i]) << "index " << i;
    EXPECT_NEAR(g.axis_frequency(i),
                2.0 * M_PI * static_cast<double>(expected[i]) / 4.0, 1e-15);
  }
}

TEST(GridSpec, FrequencySquaredPlane) {
  GridSpec g;
  g.dim = 2;
  g.n = 8;
  g.box_length = 2.0;
  const double unit = 2.0 * M_PI / 2.0;
  // cell (5, 3) -> wavenumbers (-3, 3).
  const std::size_t cell = 5 * 8 + 3;
  EXPECT_NEAR(g.frequency_squared(cell), unit * unit * (9.0 + 9.0), 1e-12);
}

TEST(GridSpec, CoordinatesAndNearestCell) {
  GridSpec g;
  g.dim = 2;
  g.n = 16;
  g.box_length = 8.0;
  double x[2];
  const std::size_t idx[2] = {3, 11};
  const std::size_t cell = g.cell_index(idx);
  g.cell_coordinates(cell, x);
  EXPECT_NEAR(x[0], 3.0 * 0.5, 1e-15);
  EXPECT_NEAR(x[1], 11.0 * 0.5, 1e-15);
  EXPECT_EQ(g.nearest_cell(x), cell);

  // Wrapping: a point just below L along each axis snaps to cell 0.
  double y[2] = {8.0 - 0.01, -0.01};
  EXPECT_EQ(g.nearest_cell(y), 0u);
  // Rounding: 0.6 * h away picks the next cell.
  double zpt[2] = {3.0 * 0.5 + 0.3, 11.0 * 0.5};
  const std::size_t idx2[2] = {4, 11};
  EXPECT_EQ(g.nearest_cell(zpt), g.cell_index(idx2));
}

TEST(Fields, LayoutAndAccess) {
  shelab::Fields f(3, 10);
  EXPECT_EQ(f.data.size(), 30u);
  f.at(2, 9) = 4.5;
  EXPECT_NEAR(f.comp(2)[9], 4.5, 0.0);
  EXPECT_EQ(f.comp(1) - f.comp(0), 10);
}

}  // namespace
