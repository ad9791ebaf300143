#include <gtest/gtest.h>

#include "stsexo/error.hpp"
#include "stsexo/experiment.hpp"
#include "stsexo/tuning.hpp"

namespace stsexo {
namespace {

const Experiment& Default() {
  static const Experiment e = BuildExperiment(RunConfig{});
  return e;
}

TEST(AlphaGrid, Parses) {
  const auto g = ParseAlphaGrid("0:1:0.05");
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[13], 0.65, 1e-12);
  EXPECT_EQ(ParseAlphaGrid("0.65:0.65:0.1"), std::vector<double>{0.65});
  EXPECT_EQ(ParseAlphaGrid("0:1:1"), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(ParseAlphaGrid("0:1:0.3").size(), 4u);
}

TEST(AlphaGrid, RejectsBadSpecs) {
  for (const char* bad : {"", "0:1", "0:1:0", "0:1:-0.1", "0.5:0.2:0.1", "-0.1:1:0.1", "0:1.2:0.1", "a:b:c"}) {
    EXPECT_THROW(ParseAlphaGrid(bad), InvalidArgument) << bad;
  }
}

TEST(TuneAlpha, SingletonGrid) {
  const Experiment& e = Default();
  const AlphaTuning t = TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 1.0, 1e-4, {0.65});
  EXPECT_EQ(t.alpha_star, 0.65);
  ASSERT_EQ(t.curve.size(), 1u);
}

TEST(TuneAlpha, EndpointsWithoutEnergyPickLowerRmse) {
  const Experiment& e = Default();
  const AlphaTuning t = TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 1.0, 0.0, {0.0, 1.0});
  ASSERT_EQ(t.curve.size(), 2u);
  const double r0 = t.curve[0].index.rmse_total_rad, r1 = t.curve[1].index.rmse_total_rad;
  EXPECT_EQ(t.alpha_star, r1 <= r0 ? 1.0 : 0.0);
  // alpha = 1 reproduces the standalone LQR run
  const SimLog lqr = Simulate(*e.model, e.lqr, e.reference, e.sim);
  EXPECT_DOUBLE_EQ(r1, ComputePerformanceIndex(lqr, 1.0, 0.0).rmse_total_rad);
}

TEST(TuneAlpha, TiesGoToLargerAlpha) {
  const Experiment& e = Default();
  // zero weights make every J equal
  const AlphaTuning t = TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 0.0, 0.0, {0.2, 0.4, 0.6});
  EXPECT_EQ(t.alpha_star, 0.6);
}

TEST(TuneAlpha, CurveIsInGridOrderAndConsistent) {
  const Experiment& e = Default();
  const std::vector<double> grid = {0.0, 0.5, 1.0};
  const AlphaTuning t = TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 1.0, 1e-4, grid);
  ASSERT_EQ(t.curve.size(), 3u);
  double best = 1e300;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(t.curve[i].alpha, grid[i]);
    const auto& p = t.curve[i].index;
    EXPECT_NEAR(p.J, p.w1 * p.rmse_total_rad + p.w2 * p.torque_energy, 1e-12);
    best = std::min(best, p.J);
  }
  for (const auto& p : t.curve) {
    if (p.alpha == t.alpha_star) {
      EXPECT_EQ(p.index.J, best);
    }
  }
}

TEST(TuneAlpha, RejectsEmptyGrid) {
  const Experiment& e = Default();
  EXPECT_THROW(TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 1.0, 1e-4, {}), InvalidArgument);
  EXPECT_THROW(TuneAlpha(*e.model, e.hybrid, e.reference, e.sim, 1.0, 1e-4, {1.5}), InvalidArgument);
}

}  // namespace
}  // namespace stsexo
