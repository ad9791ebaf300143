#pragma once

#include <string>
#include <vector>

#include "stsexo/controllers.hpp"
#include "stsexo/sim.hpp"

namespace stsexo {

struct AlphaPoint {
  double alpha = 0.0;
  PerformanceIndex index;
};

struct AlphaTuning {
  double alpha_star = 0.0;
  std::vector<AlphaPoint> curve;  // in grid order
};

/// Parses `a:b:step` into a < ... <= b (inclusive within step/1e6). Every
/// value must lie in [0, 1].
std::vector<double> ParseAlphaGrid(const std::string& spec);

/// One closed-loop run per grid value with the hybrid block's alpha replaced;
/// returns argmin J with ties going to the larger alpha. A failed run throws
/// an Error naming the offending alpha.
AlphaTuning TuneAlpha(const ChainModel& model, const HybridSpec& hybrid, const Trajectory& traj,
                      const SimConfig& cfg, double w1, double w2, const std::vector<double>& grid);

}  // namespace stsexo
