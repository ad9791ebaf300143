#include "stsexo/tuning.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include "csv.hpp"
#include "stsexo/error.hpp"

namespace stsexo {

std::vector<double> ParseAlphaGrid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.size() != 3) throw InvalidArgument("grid must look like a:b:step, got '" + spec + "'");
  double v[3];
  try {
    for (int i = 0; i < 3; ++i) v[i] = detail::ParseDouble(parts[i], 0);
  } catch (const ParseError&) {
    throw InvalidArgument("grid '" + spec + "' contains a malformed number");
  }
  const double a = v[0], b = v[1], step = v[2];
  if (a < 0.0 || b > 1.0 || a > b) throw InvalidArgument("grid must satisfy 0 <= a <= b <= 1");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((b - a) / step + 1e-6));
  for (long i = 0; i <= count; ++i) grid.push_back(std::min(b, a + static_cast<double>(i) * step));
  return grid;
}

AlphaTuning TuneAlpha(const ChainModel& model, const HybridSpec& hybrid, const Trajectory& traj,
                      const SimConfig& cfg, double w1, double w2, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("alpha grid is empty");
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alpha grid values must lie in [0, 1]");
  }
  std::vector<std::future<PerformanceIndex>> runs;
  for (double a : grid) {
    runs.push_back(std::async(std::launch::async, [&, a] {
      HybridSpec spec = hybrid;
      spec.alpha = a;
      return ComputePerformanceIndex(Simulate(model, spec, traj, cfg), w1, w2);
    }));
  }
  AlphaTuning out;
  for (size_t i = 0; i < grid.size(); ++i) {
    try {
      out.curve.push_back({grid[i], runs[i].get()});
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "alpha = " << grid[i] << ": " << e.what();
      throw Error(msg.str());
    }
  }
  const AlphaPoint* best = &out.curve.front();
  for (const auto& p : out.curve) {
    if (p.index.J < best->index.J || (p.index.J == best->index.J && p.alpha > best->alpha)) {
      best = &p;
    }
  }
  out.alpha_star = best->alpha;
  return out;
}

}  // namespace stsexo
