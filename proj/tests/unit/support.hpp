#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stsexo/config.hpp"
#include "stsexo/dynamics.hpp"
#include "stsexo/experiment.hpp"

namespace stsexo::testing {

/// Uniform rod {m = 1, L = 1, CoM at 0.5, I = 1/12} as the only segment.
inline ChainModel RodChain(double gravity = 9.81) {
  LinkParam rod{"R", 1.0, 1.0, Eigen::Vector2d(0.0, 0.5), 1.0 / 12.0};
  ChainBuildOptions o;
  o.segments = {{"rod", {"R"}, 1}};
  o.torque_limit_nm = {1000.0};
  o.gravity_mps2 = gravity;
  o.allow_reduced = true;
  return BuildChain({rod}, o);
}

/// Point masses m at the tips of links of length l.
inline ChainModel PointMassChain(int links, double m = 1.0, double l = 1.0,
                                 std::vector<int> signs = {}) {
  std::vector<LinkParam> table;
  ChainBuildOptions o;
  for (int i = 0; i < links; ++i) {
    const std::string name = "P" + std::to_string(i);
    table.push_back({name, l, m, Eigen::Vector2d(0.0, l), 0.0});
    o.segments.push_back({"s" + std::to_string(i), {name}, signs.empty() ? 1 : signs[i]});
    o.torque_limit_nm.push_back(1000.0);
  }
  o.allow_reduced = true;
  return BuildChain(table, o);
}

inline ChainModel DefaultModel() { return BuildModel(RunConfig{}); }

class Rng {
 public:
  explicit Rng(unsigned seed) : gen_(seed) {}
  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Eigen::VectorXd Vector(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = Uniform(lo, hi);
    return v;
  }
  Eigen::MatrixXd Matrix(int r, int c, double lo, double hi) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = Uniform(lo, hi);
    return m;
  }
  std::mt19937& engine() { return gen_; }

 private:
  std::mt19937 gen_;
};

}  // namespace stsexo::testing
