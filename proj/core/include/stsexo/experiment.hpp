#pragma once

#include <map>
#include <memory>
#include <string>

#include "stsexo/config.hpp"
#include "stsexo/controllers.hpp"
#include "stsexo/dynamics.hpp"
#include "stsexo/sim.hpp"
#include "stsexo/trajectory.hpp"

namespace stsexo {

/// Chain options from the model and payload sections.
ChainBuildOptions ChainOptionsFromConfig(const RunConfig& cfg);
ChainModel BuildModel(const RunConfig& cfg);

/// Generated or loaded reference, optionally filtered, on a uniform grid at
/// the configured rate, with derivatives.
Trajectory BuildReference(const RunConfig& cfg);

SimConfig BuildSimConfig(const RunConfig& cfg);

/// Posture used for gain scaling and linearization: the reference sample at
/// the configured normalized time, at rest.
JointState OperatingPoint(const RunConfig& cfg, const Trajectory& traj);

/// Per-joint torque scale applied to the configured gains.
Eigen::VectorXd GainScale(const RunConfig& cfg, const ChainModel& model, const JointState& op);

PidGains PidGainsFromConfig(const PidConfig& pid, const Eigen::VectorXd& scale);
LqrController LqrFromConfig(const RunConfig& cfg, std::shared_ptr<const ChainModel> model,
                            const JointState& op, const Eigen::VectorXd& scale);

/// Everything a run needs, assembled from one configuration.
struct Experiment {
  RunConfig config;
  std::shared_ptr<const ChainModel> model;
  Trajectory reference;
  SimConfig sim;
  JointState operating_point;
  Eigen::VectorXd gain_scale;
  PidSpec pid;
  LqrSpec lqr;
  HybridSpec hybrid;

  /// "pid", "lqr" and "hybrid".
  std::map<std::string, ControllerSpec> Controllers() const;
  ControllerSpec Controller(const std::string& name) const;
  std::string ConfigHash() const;
};

Experiment BuildExperiment(const RunConfig& cfg);

}  // namespace stsexo
