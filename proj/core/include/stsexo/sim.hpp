#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stsexo/controllers.hpp"
#include "stsexo/dynamics.hpp"
#include "stsexo/trajectory.hpp"

namespace stsexo {

/// Rectangular torque pulse added to one joint at the plant input.
struct TorquePulse {
  Joint joint = Joint::kHip;
  double start_s = 0.0;
  double width_s = 0.0;
  double magnitude_nm = 0.0;
};

struct SimConfig {
  double dt_s = 1e-3;
  double duration_s = 3.0;
  /// Overrides the start state; defaults to the first reference sample at rest.
  std::optional<JointState> initial_state;
  /// Added to the initial joint angles (rad, Joint order).
  Eigen::VectorXd initial_offset_rad;
  std::vector<TorquePulse> disturbances;
  /// Fractional mass scaling per segment, applied to the plant only.
  Eigen::VectorXd mass_perturbation;

  void Validate(int num_joints) const;
};

/// Time histories of one closed-loop run. Matrices hold one row per sample
/// and one column per joint (Joint order, radians).
struct SimLog {
  std::string controller;
  Eigen::VectorXd t;
  Eigen::MatrixXd q;
  Eigen::MatrixXd qd;
  Eigen::MatrixXd q_ref;
  Eigen::MatrixXd qd_ref;
  Eigen::MatrixXd tau;  // applied, after saturation
  std::vector<bool> saturated;
  Eigen::VectorXd energy;  // J
  PhaseMarks phase_marks;

  int num_samples() const { return static_cast<int>(t.size()); }
};

/// Fixed-step RK4 with the controller torque held over each step. The
/// reference is resampled to 1/dt when needed and held at its last sample if
/// the run is longer than the trajectory. Throws DivergenceError when the
/// state leaves |q| <= 2 pi or becomes non-finite.
SimLog Simulate(const ChainModel& model, const ControllerSpec& controller,
                const Trajectory& traj, const SimConfig& cfg);

/// Copy of the model with segment masses and inertias scaled by (1 + f).
/// Fractions must lie in [-0.5, 0.5].
ChainModel PerturbModel(const ChainModel& model, const Eigen::VectorXd& fraction);

struct ComparisonResult {
  std::map<std::string, SimLog> logs;
  std::map<std::string, std::string> errors;
};

/// Runs every named controller on the same setup, concurrently. A failing
/// run is reported in `errors` and does not affect the others.
ComparisonResult RunComparison(const ChainModel& model,
                               const std::map<std::string, ControllerSpec>& controllers,
                               const Trajectory& traj, const SimConfig& cfg);

/// Columns: t_s, per-joint reference and actual angles in degrees (hip, knee,
/// ankle), applied torques and total energy.
void WriteSimLogCsv(std::ostream& out, const SimLog& log);
/// Reads what WriteSimLogCsv writes; velocities are left empty.
SimLog LoadSimLogCsv(std::istream& in);

}  // namespace stsexo
