#pragma once

#include <memory>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "stsexo/dynamics.hpp"
#include "stsexo/riccati.hpp"

namespace stsexo {

struct SimLog;

/// Per-joint PID gains (torque level) with the discrete-time extras.
struct PidGains {
  Eigen::VectorXd kp;  // N m / rad
  Eigen::VectorXd ki;  // N m / (rad s)
  Eigen::VectorXd kd;  // N m s / rad
  double d_filter_tau_s = 0.01;
  double windup_limit_nm = 50.0;

  int num_joints() const { return static_cast<int>(kp.size()); }
  void Validate() const;
};

struct PidState {
  Eigen::VectorXd integral;    // rad s
  Eigen::VectorXd prev_deriv;  // filtered error rate, rad/s
  Eigen::VectorXd prev_error;  // rad
  bool started = false;

  static PidState Zero(int num_joints);
};

struct PidOutput {
  Eigen::VectorXd tau;  // unsaturated
  PidState state;
};

/// One control period of the PID law on e = q_ref - q and e_dot = qd_ref - qd.
///
/// The integral advances by the trapezoidal rule, is held while the output
/// would saturate in the direction of the error, and is clamped to
/// windup_limit / ki. The rate term goes through a first-order low-pass.
PidOutput PidStep(const PidGains& gains, const PidState& state, const Eigen::VectorXd& e,
                  const Eigen::VectorXd& e_dot, double dt, const Eigen::VectorXd& torque_limit);

/// tau = -K (x - x_ref) + ff. Throws InvalidArgument on dimension mismatch.
Eigen::VectorXd LqrStep(const Eigen::MatrixXd& torque_gain, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_ref, const Eigen::VectorXd& ff);

/// alpha tau_lqr + (1 - alpha) tau_pid, before saturation.
Eigen::VectorXd HybridBlend(double alpha, const Eigen::VectorXd& tau_lqr,
                            const Eigen::VectorXd& tau_pid);

Eigen::VectorXd Saturate(const Eigen::VectorXd& tau, const Eigen::VectorXd& limit);

/// Blend followed by saturation.
Eigen::VectorXd HybridStep(double alpha, const Eigen::VectorXd& tau_lqr,
                           const Eigen::VectorXd& tau_pid, const Eigen::VectorXd& limit);

enum class Feedforward { kNone, kGravity, kInverseDynamics };
enum class LqrStructure { kPerJoint, kCoupled };

/// Scalar weights per joint; Q = diag(q_position, q_velocity), R = diag(r).
struct LqrWeights {
  Eigen::VectorXd q_position;
  Eigen::VectorXd q_velocity;
  Eigen::VectorXd r;
};

/// LQR tracking controller ready to run.
struct LqrController {
  LqrDesign design;            // acceleration-level design (K = R^-1 B^T P)
  Eigen::VectorXd input_scale;  // torque = input_scale .* acceleration command
  Eigen::MatrixXd torque_gain;  // diag(input_scale) * design.K
  Feedforward feedforward = Feedforward::kGravity;
  std::shared_ptr<const ChainModel> model;  // used for the feedforward only
};

/// Per-joint designs solve the closed form on a unit double integrator for
/// each joint; coupled designs solve the CARE on the chain linearized at op
/// with B scaled by input_scale.
LqrController DesignLqr(std::shared_ptr<const ChainModel> model, const JointState& op,
                        const LqrWeights& weights, LqrStructure structure,
                        const Eigen::VectorXd& input_scale, Feedforward feedforward);

/// Feedforward torque for a reference sample.
Eigen::VectorXd FeedforwardTorque(const LqrController& lqr, const JointState& ref,
                                  const Eigen::VectorXd& qdd_ref);

/// Diagonal of M(q): reflected inertia seen by each joint. Used to map
/// unit-inertia gain tables to torque-level gains.
Eigen::VectorXd ReflectedInertia(const ChainModel& model, const Eigen::VectorXd& q);

PidGains ScalePidGains(const PidGains& gains, const Eigen::VectorXd& scale);

struct PidSpec {
  PidGains gains;
};
struct LqrSpec {
  LqrController lqr;
};
struct HybridSpec {
  double alpha = 0.65;
  PidGains pid;
  LqrController lqr;
};
/// Test controller built from the model's inverse dynamics alone, with no
/// error gains. kMeasured evaluates M and the bias terms at the measured
/// state extrapolated half a step (the midpoint of the hold interval) with
/// the reference acceleration; kReference evaluates everything along the
/// reference, which is open loop.
struct FeedforwardSpec {
  enum class EvaluateAt { kMeasured, kReference };
  std::shared_ptr<const ChainModel> model;
  EvaluateAt evaluate_at = EvaluateAt::kMeasured;
};
/// Test controller: tau = 0.
struct ZeroSpec {};

using ControllerSpec = std::variant<PidSpec, LqrSpec, HybridSpec, FeedforwardSpec, ZeroSpec>;

std::string ControllerKind(const ControllerSpec& spec);
void ValidateSpec(const ControllerSpec& spec, int num_joints);

/// Stateful runtime wrapper; copies are independent controllers.
class Controller {
 public:
  explicit Controller(ControllerSpec spec);

  void Reset();
  /// Unsaturated torque for the current measured state and reference sample.
  Eigen::VectorXd Compute(const JointState& state, const JointState& ref,
                          const Eigen::VectorXd& qdd_ref, double dt,
                          const Eigen::VectorXd& torque_limit);
  const ControllerSpec& spec() const { return spec_; }

 private:
  ControllerSpec spec_;
  PidState pid_state_;
};

/// Composite index J = w1 * RMSE_total + w2 * integral ||tau||^2 dt.
struct PerformanceIndex {
  double w1 = 1.0;
  double w2 = 1e-4;
  double rmse_total_rad = 0.0;
  double torque_energy = 0.0;  // N^2 m^2 s
  double J = 0.0;
};

PerformanceIndex ComputePerformanceIndex(const SimLog& log, double w1, double w2);

}  // namespace stsexo
