#include "stsexo/controllers.hpp"

#include <cmath>

#include "stsexo/error.hpp"
#include "stsexo/sim.hpp"

namespace stsexo {

void PidGains::Validate() const {
  const auto n = kp.size();
  if (n == 0 || ki.size() != n || kd.size() != n) {
    throw InvalidArgument("PID gain vectors must be non-empty and of equal length");
  }
  if ((kp.array() < 0.0).any() || (ki.array() < 0.0).any() || (kd.array() < 0.0).any() ||
      !kp.allFinite() || !ki.allFinite() || !kd.allFinite()) {
    throw InvalidArgument("PID gains must be finite and non-negative");
  }
  if (!(d_filter_tau_s > 0.0)) throw InvalidArgument("derivative filter constant must be positive");
  if (!(windup_limit_nm > 0.0)) throw InvalidArgument("windup limit must be positive");
}

PidState PidState::Zero(int num_joints) {
  return {Eigen::VectorXd::Zero(num_joints), Eigen::VectorXd::Zero(num_joints),
          Eigen::VectorXd::Zero(num_joints), false};
}

PidOutput PidStep(const PidGains& gains, const PidState& state, const Eigen::VectorXd& e,
                  const Eigen::VectorXd& e_dot, double dt, const Eigen::VectorXd& torque_limit) {
  const int n = gains.num_joints();
  if (e.size() != n || e_dot.size() != n || torque_limit.size() != n ||
      state.integral.size() != n) {
    throw InvalidArgument("PID input dimension mismatch");
  }
  if (!(dt > 0.0)) throw InvalidArgument("PID step needs dt > 0");
  PidOutput out{Eigen::VectorXd(n), state};
  PidState& next = out.state;
  if (!state.started) {
    next.prev_deriv = e_dot;
    next.prev_error = e;
    next.started = true;
  }
  const double blend = dt / (gains.d_filter_tau_s + dt);
  for (int j = 0; j < n; ++j) {
    const double deriv = next.prev_deriv(j) + blend * (e_dot(j) - next.prev_deriv(j));
    const double bound = gains.windup_limit_nm / std::max(gains.ki(j), 1e-12);
    const double held = next.integral(j);
    double integral = held + 0.5 * (e(j) + next.prev_error(j)) * dt;
    integral = std::clamp(integral, -bound, bound);
    double tau = gains.kp(j) * e(j) + gains.ki(j) * integral + gains.kd(j) * deriv;
    if (std::abs(tau) > torque_limit(j) && tau * e(j) > 0.0) {
      integral = held;
      tau = gains.kp(j) * e(j) + gains.ki(j) * integral + gains.kd(j) * deriv;
    }
    out.tau(j) = tau;
    next.integral(j) = integral;
    next.prev_deriv(j) = deriv;
    next.prev_error(j) = e(j);
  }
  return out;
}

Eigen::VectorXd LqrStep(const Eigen::MatrixXd& torque_gain, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_ref, const Eigen::VectorXd& ff) {
  if (x.size() != torque_gain.cols() || x_ref.size() != x.size() ||
      ff.size() != torque_gain.rows()) {
    throw InvalidArgument("LQR step dimension mismatch");
  }
  return -torque_gain * (x - x_ref) + ff;
}

Eigen::VectorXd HybridBlend(double alpha, const Eigen::VectorXd& tau_lqr,
                            const Eigen::VectorXd& tau_pid) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (tau_lqr.size() != tau_pid.size()) throw InvalidArgument("hybrid torque size mismatch");
  return alpha * tau_lqr + (1.0 - alpha) * tau_pid;
}

Eigen::VectorXd Saturate(const Eigen::VectorXd& tau, const Eigen::VectorXd& limit) {
  return tau.cwiseMax(-limit).cwiseMin(limit);
}

Eigen::VectorXd HybridStep(double alpha, const Eigen::VectorXd& tau_lqr,
                           const Eigen::VectorXd& tau_pid, const Eigen::VectorXd& limit) {
  return Saturate(HybridBlend(alpha, tau_lqr, tau_pid), limit);
}

Eigen::VectorXd ReflectedInertia(const ChainModel& model, const Eigen::VectorXd& q) {
  return MassMatrix(model, q).diagonal();
}

PidGains ScalePidGains(const PidGains& gains, const Eigen::VectorXd& scale) {
  if (scale.size() != gains.num_joints()) throw InvalidArgument("gain scale size mismatch");
  PidGains out = gains;
  out.kp = gains.kp.cwiseProduct(scale);
  out.ki = gains.ki.cwiseProduct(scale);
  out.kd = gains.kd.cwiseProduct(scale);
  return out;
}

LqrController DesignLqr(std::shared_ptr<const ChainModel> model, const JointState& op,
                        const LqrWeights& weights, LqrStructure structure,
                        const Eigen::VectorXd& input_scale, Feedforward feedforward) {
  if (!model) throw InvalidArgument("LQR design needs a model");
  const int n = model->num_joints();
  if (weights.q_position.size() != n || weights.q_velocity.size() != n || weights.r.size() != n ||
      input_scale.size() != n) {
    throw InvalidArgument("LQR weights must have one entry per joint");
  }
  if ((input_scale.array() <= 0.0).any()) throw InvalidArgument("input scale must be positive");
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Q.diagonal() << weights.q_position, weights.q_velocity;
  const Eigen::MatrixXd R = weights.r.asDiagonal();

  LqrController c;
  c.input_scale = input_scale;
  c.feedforward = feedforward;
  c.model = model;
  if (structure == LqrStructure::kPerJoint) {
    LqrDesign& d = c.design;
    d.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    d.A.topRightCorner(n, n).setIdentity();
    d.B = Eigen::MatrixXd::Zero(2 * n, n);
    d.B.bottomRows(n).setIdentity();
    d.Q = Q;
    d.R = R;
    d.P = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    d.K = Eigen::MatrixXd::Zero(n, 2 * n);
    for (int j = 0; j < n; ++j) {
      const auto g = PerJointLqr(weights.q_position(j), weights.q_velocity(j), weights.r(j));
      const double r = weights.r(j);
      d.P(j, n + j) = d.P(n + j, j) = g.k_position * r;
      d.P(n + j, n + j) = g.k_velocity * r;
      d.P(j, j) = g.k_position * g.k_velocity * r;
      d.K(j, j) = g.k_position;
      d.K(j, n + j) = g.k_velocity;
    }
    d.residual = CareResidual(d.A, d.B, d.Q, d.R, d.P);
  } else {
    const LinearModel lin = Linearize(*model, op);
    c.design = LqrGain(lin.A, lin.B * input_scale.asDiagonal(), Q, R);
  }
  c.torque_gain = input_scale.asDiagonal() * c.design.K;
  return c;
}

Eigen::VectorXd FeedforwardTorque(const LqrController& lqr, const JointState& ref,
                                  const Eigen::VectorXd& qdd_ref) {
  switch (lqr.feedforward) {
    case Feedforward::kNone:
      return Eigen::VectorXd::Zero(ref.q.size());
    case Feedforward::kGravity:
      return GravityVector(*lqr.model, ref.q);
    case Feedforward::kInverseDynamics:
      return InverseDynamics(*lqr.model, ref.q, ref.qd, qdd_ref);
  }
  return Eigen::VectorXd::Zero(ref.q.size());
}

std::string ControllerKind(const ControllerSpec& spec) {
  struct Visitor {
    std::string operator()(const PidSpec&) const { return "pid"; }
    std::string operator()(const LqrSpec&) const { return "lqr"; }
    std::string operator()(const HybridSpec&) const { return "hybrid"; }
    std::string operator()(const FeedforwardSpec&) const { return "feedforward"; }
    std::string operator()(const ZeroSpec&) const { return "zero"; }
  };
  return std::visit(Visitor{}, spec);
}

namespace {

void ValidateLqr(const LqrController& lqr, int n) {
  if (lqr.torque_gain.rows() != n || lqr.torque_gain.cols() != 2 * n) {
    throw InvalidArgument("LQR gain does not match the number of joints");
  }
  if (lqr.feedforward != Feedforward::kNone &&
      (!lqr.model || lqr.model->num_joints() != n)) {
    throw InvalidArgument("LQR feedforward needs a model with matching joints");
  }
}

}  // namespace

void ValidateSpec(const ControllerSpec& spec, int n) {
  if (const auto* p = std::get_if<PidSpec>(&spec)) {
    p->gains.Validate();
    if (p->gains.num_joints() != n) throw InvalidArgument("PID gains do not match joints");
  } else if (const auto* l = std::get_if<LqrSpec>(&spec)) {
    ValidateLqr(l->lqr, n);
  } else if (const auto* h = std::get_if<HybridSpec>(&spec)) {
    if (!(h->alpha >= 0.0 && h->alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    h->pid.Validate();
    if (h->pid.num_joints() != n) throw InvalidArgument("hybrid PID gains do not match joints");
    ValidateLqr(h->lqr, n);
  } else if (const auto* f = std::get_if<FeedforwardSpec>(&spec)) {
    if (!f->model || f->model->num_joints() != n) {
      throw InvalidArgument("feedforward controller needs a model with matching joints");
    }
  }
}

Controller::Controller(ControllerSpec spec) : spec_(std::move(spec)) { Reset(); }

void Controller::Reset() {
  int n = 0;
  if (const auto* p = std::get_if<PidSpec>(&spec_)) n = p->gains.num_joints();
  if (const auto* h = std::get_if<HybridSpec>(&spec_)) n = h->pid.num_joints();
  pid_state_ = PidState::Zero(n);
}

Eigen::VectorXd Controller::Compute(const JointState& state, const JointState& ref,
                                    const Eigen::VectorXd& qdd_ref, double dt,
                                    const Eigen::VectorXd& torque_limit) {
  const int n = static_cast<int>(state.q.size());
  auto stacked = [n](const JointState& s) {
    Eigen::VectorXd x(2 * n);
    x << s.q, s.qd;
    return x;
  };
  auto pid = [&](const PidGains& gains) {
    PidOutput out = PidStep(gains, pid_state_, ref.q - state.q, ref.qd - state.qd, dt,
                            torque_limit);
    pid_state_ = std::move(out.state);
    return out.tau;
  };
  auto lqr = [&](const LqrController& c) {
    return LqrStep(c.torque_gain, stacked(state), stacked(ref), FeedforwardTorque(c, ref, qdd_ref));
  };
  if (const auto* p = std::get_if<PidSpec>(&spec_)) return pid(p->gains);
  if (const auto* l = std::get_if<LqrSpec>(&spec_)) return lqr(l->lqr);
  if (const auto* h = std::get_if<HybridSpec>(&spec_)) {
    const Eigen::VectorXd tau_lqr = lqr(h->lqr);
    const Eigen::VectorXd tau_pid = pid(h->pid);
    return HybridBlend(h->alpha, tau_lqr, tau_pid);
  }
  if (const auto* f = std::get_if<FeedforwardSpec>(&spec_)) {
    if (f->evaluate_at == FeedforwardSpec::EvaluateAt::kReference) {
      return InverseDynamics(*f->model, ref.q, ref.qd, qdd_ref);
    }
    const Eigen::VectorXd qd_mid = state.qd + 0.5 * dt * qdd_ref;
    const Eigen::VectorXd q_mid = state.q + 0.5 * dt * state.qd + 0.125 * dt * dt * qdd_ref;
    return InverseDynamics(*f->model, q_mid, qd_mid, qdd_ref);
  }
  return Eigen::VectorXd::Zero(n);
}

PerformanceIndex ComputePerformanceIndex(const SimLog& log, double w1, double w2) {
  if (log.num_samples() == 0) throw InvalidArgument("performance index of an empty log");
  if (!(w1 >= 0.0) || !(w2 >= 0.0)) throw InvalidArgument("index weights must be non-negative");
  PerformanceIndex pi;
  pi.w1 = w1;
  pi.w2 = w2;
  const Eigen::MatrixXd err = log.q_ref - log.q;
  pi.rmse_total_rad = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
  for (int i = 1; i < log.num_samples(); ++i) {
    const double dt = log.t(i) - log.t(i - 1);
    pi.torque_energy += 0.5 * dt * (log.tau.row(i).squaredNorm() + log.tau.row(i - 1).squaredNorm());
  }
  pi.J = w1 * pi.rmse_total_rad + w2 * pi.torque_energy;
  return pi;
}

}  // namespace stsexo
