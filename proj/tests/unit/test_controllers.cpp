#include <cmath>

#include <gtest/gtest.h>

#include "stsexo/controllers.hpp"
#include "stsexo/error.hpp"
#include "stsexo/sim.hpp"
#include "support.hpp"

namespace stsexo {
namespace {

using testing::DefaultModel;
using testing::Rng;

const Eigen::VectorXd kLimit = Eigen::VectorXd::Constant(3, 150.0);

PidGains Gains(double kp, double ki, double kd) {
  PidGains g;
  g.kp = Eigen::VectorXd::Constant(3, kp);
  g.ki = Eigen::VectorXd::Constant(3, ki);
  g.kd = Eigen::VectorXd::Constant(3, kd);
  return g;
}

Eigen::VectorXd Hip(double v) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
  e(Index(Joint::kHip)) = v;
  return e;
}

TEST(Pid, ZeroErrorZeroTorque) {
  const PidOutput out = PidStep(Gains(120, 8.5, 18), PidState::Zero(3), Eigen::VectorXd::Zero(3),
                                Eigen::VectorXd::Zero(3), 1e-3, kLimit);
  EXPECT_EQ(out.tau, Eigen::VectorXd::Zero(3));
}

TEST(Pid, ProportionalDefaultHip) {
  PidGains g = Gains(0, 0, 0);
  g.kp(Index(Joint::kHip)) = 120.0;
  const PidOutput out = PidStep(g, PidState::Zero(3), Hip(0.1), Eigen::VectorXd::Zero(3), 1e-3, kLimit);
  EXPECT_NEAR(out.tau(Index(Joint::kHip)), 12.0, 1e-12);
}

TEST(Pid, TrapezoidalIntegralOfConstant) {
  const PidGains g = Gains(0, 8.5, 0);
  PidState s = PidState::Zero(3);
  Eigen::VectorXd tau;
  const Eigen::VectorXd e = Eigen::VectorXd::Constant(3, 0.01);
  for (int k = 0; k < 1000; ++k) {
    const PidOutput out = PidStep(g, s, e, Eigen::VectorXd::Zero(3), 1e-3, kLimit);
    s = out.state;
    tau = out.tau;
  }
  // the first step integrates from a zero previous error
  EXPECT_NEAR(tau(0), 0.085, 0.085 * 1e-3);
}

TEST(Pid, IntegralClampedByWindupLimit) {
  PidGains g = Gains(0, 10.0, 0);
  g.windup_limit_nm = 5.0;
  PidState s = PidState::Zero(3);
  Eigen::VectorXd tau;
  for (int k = 0; k < 5000; ++k) {
    const PidOutput out = PidStep(g, s, Eigen::VectorXd::Constant(3, 1.0), Eigen::VectorXd::Zero(3), 1e-3, kLimit);
    s = out.state;
    tau = out.tau;
    ASSERT_LE(s.integral.cwiseAbs().maxCoeff(), g.windup_limit_nm / 10.0 + 1e-15);
  }
  EXPECT_NEAR(tau(0), 5.0, 1e-12);
}

TEST(Pid, IntegralHeldWhileSaturatedTowardError) {
  PidGains g = Gains(1000, 10.0, 0);
  g.windup_limit_nm = 1e6;
  PidState s = PidState::Zero(3);
  const Eigen::VectorXd e = Eigen::VectorXd::Constant(3, 1.0);  // 1000 N m > limit
  for (int k = 0; k < 100; ++k) s = PidStep(g, s, e, Eigen::VectorXd::Zero(3), 1e-3, kLimit).state;
  EXPECT_EQ(s.integral, Eigen::VectorXd::Zero(3));
  // no saturation: integral advances
  s = PidStep(g, s, Eigen::VectorXd::Constant(3, 0.01), Eigen::VectorXd::Zero(3), 1e-3, kLimit).state;
  EXPECT_GT(s.integral(0), 0.0);
}

TEST(Pid, DerivativeFilterConvergesToRate) {
  PidGains g = Gains(0, 0, 2.0);
  g.d_filter_tau_s = 0.01;
  PidState s = PidState::Zero(3);
  PidOutput out;
  for (int k = 0; k < 200; ++k) {
    out = PidStep(g, s, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 0.5), 1e-3, kLimit);
    s = out.state;
  }
  EXPECT_NEAR(out.tau(0), 1.0, 1e-9);
}

TEST(Pid, RejectsBadGains) {
  PidGains g = Gains(1, 1, 1);
  g.kp(0) = -1.0;
  EXPECT_THROW(g.Validate(), InvalidArgument);
  g = Gains(1, 1, 1);
  g.d_filter_tau_s = 0.0;
  EXPECT_THROW(g.Validate(), InvalidArgument);
  g = Gains(1, 1, 1);
  g.windup_limit_nm = 0.0;
  EXPECT_THROW(g.Validate(), InvalidArgument);
}

TEST(Lqr, ZeroErrorGivesFeedforward) {
  const Eigen::MatrixXd K = Eigen::MatrixXd::Random(3, 6);
  Eigen::VectorXd x(6);
  x << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  EXPECT_EQ(LqrStep(K, x, x, Eigen::VectorXd::Zero(3)), Eigen::VectorXd::Zero(3));
  const Eigen::VectorXd ff = Eigen::Vector3d(1, 2, 3);
  EXPECT_EQ(LqrStep(K, x, x, ff), ff);
}

TEST(Lqr, HipDefaultGain) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(3, 6);
  const int h = Index(Joint::kHip);
  K(h, h) = 44.72;
  K(h, 3 + h) = 13.76;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(6), ref = Eigen::VectorXd::Zero(6);
  ref(h) = 0.1;
  EXPECT_NEAR(LqrStep(K, x, ref, Eigen::VectorXd::Zero(3))(h), 4.472, 1e-12);
}

TEST(Lqr, LinearInError) {
  Rng rng(5);
  const Eigen::MatrixXd K = rng.Matrix(3, 6, -50, 50);
  const Eigen::VectorXd ref = rng.Vector(6, -1, 1), ff = Eigen::VectorXd::Zero(3);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd e1 = rng.Vector(6, -1, 1), e2 = rng.Vector(6, -1, 1);
    const double a = rng.Uniform(-3, 3), b = rng.Uniform(-3, 3);
    const Eigen::VectorXd lhs = LqrStep(K, ref - (a * e1 + b * e2), ref, ff);
    const Eigen::VectorXd rhs = a * LqrStep(K, ref - e1, ref, ff) + b * LqrStep(K, ref - e2, ref, ff);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_THROW(LqrStep(K, Eigen::VectorXd::Zero(5), ref, ff), InvalidArgument);
}

TEST(Lqr, GravityFeedforwardMatchesInverseDynamics) {
  const auto model = std::make_shared<const ChainModel>(DefaultModel());
  const JointState up{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  const LqrWeights w{Eigen::Vector3d(120, 280, 200), Eigen::Vector3d(6, 14, 10), Eigen::Vector3d(0.15, 0.08, 0.1)};
  const LqrController lqr =
      DesignLqr(model, up, w, LqrStructure::kPerJoint, Eigen::VectorXd::Ones(3), Feedforward::kGravity);
  const JointState ref{Eigen::Vector3d(0.2, 0.5, 0.9), Eigen::VectorXd::Zero(3)};
  const Eigen::VectorXd ff = FeedforwardTorque(lqr, ref, Eigen::VectorXd::Zero(3));
  Eigen::VectorXd x(6);
  x << ref.q, ref.qd;
  const Eigen::VectorXd tau = LqrStep(lqr.torque_gain, x, x, ff);
  EXPECT_LT((tau - InverseDynamics(*model, ref.q, ref.qd, Eigen::VectorXd::Zero(3))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lqr, PerJointDesignUsesClosedForm) {
  const auto model = std::make_shared<const ChainModel>(DefaultModel());
  const JointState up{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  const LqrWeights w{Eigen::Vector3d(120, 280, 200), Eigen::Vector3d(6, 14, 10), Eigen::Vector3d(0.15, 0.08, 0.1)};
  const Eigen::VectorXd scale = Eigen::Vector3d(2, 3, 4);
  const LqrController lqr = DesignLqr(model, up, w, LqrStructure::kPerJoint, scale, Feedforward::kNone);
  const int h = Index(Joint::kHip);
  EXPECT_NEAR(lqr.design.K(h, h), 44.7214, 1e-4);
  EXPECT_NEAR(lqr.design.K(h, 3 + h), 13.7638, 1e-4);
  EXPECT_NEAR(lqr.torque_gain(h, h), 4.0 * lqr.design.K(h, h), 1e-12);
  EXPECT_LT(lqr.design.residual, 1e-8);
}

TEST(Lqr, CoupledDesignStabilizesLinearization) {
  const auto model = std::make_shared<const ChainModel>(DefaultModel());
  const JointState up{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  const LqrWeights w{Eigen::Vector3d(120, 280, 200), Eigen::Vector3d(6, 14, 10), Eigen::Vector3d(0.15, 0.08, 0.1)};
  const Eigen::VectorXd scale = ReflectedInertia(*model, up.q);
  const LqrController lqr = DesignLqr(model, up, w, LqrStructure::kCoupled, scale, Feedforward::kGravity);
  const LinearModel lin = Linearize(*model, up);
  EXPECT_LT(SpectralAbscissa(lin.A - lin.B * lqr.torque_gain), 0.0);
}

TEST(Hybrid, EndpointsAreBitwiseExact) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd a = rng.Vector(3, -200, 200), b = rng.Vector(3, -200, 200);
    EXPECT_EQ(HybridBlend(0.0, a, b), b);
    EXPECT_EQ(HybridBlend(1.0, a, b), a);
  }
}

TEST(Hybrid, PaperBlendArithmetic) {
  const Eigen::VectorXd lqr = Eigen::VectorXd::Constant(3, 10.0), pid = Eigen::VectorXd::Constant(3, 20.0);
  EXPECT_NEAR(HybridBlend(0.65, lqr, pid)(0), 13.5, 1e-12);
}

TEST(Hybrid, AffineInAlpha) {
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd a = rng.Vector(3, -200, 200), b = rng.Vector(3, -200, 200);
    const double x = rng.Uniform(0, 1), y = rng.Uniform(0, 1), w = rng.Uniform(0, 1);
    const Eigen::VectorXd lhs = HybridBlend(w * x + (1 - w) * y, a, b);
    const Eigen::VectorXd rhs = w * HybridBlend(x, a, b) + (1 - w) * HybridBlend(y, a, b);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Hybrid, SaturatesAfterBlending) {
  const Eigen::VectorXd lqr = Eigen::VectorXd::Constant(3, 300.0), pid = Eigen::VectorXd::Constant(3, -100.0);
  const Eigen::VectorXd tau = HybridStep(0.5, lqr, pid, kLimit);
  EXPECT_NEAR(tau(0), 100.0, 1e-12);
  EXPECT_EQ(HybridStep(1.0, lqr, pid, kLimit), kLimit);
  EXPECT_THROW(HybridBlend(1.5, lqr, pid), InvalidArgument);
}

TEST(Saturate, ClampsSymmetrically) {
  const Eigen::VectorXd tau = Saturate(Eigen::Vector3d(-200, 10, 151), kLimit);
  EXPECT_EQ(tau, Eigen::Vector3d(-150, 10, 150));
}

SimLog ConstantLog(double err, double torque, int n = 3001, double dt = 1e-3) {
  SimLog log;
  log.t = Eigen::VectorXd::LinSpaced(n, 0.0, (n - 1) * dt);
  log.q_ref = Eigen::MatrixXd::Ones(n, 3);
  log.q = log.q_ref.array() - err;
  log.tau = Eigen::MatrixXd::Constant(n, 3, torque);
  return log;
}

TEST(PerformanceIndex, Examples) {
  EXPECT_DOUBLE_EQ(ComputePerformanceIndex(ConstantLog(0.0, 0.0), 1.0, 1e-4).J, 0.0);
  EXPECT_NEAR(ComputePerformanceIndex(ConstantLog(0.1, 0.0), 1.0, 0.0).J, 0.1, 1e-12);
  // ||tau||^2 = 3 * (10 / sqrt(3))^2 = 100
  const PerformanceIndex p = ComputePerformanceIndex(ConstantLog(0.0, 10.0 / std::sqrt(3.0)), 0.0, 1.0);
  EXPECT_NEAR(p.J, 300.0, 1e-9);
  EXPECT_NEAR(p.torque_energy, 300.0, 1e-9);
}

TEST(PerformanceIndex, AdditiveAndNonNegative) {
  const SimLog log = ConstantLog(0.05, 3.0);
  const PerformanceIndex a = ComputePerformanceIndex(log, 2.0, 0.0);
  const PerformanceIndex b = ComputePerformanceIndex(log, 0.0, 1e-3);
  const PerformanceIndex c = ComputePerformanceIndex(log, 2.0, 1e-3);
  EXPECT_NEAR(c.J, a.J + b.J, 1e-12);
  EXPECT_GE(c.J, 0.0);
  EXPECT_THROW(ComputePerformanceIndex(log, -1.0, 0.0), InvalidArgument);
  EXPECT_THROW(ComputePerformanceIndex(SimLog{}, 1.0, 0.0), InvalidArgument);
}

TEST(ControllerSpec, KindsAndValidation) {
  EXPECT_EQ(ControllerKind(PidSpec{Gains(1, 1, 1)}), "pid");
  EXPECT_EQ(ControllerKind(ZeroSpec{}), "zero");
  HybridSpec h;
  h.alpha = 1.2;
  h.pid = Gains(1, 1, 1);
  EXPECT_THROW(ValidateSpec(h, 3), InvalidArgument);
  EXPECT_THROW(ValidateSpec(PidSpec{Gains(1, 1, 1)}, 2), InvalidArgument);
}

TEST(ControllerObject, CopiesAreIndependent) {
  Controller a(PidSpec{Gains(10, 5, 0)});
  const JointState ref{Eigen::VectorXd::Constant(3, 0.1), Eigen::VectorXd::Zero(3)};
  const JointState now{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  a.Compute(now, ref, Eigen::VectorXd::Zero(3), 1e-3, kLimit);
  Controller b = a;
  const Eigen::VectorXd ta = a.Compute(now, ref, Eigen::VectorXd::Zero(3), 1e-3, kLimit);
  const Eigen::VectorXd tb = b.Compute(now, ref, Eigen::VectorXd::Zero(3), 1e-3, kLimit);
  EXPECT_EQ(ta, tb);
  a.Reset();
  Controller fresh(PidSpec{Gains(10, 5, 0)});
  EXPECT_EQ(a.Compute(now, ref, Eigen::VectorXd::Zero(3), 1e-3, kLimit),
            fresh.Compute(now, ref, Eigen::VectorXd::Zero(3), 1e-3, kLimit));
}

}  // namespace
}  // namespace stsexo
