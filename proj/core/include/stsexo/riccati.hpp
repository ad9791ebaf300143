#pragma once

#include <optional>
#include <ostream>

#include <Eigen/Dense>

#include "stsexo/dynamics.hpp"

namespace stsexo {

/// x' = A x + B u around an operating point, with x = [q; qd] and u = tau.
struct LinearModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  JointState operating_point;
};

/// Linearizes the chain dynamics by central finite differences of the
/// velocity-product and gravity terms. Throws SingularConfiguration when
/// M(q) at the operating point cannot be inverted.
LinearModel Linearize(const ChainModel& model, const JointState& op, double step = 1e-6);

/// Solves A^T X + X A + Q = 0 through the vectorized (Kronecker) linear
/// system. The result is symmetrized.
Eigen::MatrixXd SolveLyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Largest real part among the eigenvalues of a square matrix.
double SpectralAbscissa(const Eigen::MatrixXd& A);

/// ||A^T P + P A - P B R^-1 B^T P + Q||_F / (1 + ||P||_F)
double CareResidual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                    const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);

struct CareOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  /// Optional stabilizing gain used to start the iteration.
  std::optional<Eigen::MatrixXd> initial_gain;
};

struct CareSolution {
  Eigen::MatrixXd P;
  int iterations = 0;
  double residual = 0.0;
};

/// Stabilizing solution of the continuous-time algebraic Riccati equation by
/// Newton-Kleinman iteration.
///
/// The starting gain is, in order of preference: the user-supplied one, zero
/// if A is already Hurwitz, c B^T with c = 1, 10, ... (six escalations), and
/// finally Bass's Lyapunov-based gain. Throws InvalidArgument on bad weights
/// and ConvergenceError when no stabilizing start exists, the iteration loses
/// stability, or the residual stagnates above 1e-8.
CareSolution SolveCare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       const CareOptions& options = {});

/// Infinite-horizon LQR design. K = R^-1 B^T P applies to the (A, B) the
/// design was made for.
struct LqrDesign {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd P;
  Eigen::MatrixXd K;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves the CARE and checks every design invariant; never returns a
/// design whose closed loop A - B K is not Hurwitz (ConvergenceError).
LqrDesign LqrGain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const CareOptions& options = {});

/// Plain-text dump of every matrix of a design, 6 significant digits.
void WriteDesignReport(std::ostream& out, const LqrDesign& design);

struct JointLqrGains {
  double k_position = 0.0;
  double k_velocity = 0.0;
};

/// Closed-form LQR for a unit double integrator with diag(q11, q22) and r:
/// K1 = sqrt(q11 / r), K2 = sqrt(q22 / r + 2 K1).
JointLqrGains PerJointLqr(double q11, double q22, double r);

}  // namespace stsexo
