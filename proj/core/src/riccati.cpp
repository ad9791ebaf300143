#include "stsexo/riccati.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "stsexo/error.hpp"

namespace stsexo {

LinearModel Linearize(const ChainModel& model, const JointState& op, double step) {
  const int n = model.num_joints();
  if (op.q.size() != n || op.qd.size() != n || !op.IsFinite()) {
    throw InvalidArgument("operating point has wrong dimension or non-finite entries");
  }
  const Eigen::MatrixXd M = MassMatrix(model, op.q);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0) ||
      eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff() > 1e12) {
    throw SingularConfiguration("mass matrix is singular at the operating point");
  }
  auto bias = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& qd) -> Eigen::VectorXd {
    return CoriolisMatrix(model, q, qd) * qd + GravityVector(model, q);
  };
  Eigen::MatrixXd dq(n, n), dqd(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd hi = op.q, lo = op.q;
    hi(k) += step;
    lo(k) -= step;
    dq.col(k) = (bias(hi, op.qd) - bias(lo, op.qd)) / (2.0 * step);
    Eigen::VectorXd vhi = op.qd, vlo = op.qd;
    vhi(k) += step;
    vlo(k) -= step;
    dqd.col(k) = (bias(op.q, vhi) - bias(op.q, vlo)) / (2.0 * step);
  }
  const auto ldlt = M.ldlt();
  LinearModel lin;
  lin.operating_point = op;
  lin.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  lin.A.topRightCorner(n, n).setIdentity();
  lin.A.bottomLeftCorner(n, n) = -ldlt.solve(dq);
  lin.A.bottomRightCorner(n, n) = -ldlt.solve(dqd);
  lin.B = Eigen::MatrixXd::Zero(2 * n, n);
  lin.B.bottomRows(n) = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  return lin;
}

Eigen::MatrixXd SolveLyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw InvalidArgument("Lyapunov operands must be square and of equal size");
  }
  // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X), column-major vec.
  const Eigen::MatrixXd At = A.transpose();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  for (int j = 0; j < n; ++j) {
    L.block(j * n, j * n, n, n) += At;
    for (int i = 0; i < n; ++i) {
      L.block(i * n, j * n, n, n).diagonal().array() += At(i, j);
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
  if (!lu.isInvertible()) throw ConvergenceError("Lyapunov operator is singular");
  const Eigen::VectorXd x = lu.solve(rhs);
  const Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

double SpectralAbscissa(const Eigen::MatrixXd& A) {
  const Eigen::EigenSolver<Eigen::MatrixXd> eig(A, false);
  if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  return eig.eigenvalues().real().maxCoeff();
}

double CareResidual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                    const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd BtP = B.transpose() * P;
  const Eigen::MatrixXd res = A.transpose() * P + P * A - BtP.transpose() * R.ldlt().solve(BtP) + Q;
  return res.norm() / (1.0 + P.norm());
}

namespace {

void ValidateWeights(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
  const auto n = A.rows(), m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
      R.cols() != m) {
    throw InvalidArgument("CARE operand dimensions are inconsistent");
  }
  if (!A.allFinite() || !B.allFinite() || !Q.allFinite() || !R.allFinite()) {
    throw InvalidArgument("CARE operands must be finite");
  }
  if ((Q - Q.transpose()).norm() > 1e-10 * (1.0 + Q.norm())) {
    throw InvalidArgument("Q must be symmetric");
  }
  if ((R - R.transpose()).norm() > 1e-10 * (1.0 + R.norm())) {
    throw InvalidArgument("R must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eq(Q, Eigen::EigenvaluesOnly);
  if (eq.eigenvalues().minCoeff() < -1e-12 * (1.0 + Q.norm())) {
    throw InvalidArgument("Q must be positive semidefinite");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(R, Eigen::EigenvaluesOnly);
  if (!(er.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidArgument("R must be positive definite");
  }
}

bool IsStabilizing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& K) {
  return SpectralAbscissa(A - B * K) < 0.0;
}

std::optional<Eigen::MatrixXd> InitialGain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                           const CareOptions& options) {
  const auto n = A.rows(), m = B.cols();
  if (options.initial_gain) {
    if (options.initial_gain->rows() != m || options.initial_gain->cols() != n) {
      throw InvalidArgument("initial gain has wrong dimensions");
    }
    if (IsStabilizing(A, B, *options.initial_gain)) return options.initial_gain;
  }
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(m, n);
  if (IsStabilizing(A, B, zero)) return zero;
  double c = 1.0;
  for (int i = 0; i <= 6; ++i, c *= 10.0) {
    const Eigen::MatrixXd K = c * B.transpose();
    if (IsStabilizing(A, B, K)) return K;
  }
  // Bass: with beta > max Re(eig(A)), (A + beta I) Z + Z (A + beta I)^T = 2 B B^T
  // gives K = B^T Z^-1 with A - B K Hurwitz when (A, B) is controllable.
  const double beta = A.norm() + 1.0;
  const Eigen::MatrixXd shifted = A + beta * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Z = SolveLyapunov(shifted.transpose(), -2.0 * B * B.transpose());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(Z);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd K = B.transpose() * lu.inverse();
    if (IsStabilizing(A, B, K)) return K;
  }
  return std::nullopt;
}

}  // namespace

CareSolution SolveCare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                       const CareOptions& options) {
  ValidateWeights(A, B, Q, R);
  auto gain = InitialGain(A, B, options);
  if (!gain) throw ConvergenceError("no stabilizing initial gain found; (A, B) not stabilizable?");
  const auto r_ldlt = R.ldlt();
  Eigen::MatrixXd K = *gain;
  CareSolution sol;
  sol.residual = std::numeric_limits<double>::infinity();
  bool polished = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd Acl = A - B * K;
    if (!(SpectralAbscissa(Acl) < 0.0)) {
      if (polished) break;
      throw ConvergenceError("Newton-Kleinman iterate lost closed-loop stability");
    }
    const Eigen::MatrixXd P = SolveLyapunov(Acl, Q + K.transpose() * R * K);
    if (!P.allFinite()) {
      if (polished) break;
      throw ConvergenceError("Newton-Kleinman iteration diverged");
    }
    const double residual = CareResidual(A, B, Q, R, P);
    // one polishing step after convergence
    if (polished) {
      if (residual <= sol.residual) {
        sol.P = P;
        sol.residual = residual;
        sol.iterations = it;
      }
      break;
    }
    sol.P = P;
    sol.residual = residual;
    sol.iterations = it;
    K = r_ldlt.solve(B.transpose() * sol.P);
    polished = residual < options.tolerance;
  }
  if (!(sol.residual < 1e-8)) {
    throw ConvergenceError("CARE residual stagnated at " + std::to_string(sol.residual));
  }
  return sol;
}

LqrDesign LqrGain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R, const CareOptions& options) {
  const CareSolution sol = SolveCare(A, B, Q, R, options);
  LqrDesign d{A, B, Q, R, sol.P, R.ldlt().solve(B.transpose() * sol.P), sol.residual,
              sol.iterations};
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(d.P, Eigen::EigenvaluesOnly);
  if (ep.eigenvalues().minCoeff() < -1e-10 * (1.0 + d.P.norm())) {
    throw ConvergenceError("CARE solution is not positive semidefinite");
  }
  if (!(SpectralAbscissa(A - B * d.K) < -1e-9)) {
    throw ConvergenceError("LQR closed loop is not Hurwitz");
  }
  return d;
}

void WriteDesignReport(std::ostream& out, const LqrDesign& design) {
  const Eigen::IOFormat fmt(6, 0, "  ", "\n", "    ", "");
  const auto block = [&](const char* name, const Eigen::MatrixXd& m) {
    out << name << " (" << m.rows() << "x" << m.cols() << ")\n" << m.format(fmt) << '\n';
  };
  block("A", design.A);
  block("B", design.B);
  block("Q", design.Q);
  block("R", design.R);
  block("P", design.P);
  block("K", design.K);
  const auto flags = out.flags();
  out << "residual " << std::setprecision(6) << design.residual << ", iterations "
      << design.iterations << ", closed-loop spectral abscissa "
      << SpectralAbscissa(design.A - design.B * design.K) << '\n';
  out.flags(flags);
}

JointLqrGains PerJointLqr(double q11, double q22, double r) {
  if (!(r > 0.0)) throw InvalidArgument("control weight R must be positive");
  if (!(q11 >= 0.0) || !(q22 >= 0.0)) {
    throw InvalidArgument("state weights must be non-negative");
  }
  const double k1 = std::sqrt(q11 / r);
  return {k1, std::sqrt(q22 / r + 2.0 * k1)};
}

}  // namespace stsexo
