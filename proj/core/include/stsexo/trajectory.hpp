#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stsexo/dynamics.hpp"

namespace stsexo {

/// Biomechanical phases of the sit-to-stand motion.
enum class Phase { kFlexionMomentum = 0, kMomentumTransfer = 1, kExtension = 2 };
const char* PhaseName(Phase phase);

/// Normalized phase boundaries; a boundary belongs to the earlier phase.
struct PhaseMarks {
  double first = 0.33;
  double second = 0.66;
};

/// Throws InvalidArgument unless 0 <= t_norm <= 1.
Phase PhaseAt(double t_norm, const PhaseMarks& marks = {});

struct Waypoint {
  double t_norm = 0.0;
  double angle_deg = 0.0;
};

/// Per-joint waypoints (indexed by Joint). The first waypoint must sit at
/// t_norm = 0 and the last at t_norm = 1.
struct WaypointTable {
  std::array<std::vector<Waypoint>, kNumJoints> joints;

  const std::vector<Waypoint>& operator[](Joint j) const { return joints[Index(j)]; }
  std::vector<Waypoint>& operator[](Joint j) { return joints[Index(j)]; }

  /// Seated posture hip 88, knee 98, ankle 12 deg; ankle dorsiflexion peak of
  /// 18 deg at 20 %; near-upright finish.
  static WaypointTable Defaults();
};

/// C2 piecewise quintic through scalar knots with prescribed velocity and
/// acceleration at every knot.
class QuinticSpline {
 public:
  QuinticSpline(std::vector<double> t, std::vector<double> y, std::vector<double> yd,
                std::vector<double> ydd);

  /// Shape-preserving knot derivatives: zero velocity and acceleration at the
  /// ends, weighted harmonic-mean slopes inside (zero at local extrema) and
  /// secant-difference accelerations.
  static QuinticSpline ThroughWaypoints(std::vector<double> t, std::vector<double> y);

  double Evaluate(double t, int derivative = 0) const;

 private:
  std::vector<double> knots_;
  std::vector<std::array<double, 6>> coeffs_;
};

enum class DerivativeSource { kNone, kAnalytic, kFiniteDifference };

/// Sampled reference trajectory. Rows are samples, columns are joints in
/// Joint order; angles in radians.
struct Trajectory {
  Eigen::VectorXd t;
  Eigen::MatrixXd q;
  Eigen::MatrixXd qd;
  Eigen::MatrixXd qdd;
  PhaseMarks phase_marks;
  DerivativeSource derivatives = DerivativeSource::kNone;

  int num_samples() const { return static_cast<int>(t.size()); }
  int num_joints() const { return static_cast<int>(q.cols()); }
  double duration_s() const { return t.size() ? t(t.size() - 1) - t(0) : 0.0; }
  /// Sample rate of a uniform grid, 0 when the time base is not uniform.
  double sample_rate_hz() const;
  bool has_derivatives() const { return derivatives != DerivativeSource::kNone; }
  double normalized_time(int sample) const;
  JointState StateAt(int sample) const;
};

/// Piecewise-quintic reference on a uniform grid of round(duration*rate)+1
/// samples with analytic velocity and acceleration.
Trajectory GenerateStsReference(const WaypointTable& waypoints, double duration_s,
                                double rate_hz);

/// Reads `time_s,hip_deg,knee_deg,ankle_deg`. Derivatives are left empty.
Trajectory LoadTrajectoryCsv(std::istream& in);
Trajectory LoadTrajectoryCsv(const std::string& path);
void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj);

enum class FilterOrderConvention {
  kEffective,  // order is the total of both passes
  kPerPass,    // order is applied in each direction
};

/// Forward-backward Butterworth low-pass with odd-reflection padding of three
/// filter lengths and steady-state initial conditions.
std::vector<double> ZeroLagFilter(std::span<const double> signal, double cutoff_hz, int order,
                                  double rate_hz,
                                  FilterOrderConvention convention = FilterOrderConvention::kEffective);

/// Filters every joint angle series; existing derivatives are dropped.
Trajectory FilterTrajectory(const Trajectory& traj, double cutoff_hz, int order,
                            FilterOrderConvention convention = FilterOrderConvention::kEffective);

/// Not-a-knot cubic spline through (t, y); exact on cubic polynomials.
class CubicSpline {
 public:
  CubicSpline(std::span<const double> t, std::span<const double> y);
  double Evaluate(double t, int derivative = 0) const;

 private:
  std::vector<double> t_, y_, m_;  // m_: second derivatives at knots
};

/// Interpolates every series onto a uniform grid at new_rate_hz spanning the
/// same interval; the end samples are copied exactly.
Trajectory Resample(const Trajectory& traj, double new_rate_hz);

struct Derivatives {
  Eigen::MatrixXd qd;
  Eigen::MatrixXd qdd;
  DerivativeSource source = DerivativeSource::kNone;
};

/// Returns the analytic derivatives when present (unless forced), otherwise
/// second-order finite differences (central inside, one-sided at the ends).
Derivatives Differentiate(const Trajectory& traj, bool force_finite_difference = false);

/// Trajectory with derivatives filled in by Differentiate.
Trajectory WithDerivatives(Trajectory traj);

}  // namespace stsexo
