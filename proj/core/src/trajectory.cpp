#include "stsexo/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>

#include "csv.hpp"
#include "stsexo/error.hpp"
#include "stsexo/units.hpp"

namespace stsexo {


const char* PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kFlexionMomentum:
      return "flexion-momentum";
    case Phase::kMomentumTransfer:
      return "momentum-transfer";
    case Phase::kExtension:
      return "extension";
  }
  return "?";
}

Phase PhaseAt(double t_norm, const PhaseMarks& marks) {
  if (!(t_norm >= 0.0 && t_norm <= 1.0)) {
    throw InvalidArgument("normalized time must lie in [0, 1]");
  }
  if (t_norm <= marks.first) return Phase::kFlexionMomentum;
  if (t_norm <= marks.second) return Phase::kMomentumTransfer;
  return Phase::kExtension;
}

WaypointTable WaypointTable::Defaults() {
  WaypointTable w;
  w[Joint::kHip] = {{0.0, 88.0}, {0.33, 70.0}, {0.66, 20.0}, {1.0, 2.0}};
  w[Joint::kKnee] = {{0.0, 98.0}, {0.33, 85.0}, {0.66, 30.0}, {1.0, 3.0}};
  w[Joint::kAnkle] = {{0.0, 12.0}, {0.20, 18.0}, {0.66, 10.0}, {1.0, 2.0}};
  return w;
}

QuinticSpline::QuinticSpline(std::vector<double> t, std::vector<double> y,
                             std::vector<double> yd, std::vector<double> ydd)
    : knots_(std::move(t)) {
  const size_t n = knots_.size();
  if (n < 2 || y.size() != n || yd.size() != n || ydd.size() != n) {
    throw InvalidArgument("quintic spline needs at least two consistent knots");
  }
  for (size_t k = 0; k + 1 < n; ++k) {
    const double h = knots_[k + 1] - knots_[k];
    if (!(h > 0.0)) throw InvalidArgument("spline knots must be strictly increasing");
    const double d = y[k + 1] - y[k] - yd[k] * h - 0.5 * ydd[k] * h * h;
    const double e = yd[k + 1] - yd[k] - ydd[k] * h;
    const double f = ydd[k + 1] - ydd[k];
    const double h2 = h * h, h3 = h2 * h;
    coeffs_.push_back({y[k], yd[k], 0.5 * ydd[k], (10.0 * d - 4.0 * e * h + 0.5 * f * h2) / h3,
                       (-15.0 * d + 7.0 * e * h - f * h2) / (h3 * h),
                       (6.0 * d - 3.0 * e * h + 0.5 * f * h2) / (h3 * h2)});
  }
}

QuinticSpline QuinticSpline::ThroughWaypoints(std::vector<double> t, std::vector<double> y) {
  const size_t n = t.size();
  if (n < 2 || y.size() != n) throw InvalidArgument("need at least two waypoints");
  std::vector<double> h(n - 1), slope(n - 1);
  for (size_t k = 0; k + 1 < n; ++k) {
    h[k] = t[k + 1] - t[k];
    if (!(h[k] > 0.0)) throw InvalidArgument("waypoint times must be strictly increasing");
    slope[k] = (y[k + 1] - y[k]) / h[k];
  }
  std::vector<double> yd(n, 0.0), ydd(n, 0.0);
  for (size_t k = 1; k + 1 < n; ++k) {
    if (slope[k - 1] * slope[k] > 0.0) {
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      yd[k] = (w1 + w2) / (w1 / slope[k - 1] + w2 / slope[k]);
    }
    ydd[k] = (slope[k] - slope[k - 1]) / (0.5 * (h[k - 1] + h[k]));
  }
  return QuinticSpline(std::move(t), std::move(y), std::move(yd), std::move(ydd));
}

double QuinticSpline::Evaluate(double t, int derivative) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  size_t k = it == knots_.begin() ? 0 : static_cast<size_t>(it - knots_.begin()) - 1;
  k = std::min(k, coeffs_.size() - 1);
  const double s = t - knots_[k];
  const auto& c = coeffs_[k];
  double value = 0.0;
  for (int p = 5; p >= derivative; --p) {
    double factor = 1.0;
    for (int j = 0; j < derivative; ++j) factor *= p - j;
    value = value * s + factor * c[p];
  }
  return value;
}

double Trajectory::sample_rate_hz() const {
  const int n = num_samples();
  if (n < 2) return 0.0;
  const double dt = duration_s() / (n - 1);
  for (int i = 1; i < n; ++i) {
    if (std::abs((t(i) - t(i - 1)) - dt) > 1e-9 * std::max(1.0, dt)) return 0.0;
  }
  return 1.0 / dt;
}

double Trajectory::normalized_time(int sample) const {
  const double span = duration_s();
  return span > 0.0 ? std::clamp((t(sample) - t(0)) / span, 0.0, 1.0) : 0.0;
}

JointState Trajectory::StateAt(int sample) const {
  JointState s{q.row(sample).transpose(), Eigen::VectorXd::Zero(q.cols())};
  if (has_derivatives()) s.qd = qd.row(sample).transpose();
  return s;
}

Trajectory GenerateStsReference(const WaypointTable& waypoints, double duration_s,
                                double rate_hz) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be positive");
  if (!(rate_hz >= 100.0)) throw InvalidArgument("sample rate must be at least 100 Hz");
  const int n = static_cast<int>(std::lround(duration_s * rate_hz)) + 1;
  Trajectory traj;
  traj.t.resize(n);
  for (int i = 0; i < n; ++i) traj.t(i) = duration_s * i / (n - 1);
  traj.q.resize(n, kNumJoints);
  traj.qd.resize(n, kNumJoints);
  traj.qdd.resize(n, kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& pts = waypoints.joints[j];
    const char* name = JointName(static_cast<Joint>(j));
    if (pts.size() < 2) {
      throw InvalidArgument(std::string("joint ") + name + " needs at least two waypoints");
    }
    if (pts.front().t_norm != 0.0 || pts.back().t_norm != 1.0) {
      throw InvalidArgument(std::string("joint ") + name + " waypoints must span 0 to 1");
    }
    std::vector<double> t, y;
    for (size_t k = 0; k < pts.size(); ++k) {
      if (std::abs(pts[k].angle_deg) > 180.0) {
        throw InvalidArgument(std::string("joint ") + name + " waypoint outside [-180, 180] deg");
      }
      if (k > 0 && pts[k].t_norm == pts[k - 1].t_norm) {
        throw InvalidArgument(std::string("joint ") + name + " has duplicate waypoint times");
      }
      if (k > 0 && pts[k].t_norm < pts[k - 1].t_norm) {
        throw InvalidArgument(std::string("joint ") + name + " waypoints are not monotone in time");
      }
      t.push_back(pts[k].t_norm * duration_s);
      y.push_back(pts[k].angle_deg * kDegToRad);
    }
    const auto spline = QuinticSpline::ThroughWaypoints(std::move(t), std::move(y));
    for (int i = 0; i < n; ++i) {
      traj.q(i, j) = spline.Evaluate(traj.t(i), 0);
      traj.qd(i, j) = spline.Evaluate(traj.t(i), 1);
      traj.qdd(i, j) = spline.Evaluate(traj.t(i), 2);
    }
  }
  traj.derivatives = DerivativeSource::kAnalytic;
  return traj;
}

using detail::SplitCells;

Trajectory LoadTrajectoryCsv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file", 0);
  const std::vector<std::string> header = {"time_s", "hip_deg", "knee_deg", "ankle_deg"};
  if (SplitCells(line) != header) {
    throw ParseError("trajectory header must be time_s,hip_deg,knee_deg,ankle_deg", line_no);
  }
  std::vector<double> time;
  std::vector<std::array<double, kNumJoints>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = SplitCells(line);
    if (cells.size() != 4) throw ParseError("expected 4 columns", line_no);
    double v[4];
    for (int c = 0; c < 4; ++c) v[c] = detail::ParseDouble(cells[c], line_no);
    if (!time.empty() && !(v[0] > time.back())) {
      throw ParseError("time_s must be strictly increasing", line_no);
    }
    time.push_back(v[0]);
    std::array<double, kNumJoints> q{};
    q[Index(Joint::kHip)] = v[1] * kDegToRad;
    q[Index(Joint::kKnee)] = v[2] * kDegToRad;
    q[Index(Joint::kAnkle)] = v[3] * kDegToRad;
    rows.push_back(q);
  }
  if (time.size() < 4) throw ParseError("trajectory needs at least 4 samples", 0);
  Trajectory traj;
  traj.t = Eigen::Map<const Eigen::VectorXd>(time.data(), static_cast<int>(time.size()));
  traj.q.resize(static_cast<int>(rows.size()), kNumJoints);
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < kNumJoints; ++j) traj.q(static_cast<int>(i), j) = rows[i][j];
  }
  return traj;
}

Trajectory LoadTrajectoryCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trajectory file: " + path);
  return LoadTrajectoryCsv(in);
}

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  if (traj.num_joints() != kNumJoints) {
    throw InvalidArgument("trajectory export needs three joints");
  }
  out << "time_s,hip_deg,knee_deg,ankle_deg\n" << std::setprecision(17);
  for (int i = 0; i < traj.num_samples(); ++i) {
    out << traj.t(i);
    for (Joint j : kReportOrder) out << ',' << traj.q(i, Index(j)) / kDegToRad;
    out << '\n';
  }
}

namespace {

// Direct-form II transposed second-order section.
struct Biquad {
  double b0, b1, b2, a1, a2;

  void Run(std::vector<double>& x) const {
    // Steady state for a constant input equal to the first sample.
    const double x0 = x.front();
    const double y0 = x0 * (b0 + b1 + b2) / (1.0 + a1 + a2);
    double z2 = b2 * x0 - a2 * y0;
    double z1 = b1 * x0 - a1 * y0 + z2;
    for (double& v : x) {
      const double in = v;
      const double out = b0 * in + z1;
      z1 = b1 * in - a1 * out + z2;
      z2 = b2 * in - a2 * out;
      v = out;
    }
  }
};

std::vector<Biquad> ButterworthSections(int order, double cutoff_hz, double rate_hz) {
  const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double theta = std::numbers::pi * (2 * i + 1) / (2.0 * order);
    const double inv_q = 2.0 * std::cos(theta);
    const double norm = 1.0 + k * inv_q + k * k;
    const double b0 = k * k / norm;
    sections.push_back({b0, 2.0 * b0, b0, 2.0 * (k * k - 1.0) / norm,
                        (1.0 - k * inv_q + k * k) / norm});
  }
  if (order % 2 == 1) {
    const double b0 = k / (1.0 + k);
    sections.push_back({b0, b0, 0.0, (k - 1.0) / (k + 1.0), 0.0});
  }
  return sections;
}

}  // namespace

std::vector<double> ZeroLagFilter(std::span<const double> signal, double cutoff_hz, int order,
                                  double rate_hz, FilterOrderConvention convention) {
  if (!(rate_hz > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * rate_hz)) {
    throw InvalidArgument("cutoff must lie strictly between 0 and the Nyquist frequency");
  }
  int per_pass = order;
  if (convention == FilterOrderConvention::kEffective) {
    if (order < 2 || order % 2 != 0) {
      throw InvalidArgument("effective zero-lag order must be even and at least 2");
    }
    per_pass = order / 2;
  } else if (order < 1) {
    throw InvalidArgument("filter order must be positive");
  }
  const auto sections = ButterworthSections(per_pass, cutoff_hz, rate_hz);
  const int pad = 3 * (per_pass + 1);
  const int n = static_cast<int>(signal.size());
  if (n <= pad) throw InvalidArgument("signal shorter than the filter padding");

  std::vector<double> x;
  x.reserve(n + 2 * pad);
  for (int i = pad; i >= 1; --i) x.push_back(2.0 * signal[0] - signal[i]);
  x.insert(x.end(), signal.begin(), signal.end());
  for (int i = 1; i <= pad; ++i) x.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  for (const auto& s : sections) s.Run(x);
  std::reverse(x.begin(), x.end());
  for (const auto& s : sections) s.Run(x);
  std::reverse(x.begin(), x.end());
  return {x.begin() + pad, x.begin() + pad + n};
}

Trajectory FilterTrajectory(const Trajectory& traj, double cutoff_hz, int order,
                            FilterOrderConvention convention) {
  const double rate = traj.sample_rate_hz();
  if (rate <= 0.0) throw InvalidArgument("filtering needs a uniformly sampled trajectory");
  Trajectory out;
  out.t = traj.t;
  out.phase_marks = traj.phase_marks;
  out.q.resize(traj.q.rows(), traj.q.cols());
  for (int j = 0; j < traj.num_joints(); ++j) {
    const Eigen::VectorXd col = traj.q.col(j);
    const auto filtered = ZeroLagFilter({col.data(), static_cast<size_t>(col.size())}, cutoff_hz,
                                        order, rate, convention);
    out.q.col(j) = Eigen::Map<const Eigen::VectorXd>(filtered.data(), col.size());
  }
  return out;
}

CubicSpline::CubicSpline(std::span<const double> t, std::span<const double> y)
    : t_(t.begin(), t.end()), y_(y.begin(), y.end()), m_(t.size(), 0.0) {
  const int n = static_cast<int>(t_.size());
  if (n < 2 || y_.size() != t_.size()) throw InvalidArgument("spline needs at least two points");
  for (int i = 1; i < n; ++i) {
    if (!(t_[i] > t_[i - 1])) throw InvalidArgument("spline abscissae must increase strictly");
  }
  if (n == 2) return;
  if (n == 3) {
    const double s0 = (y_[1] - y_[0]) / (t_[1] - t_[0]);
    const double s1 = (y_[2] - y_[1]) / (t_[2] - t_[1]);
    std::fill(m_.begin(), m_.end(), 2.0 * (s1 - s0) / (t_[2] - t_[0]));
    return;
  }
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  auto h = [&](int i) { return t_[i + 1] - t_[i]; };
  // Not-a-knot: continuous third derivative across the second and the
  // second-to-last knots.
  entries.emplace_back(0, 0, h(1));
  entries.emplace_back(0, 1, -(h(0) + h(1)));
  entries.emplace_back(0, 2, h(0));
  for (int i = 1; i < n - 1; ++i) {
    entries.emplace_back(i, i - 1, h(i - 1));
    entries.emplace_back(i, i, 2.0 * (h(i - 1) + h(i)));
    entries.emplace_back(i, i + 1, h(i));
    rhs(i) = 6.0 * ((y_[i + 1] - y_[i]) / h(i) - (y_[i] - y_[i - 1]) / h(i - 1));
  }
  entries.emplace_back(n - 1, n - 3, h(n - 2));
  entries.emplace_back(n - 1, n - 2, -(h(n - 3) + h(n - 2)));
  entries.emplace_back(n - 1, n - 1, h(n - 3));
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
  if (lu.info() != Eigen::Success) throw ConvergenceError("spline system is singular");
  const Eigen::VectorXd m = lu.solve(rhs);
  for (int i = 0; i < n; ++i) m_[i] = m(i);
}

double CubicSpline::Evaluate(double t, int derivative) const {
  const auto it = std::upper_bound(t_.begin(), t_.end(), t);
  int i = it == t_.begin() ? 0 : static_cast<int>(it - t_.begin()) - 1;
  i = std::min(i, static_cast<int>(t_.size()) - 2);
  const double h = t_[i + 1] - t_[i];
  const double a = t_[i + 1] - t;
  const double b = t - t_[i];
  const double ca = y_[i] / h - m_[i] * h / 6.0;
  const double cb = y_[i + 1] / h - m_[i + 1] * h / 6.0;
  switch (derivative) {
    case 0:
      return m_[i] * a * a * a / (6.0 * h) + m_[i + 1] * b * b * b / (6.0 * h) + ca * a + cb * b;
    case 1:
      return -m_[i] * a * a / (2.0 * h) + m_[i + 1] * b * b / (2.0 * h) - ca + cb;
    case 2:
      return (m_[i] * a + m_[i + 1] * b) / h;
    default:
      return (m_[i + 1] - m_[i]) / h;
  }
}

Trajectory Resample(const Trajectory& traj, double new_rate_hz) {
  if (!(new_rate_hz > 0.0)) throw InvalidArgument("resample rate must be positive");
  const int m = traj.num_samples();
  if (m < 2) throw InvalidArgument("cannot resample fewer than two samples");
  const double t0 = traj.t(0);
  const double span = traj.duration_s();
  const int n = std::max(1, static_cast<int>(std::lround(span * new_rate_hz))) + 1;
  Trajectory out;
  out.phase_marks = traj.phase_marks;
  out.t.resize(n);
  for (int i = 0; i < n; ++i) out.t(i) = t0 + span * i / (n - 1);
  out.t(n - 1) = traj.t(m - 1);

  const std::span<const double> t_src(traj.t.data(), m);
  auto interpolate = [&](const Eigen::MatrixXd& src) {
    Eigen::MatrixXd dst(n, src.cols());
    for (int j = 0; j < src.cols(); ++j) {
      const Eigen::VectorXd col = src.col(j);
      const CubicSpline spline(t_src, {col.data(), static_cast<size_t>(m)});
      for (int i = 0; i < n; ++i) dst(i, j) = spline.Evaluate(out.t(i));
      dst(0, j) = col(0);
      dst(n - 1, j) = col(m - 1);
    }
    return dst;
  };
  out.q = interpolate(traj.q);
  if (traj.has_derivatives()) {
    out.qd = interpolate(traj.qd);
    out.qdd = interpolate(traj.qdd);
    out.derivatives = traj.derivatives;
  }
  return out;
}

namespace {

Eigen::MatrixXd FiniteDifference(const Eigen::VectorXd& t, const Eigen::MatrixXd& f) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd d(n, f.cols());
  for (int i = 1; i < n - 1; ++i) {
    const double h1 = t(i) - t(i - 1), h2 = t(i + 1) - t(i);
    d.row(i) = -h2 / (h1 * (h1 + h2)) * f.row(i - 1) + (h2 - h1) / (h1 * h2) * f.row(i) +
               h1 / (h2 * (h1 + h2)) * f.row(i + 1);
  }
  {
    const double h1 = t(1) - t(0), h2 = t(2) - t(1);
    d.row(0) = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f.row(0) + (h1 + h2) / (h1 * h2) * f.row(1) -
               h1 / (h2 * (h1 + h2)) * f.row(2);
  }
  {
    const double a = t(n - 1) - t(n - 2), b = t(n - 2) - t(n - 3);
    d.row(n - 1) = (2.0 * a + b) / (a * (a + b)) * f.row(n - 1) - (a + b) / (a * b) * f.row(n - 2) +
                   a / (b * (a + b)) * f.row(n - 3);
  }
  return d;
}

}  // namespace

Derivatives Differentiate(const Trajectory& traj, bool force_finite_difference) {
  if (traj.derivatives == DerivativeSource::kAnalytic && !force_finite_difference) {
    return {traj.qd, traj.qdd, DerivativeSource::kAnalytic};
  }
  if (traj.num_samples() < 5) throw InvalidArgument("differentiation needs at least 5 samples");
  Derivatives out;
  out.qd = FiniteDifference(traj.t, traj.q);
  out.qdd = FiniteDifference(traj.t, out.qd);
  out.source = DerivativeSource::kFiniteDifference;
  return out;
}

Trajectory WithDerivatives(Trajectory traj) {
  auto d = Differentiate(traj);
  traj.qd = std::move(d.qd);
  traj.qdd = std::move(d.qdd);
  traj.derivatives = d.source;
  return traj;
}

}  // namespace stsexo
