#include "stsexo/sim.hpp"

#include <cmath>
#include <future>
#include <iomanip>
#include <numbers>

#include "csv.hpp"
#include "stsexo/error.hpp"
#include "stsexo/units.hpp"

namespace stsexo {

void SimConfig::Validate(int num_joints) const {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw InvalidArgument("dt must be positive");
  if (!(duration_s >= dt_s) || !std::isfinite(duration_s)) {
    throw InvalidArgument("duration must be at least one step");
  }
  if (initial_state && (initial_state->q.size() != num_joints ||
                        initial_state->qd.size() != num_joints || !initial_state->IsFinite())) {
    throw InvalidArgument("initial state has wrong dimension or non-finite entries");
  }
  if (initial_offset_rad.size() != 0 &&
      (initial_offset_rad.size() != num_joints || !initial_offset_rad.allFinite())) {
    throw InvalidArgument("initial offset must have one finite entry per joint");
  }
  if (mass_perturbation.size() != 0) {
    if (mass_perturbation.size() != num_joints) {
      throw InvalidArgument("mass perturbation must have one entry per segment");
    }
    if ((mass_perturbation.array().abs() > 0.5).any() || !mass_perturbation.allFinite()) {
      throw InvalidArgument("mass perturbation fractions must lie in [-0.5, 0.5]");
    }
  }
  for (const auto& p : disturbances) {
    if (Index(p.joint) >= num_joints || !(p.width_s >= 0.0) || !std::isfinite(p.start_s) ||
        !std::isfinite(p.magnitude_nm)) {
      throw InvalidArgument("invalid torque pulse");
    }
  }
}

ChainModel PerturbModel(const ChainModel& model, const Eigen::VectorXd& fraction) {
  if (fraction.size() != model.num_joints()) {
    throw InvalidArgument("perturbation needs one fraction per segment");
  }
  if (!fraction.allFinite() || (fraction.array().abs() > 0.5).any()) {
    throw InvalidArgument("perturbation fractions must lie in [-0.5, 0.5]");
  }
  return model.WithMassScaling(fraction);
}

namespace {

struct Reference {
  Trajectory traj;
  int last = 0;

  JointState At(int k) const {
    if (k <= last) return traj.StateAt(k);
    JointState s = traj.StateAt(last);
    s.qd.setZero();
    return s;
  }
  Eigen::VectorXd AccelAt(int k) const {
    if (k <= last) return traj.qdd.row(k).transpose();
    return Eigen::VectorXd::Zero(traj.num_joints());
  }
};

Reference PrepareReference(const Trajectory& traj, double dt) {
  if (traj.num_samples() < 2) throw InvalidArgument("reference trajectory is too short");
  const double rate = 1.0 / dt;
  const double have = traj.sample_rate_hz();
  Trajectory ref = std::abs(have - rate) <= 1e-9 * rate ? traj : Resample(traj, rate);
  if (!ref.has_derivatives()) ref = WithDerivatives(std::move(ref));
  Reference out{std::move(ref), 0};
  out.last = out.traj.num_samples() - 1;
  return out;
}

Eigen::VectorXd Disturbance(const std::vector<TorquePulse>& pulses, double t, int n) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (const auto& p : pulses) {
    if (t >= p.start_s && t < p.start_s + p.width_s) d(Index(p.joint)) += p.magnitude_nm;
  }
  return d;
}

}  // namespace

SimLog Simulate(const ChainModel& model, const ControllerSpec& controller, const Trajectory& traj,
                const SimConfig& cfg) {
  const int n = model.num_joints();
  cfg.Validate(n);
  ValidateSpec(controller, n);
  if (traj.num_joints() != n) throw InvalidArgument("trajectory joints do not match the model");
  const ChainModel plant =
      cfg.mass_perturbation.size() ? PerturbModel(model, cfg.mass_perturbation) : model;
  const Reference ref = PrepareReference(traj, cfg.dt_s);
  const double dt = cfg.dt_s;
  const int steps = static_cast<int>(std::llround(cfg.duration_s / dt));
  const double t0 = ref.traj.t(0);
  const Eigen::VectorXd& limit = plant.torque_limit();

  JointState x = cfg.initial_state ? *cfg.initial_state : ref.At(0);
  if (!cfg.initial_state) x.qd.setZero();
  if (cfg.initial_offset_rad.size()) x.q += cfg.initial_offset_rad;

  SimLog log;
  log.controller = ControllerKind(controller);
  log.phase_marks = ref.traj.phase_marks;
  const int rows = steps + 1;
  log.t.resize(rows);
  log.q.resize(rows, n);
  log.qd.resize(rows, n);
  log.q_ref.resize(rows, n);
  log.qd_ref.resize(rows, n);
  log.tau.resize(rows, n);
  log.saturated.assign(rows, false);
  log.energy.resize(rows);

  Controller ctrl(controller);
  auto deriv = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                   const Eigen::VectorXd& u) { return ForwardDynamics(plant, q, qd, u); };
  for (int k = 0; k <= steps; ++k) {
    const double t = t0 + k * dt;
    const JointState r = ref.At(k);
    const Eigen::VectorXd raw = ctrl.Compute(x, r, ref.AccelAt(k), dt, limit);
    const Eigen::VectorXd tau = Saturate(raw, limit);
    log.t(k) = t;
    log.q.row(k) = x.q.transpose();
    log.qd.row(k) = x.qd.transpose();
    log.q_ref.row(k) = r.q.transpose();
    log.qd_ref.row(k) = r.qd.transpose();
    log.tau.row(k) = tau.transpose();
    log.saturated[k] = ((raw - tau).array() != 0.0).any();
    log.energy(k) = TotalEnergy(plant, x.q, x.qd);
    if (k == steps) break;

    const Eigen::VectorXd u = tau + Disturbance(cfg.disturbances, t, n);
    const Eigen::VectorXd k1v = deriv(x.q, x.qd, u);
    const Eigen::VectorXd k1q = x.qd;
    const Eigen::VectorXd k2q = x.qd + 0.5 * dt * k1v;
    const Eigen::VectorXd k2v = deriv(x.q + 0.5 * dt * k1q, k2q, u);
    const Eigen::VectorXd k3q = x.qd + 0.5 * dt * k2v;
    const Eigen::VectorXd k3v = deriv(x.q + 0.5 * dt * k2q, k3q, u);
    const Eigen::VectorXd k4q = x.qd + dt * k3v;
    const Eigen::VectorXd k4v = deriv(x.q + dt * k3q, k4q, u);
    x.q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    x.qd += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!x.IsFinite() || x.q.cwiseAbs().maxCoeff() > 2.0 * std::numbers::pi) {
      throw DivergenceError(log.controller + " simulation diverged at t = " +
                                std::to_string(t + dt) + " s",
                            t + dt);
    }
  }
  return log;
}

ComparisonResult RunComparison(const ChainModel& model,
                               const std::map<std::string, ControllerSpec>& controllers,
                               const Trajectory& traj, const SimConfig& cfg) {
  std::map<std::string, std::future<SimLog>> pending;
  for (const auto& [name, spec] : controllers) {
    pending.emplace(name, std::async(std::launch::async, [&model, &spec, &traj, &cfg, name] {
                      SimLog log = Simulate(model, spec, traj, cfg);
                      log.controller = name;
                      return log;
                    }));
  }
  ComparisonResult result;
  for (auto& [name, fut] : pending) {
    try {
      result.logs.emplace(name, fut.get());
    } catch (const std::exception& e) {
      result.errors.emplace(name, e.what());
    }
  }
  return result;
}

namespace {

const std::vector<std::string>& LogHeader() {
  static const std::vector<std::string> header = {
      "t_s",        "hip_ref_deg", "knee_ref_deg", "ankle_ref_deg", "hip_deg",  "knee_deg",
      "ankle_deg",  "tau_hip_nm",  "tau_knee_nm",  "tau_ankle_nm",  "energy_j"};
  return header;
}

}  // namespace

void WriteSimLogCsv(std::ostream& out, const SimLog& log) {
  if (log.q.cols() != kNumJoints) throw InvalidArgument("log CSV needs a three-joint log");
  const auto& header = LogHeader();
  for (size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n' << std::setprecision(17);
  for (int k = 0; k < log.num_samples(); ++k) {
    out << log.t(k);
    for (Joint j : kReportOrder) out << ',' << log.q_ref(k, Index(j)) * kRadToDeg;
    for (Joint j : kReportOrder) out << ',' << log.q(k, Index(j)) * kRadToDeg;
    for (Joint j : kReportOrder) out << ',' << log.tau(k, Index(j));
    out << ',' << log.energy(k) << '\n';
  }
}

SimLog LoadSimLogCsv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || detail::SplitCells(line) != LogHeader()) {
    throw ParseError("unexpected simulation log header", 1);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    const auto cells = detail::SplitCells(line);
    if (cells.size() != LogHeader().size()) throw ParseError("wrong column count", line_no);
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(detail::ParseDouble(c, line_no));
    rows.push_back(std::move(v));
  }
  const int m = static_cast<int>(rows.size());
  SimLog log;
  log.t.resize(m);
  log.q_ref.resize(m, kNumJoints);
  log.q.resize(m, kNumJoints);
  log.tau.resize(m, kNumJoints);
  log.energy.resize(m);
  log.saturated.assign(m, false);
  for (int k = 0; k < m; ++k) {
    const auto& r = rows[k];
    log.t(k) = r[0];
    for (int c = 0; c < kNumJoints; ++c) {
      const int j = Index(kReportOrder[c]);
      log.q_ref(k, j) = r[1 + c] * kDegToRad;
      log.q(k, j) = r[4 + c] * kDegToRad;
      log.tau(k, j) = r[7 + c];
    }
    log.energy(k) = r[10];
  }
  return log;
}

}  // namespace stsexo
