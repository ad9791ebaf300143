#include "stsexo/experiment.hpp"

#include <cmath>

#include "stsexo/metrics.hpp"
#include "stsexo/units.hpp"

namespace stsexo {

namespace {

Eigen::VectorXd ToJointOrder(const JointTriple& hip_knee_ankle) {
  Eigen::VectorXd v(kNumJoints);
  v(Index(Joint::kHip)) = hip_knee_ankle[0];
  v(Index(Joint::kKnee)) = hip_knee_ankle[1];
  v(Index(Joint::kAnkle)) = hip_knee_ankle[2];
  return v;
}

Payload MakePayload(const PayloadConfig& p, double mass_kg) {
  return {mass_kg, Eigen::Vector2d(0.0, p.com_m), mass_kg * p.gyration_m * p.gyration_m};
}

}  // namespace

ChainBuildOptions ChainOptionsFromConfig(const RunConfig& cfg) {
  const auto& m = cfg.model;
  ChainBuildOptions o;
  o.segments = {{"shank", m.shank_links, m.joint_signs[2]},
                {"thigh", m.thigh_links, m.joint_signs[1]},
                {"trunk", m.trunk_links, m.joint_signs[0]}};
  o.excluded_links = m.excluded_links;
  o.gravity_mps2 = m.gravity_mps2;
  const Eigen::VectorXd limit = ToJointOrder(m.torque_limit_nm);
  o.torque_limit_nm.assign(limit.data(), limit.data() + limit.size());
  const double body = m.body_mass_kg;
  o.payload["shank"] = MakePayload(m.shank, m.shank.mass_fraction * body);
  o.payload["thigh"] = MakePayload(m.thigh, m.thigh.mass_fraction * body);
  o.payload["trunk"] = MakePayload(m.trunk, m.trunk.mass_fraction * body * m.trunk_share);
  return o;
}

ChainModel BuildModel(const RunConfig& cfg) {
  const auto table = cfg.model.link_table.empty()
                         ? ReferenceLinkTable()
                         : LoadLinkTableCsv(cfg.ResolvePath(cfg.model.link_table));
  return BuildChain(table, ChainOptionsFromConfig(cfg));
}

Trajectory BuildReference(const RunConfig& cfg) {
  const auto& t = cfg.trajectory;
  Trajectory traj = t.source == "csv"
                        ? LoadTrajectoryCsv(cfg.ResolvePath(t.csv_path))
                        : GenerateStsReference(WaypointsFromConfig(t), t.duration_s, t.rate_hz);
  traj.phase_marks = {t.phase_marks[0], t.phase_marks[1]};
  if (t.source == "csv" && std::abs(traj.sample_rate_hz() - t.rate_hz) > 1e-9 * t.rate_hz) {
    traj = Resample(traj, t.rate_hz);
  }
  if (t.filter_enabled) {
    traj = FilterTrajectory(traj, t.filter_cutoff_hz, t.filter_order,
                            t.filter_convention == "per_pass" ? FilterOrderConvention::kPerPass
                                                              : FilterOrderConvention::kEffective);
  }
  if (!traj.has_derivatives()) traj = WithDerivatives(std::move(traj));
  return traj;
}

SimConfig BuildSimConfig(const RunConfig& cfg) {
  const auto& s = cfg.sim;
  SimConfig out;
  out.dt_s = s.dt_s;
  out.duration_s = s.duration_s;
  const Eigen::VectorXd offset = ToJointOrder(s.initial_offset_deg) * kDegToRad;
  if (!offset.isZero(0.0)) out.initial_offset_rad = offset;
  if (s.disturbance_joint != "none") {
    const Joint j = s.disturbance_joint == "hip"    ? Joint::kHip
                    : s.disturbance_joint == "knee" ? Joint::kKnee
                                                    : Joint::kAnkle;
    out.disturbances.push_back(
        {j, s.disturbance_start_s, s.disturbance_width_s, s.disturbance_magnitude_nm});
  }
  const Eigen::VectorXd pert = ToJointOrder(s.mass_perturbation);
  if (!pert.isZero(0.0)) out.mass_perturbation = pert;
  return out;
}

JointState OperatingPoint(const RunConfig& cfg, const Trajectory& traj) {
  const int k = static_cast<int>(std::lround(cfg.gains.operating_point * (traj.num_samples() - 1)));
  JointState op = traj.StateAt(k);
  op.qd.setZero();
  return op;
}

Eigen::VectorXd GainScale(const RunConfig& cfg, const ChainModel& model, const JointState& op) {
  if (cfg.gains.scaling == "none") return Eigen::VectorXd::Ones(model.num_joints());
  return ReflectedInertia(model, op.q);
}

PidGains PidGainsFromConfig(const PidConfig& pid, const Eigen::VectorXd& scale) {
  PidGains g;
  g.kp = ToJointOrder(pid.kp);
  g.ki = ToJointOrder(pid.ki);
  g.kd = ToJointOrder(pid.kd);
  g.d_filter_tau_s = pid.d_filter_tau_s;
  g.windup_limit_nm = pid.windup_limit_nm;
  return ScalePidGains(g, scale);
}

LqrController LqrFromConfig(const RunConfig& cfg, std::shared_ptr<const ChainModel> model,
                            const JointState& op, const Eigen::VectorXd& scale) {
  const auto& l = cfg.lqr;
  const LqrWeights w{ToJointOrder(l.q_position), ToJointOrder(l.q_velocity), ToJointOrder(l.r)};
  const Feedforward ff = l.feedforward == "none"      ? Feedforward::kNone
                         : l.feedforward == "gravity" ? Feedforward::kGravity
                                                      : Feedforward::kInverseDynamics;
  const LqrStructure st = l.structure == "coupled" ? LqrStructure::kCoupled : LqrStructure::kPerJoint;
  return DesignLqr(std::move(model), op, w, st, scale, ff);
}

std::map<std::string, ControllerSpec> Experiment::Controllers() const {
  return {{"pid", pid}, {"lqr", lqr}, {"hybrid", hybrid}};
}

ControllerSpec Experiment::Controller(const std::string& name) const {
  if (name == "pid") return pid;
  if (name == "lqr") return lqr;
  if (name == "hybrid") return hybrid;
  throw InvalidArgument("unknown controller '" + name + "' (expected pid, lqr or hybrid)");
}

std::string Experiment::ConfigHash() const { return HashHex(Fnv1a64(RunConfigText(config))); }

Experiment BuildExperiment(const RunConfig& cfg) {
  if (auto violations = ValidateRunConfig(cfg); !violations.empty()) {
    throw ConfigError(std::move(violations));
  }
  Experiment e;
  e.config = cfg;
  e.model = std::make_shared<const ChainModel>(BuildModel(cfg));
  e.reference = BuildReference(cfg);
  e.sim = BuildSimConfig(cfg);
  e.operating_point = OperatingPoint(cfg, e.reference);
  e.gain_scale = GainScale(cfg, *e.model, e.operating_point);
  e.pid = PidSpec{PidGainsFromConfig(cfg.pid, e.gain_scale)};
  e.lqr = LqrSpec{LqrFromConfig(cfg, e.model, e.operating_point, e.gain_scale)};
  e.hybrid = HybridSpec{cfg.hybrid.alpha, PidGainsFromConfig(cfg.hybrid.pid, e.gain_scale), e.lqr.lqr};
  return e;
}

}  // namespace stsexo
