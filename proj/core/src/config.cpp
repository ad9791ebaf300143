#include "stsexo/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stsexo/tuning.hpp"
#include "stsexo/trajectory.hpp"

namespace stsexo {

namespace {

namespace pt = boost::property_tree;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool ToDouble(const std::string& s, double& v) {
  const std::string t = Trim(s);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  return !t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size() && std::isfinite(v);
}

std::string FromDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Errors = std::vector<std::string>;

struct Field {
  std::string section;
  std::string key;
  std::function<bool(const std::string&)> parse;  // false on malformed value
  std::function<std::string()> emit;
};

Field Number(const std::string& sec, const std::string& key, double& ref) {
  return {sec, key, [&ref](const std::string& s) { return ToDouble(s, ref); },
          [&ref] { return FromDouble(ref); }};
}

Field Integer(const std::string& sec, const std::string& key, int& ref) {
  return {sec, key,
          [&ref](const std::string& s) {
            const std::string t = Trim(s);
            const auto r = std::from_chars(t.data(), t.data() + t.size(), ref);
            return !t.empty() && r.ec == std::errc() && r.ptr == t.data() + t.size();
          },
          [&ref] { return std::to_string(ref); }};
}

Field Flag(const std::string& sec, const std::string& key, bool& ref) {
  return {sec, key,
          [&ref](const std::string& s) {
            const std::string t = Trim(s);
            if (t == "true" || t == "yes" || t == "1") return ref = true, true;
            if (t == "false" || t == "no" || t == "0") return ref = false, true;
            return false;
          },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field Text(const std::string& sec, const std::string& key, std::string& ref) {
  return {sec, key, [&ref](const std::string& s) { return ref = Trim(s), true; },
          [&ref] { return ref; }};
}

Field Names(const std::string& sec, const std::string& key, std::vector<std::string>& ref) {
  return {sec, key, [&ref](const std::string& s) { return ref = SplitList(s), true; },
          [&ref] {
            std::string out;
            for (size_t i = 0; i < ref.size(); ++i) out += (i ? ", " : "") + ref[i];
            return out;
          }};
}

template <size_t N>
Field Numbers(const std::string& sec, const std::string& key, std::array<double, N>& ref) {
  return {sec, key,
          [&ref](const std::string& s) {
            const auto parts = SplitList(s);
            if (parts.size() != N) return false;
            for (size_t i = 0; i < N; ++i) {
              if (!ToDouble(parts[i], ref[i])) return false;
            }
            return true;
          },
          [&ref] {
            std::string out;
            for (size_t i = 0; i < N; ++i) out += (i ? ", " : "") + FromDouble(ref[i]);
            return out;
          }};
}

Field Signs(const std::string& sec, const std::string& key, std::array<int, 3>& ref) {
  return {sec, key,
          [&ref](const std::string& s) {
            const auto parts = SplitList(s);
            if (parts.size() != 3) return false;
            for (size_t i = 0; i < 3; ++i) {
              double v = 0.0;
              if (!ToDouble(parts[i], v) || (v != 1.0 && v != -1.0)) return false;
              ref[i] = static_cast<int>(v);
            }
            return true;
          },
          [&ref] {
            return std::to_string(ref[0]) + ", " + std::to_string(ref[1]) + ", " +
                   std::to_string(ref[2]);
          }};
}

void AddPid(std::vector<Field>& f, const std::string& sec, PidConfig& p) {
  f.push_back(Numbers(sec, "kp", p.kp));
  f.push_back(Numbers(sec, "ki", p.ki));
  f.push_back(Numbers(sec, "kd", p.kd));
  f.push_back(Number(sec, "d_filter_tau_s", p.d_filter_tau_s));
  f.push_back(Number(sec, "windup_limit_nm", p.windup_limit_nm));
}

void AddPayload(std::vector<Field>& f, const std::string& name, PayloadConfig& p) {
  f.push_back(Number("payload", name + "_mass_fraction", p.mass_fraction));
  f.push_back(Number("payload", name + "_com_m", p.com_m));
  f.push_back(Number("payload", name + "_gyration_m", p.gyration_m));
}

std::vector<Field> Fields(RunConfig& c) {
  std::vector<Field> f;
  auto& m = c.model;
  f.push_back(Text("model", "link_table", m.link_table));
  f.push_back(Names("model", "trunk_links", m.trunk_links));
  f.push_back(Names("model", "thigh_links", m.thigh_links));
  f.push_back(Names("model", "shank_links", m.shank_links));
  f.push_back(Names("model", "excluded_links", m.excluded_links));
  f.push_back(Signs("model", "joint_signs", m.joint_signs));
  f.push_back(Number("model", "gravity_mps2", m.gravity_mps2));
  f.push_back(Numbers("model", "torque_limit_nm", m.torque_limit_nm));
  f.push_back(Number("payload", "body_mass_kg", m.body_mass_kg));
  f.push_back(Number("payload", "trunk_share", m.trunk_share));
  AddPayload(f, "trunk", m.trunk);
  AddPayload(f, "thigh", m.thigh);
  AddPayload(f, "shank", m.shank);

  auto& t = c.trajectory;
  f.push_back(Text("trajectory", "source", t.source));
  f.push_back(Text("trajectory", "csv_path", t.csv_path));
  f.push_back(Number("trajectory", "duration_s", t.duration_s));
  f.push_back(Number("trajectory", "rate_hz", t.rate_hz));
  f.push_back(Text("trajectory", "hip_waypoints", t.hip_waypoints));
  f.push_back(Text("trajectory", "knee_waypoints", t.knee_waypoints));
  f.push_back(Text("trajectory", "ankle_waypoints", t.ankle_waypoints));
  f.push_back(Numbers("trajectory", "phase_marks", t.phase_marks));
  f.push_back(Flag("trajectory", "filter_enabled", t.filter_enabled));
  f.push_back(Number("trajectory", "filter_cutoff_hz", t.filter_cutoff_hz));
  f.push_back(Integer("trajectory", "filter_order", t.filter_order));
  f.push_back(Text("trajectory", "filter_convention", t.filter_convention));

  AddPid(f, "pid", c.pid);
  f.push_back(Numbers("lqr", "q_position", c.lqr.q_position));
  f.push_back(Numbers("lqr", "q_velocity", c.lqr.q_velocity));
  f.push_back(Numbers("lqr", "r", c.lqr.r));
  f.push_back(Text("lqr", "structure", c.lqr.structure));
  f.push_back(Text("lqr", "feedforward", c.lqr.feedforward));
  f.push_back(Number("hybrid", "alpha", c.hybrid.alpha));
  AddPid(f, "hybrid", c.hybrid.pid);
  f.push_back(Text("gains", "scaling", c.gains.scaling));
  f.push_back(Number("gains", "operating_point", c.gains.operating_point));

  auto& s = c.sim;
  f.push_back(Number("sim", "dt_s", s.dt_s));
  f.push_back(Number("sim", "duration_s", s.duration_s));
  f.push_back(Numbers("sim", "initial_offset_deg", s.initial_offset_deg));
  f.push_back(Text("sim", "disturbance_joint", s.disturbance_joint));
  f.push_back(Number("sim", "disturbance_start_s", s.disturbance_start_s));
  f.push_back(Number("sim", "disturbance_width_s", s.disturbance_width_s));
  f.push_back(Number("sim", "disturbance_magnitude_nm", s.disturbance_magnitude_nm));
  f.push_back(Numbers("sim", "mass_perturbation", s.mass_perturbation));

  f.push_back(Number("metrics", "band_pct", c.metrics.band_pct));
  f.push_back(Names("metrics", "baselines", c.metrics.baselines));
  f.push_back(Number("metrics", "w1", c.metrics.w1));
  f.push_back(Number("metrics", "w2", c.metrics.w2));
  f.push_back(Text("metrics", "alpha_grid", c.metrics.alpha_grid));

  f.push_back(Text("output", "directory", c.output.directory));
  f.push_back(Flag("output", "svg", c.output.svg));
  return f;
}

bool AllNonNegative(const JointTriple& v) {
  return v[0] >= 0.0 && v[1] >= 0.0 && v[2] >= 0.0;
}

bool AllPositive(const JointTriple& v) { return v[0] > 0.0 && v[1] > 0.0 && v[2] > 0.0; }

void CheckPid(Errors& e, const std::string& sec, const PidConfig& p) {
  if (!AllNonNegative(p.kp)) e.push_back("[" + sec + "] kp: gains must be >= 0");
  if (!AllNonNegative(p.ki)) e.push_back("[" + sec + "] ki: gains must be >= 0");
  if (!AllNonNegative(p.kd)) e.push_back("[" + sec + "] kd: gains must be >= 0");
  if (!(p.d_filter_tau_s > 0.0)) e.push_back("[" + sec + "] d_filter_tau_s: must be > 0");
  if (!(p.windup_limit_nm > 0.0)) e.push_back("[" + sec + "] windup_limit_nm: must be > 0");
}

void CheckPayload(Errors& e, const std::string& name, const PayloadConfig& p) {
  if (!(p.mass_fraction >= 0.0 && p.mass_fraction <= 1.0)) {
    e.push_back("[payload] " + name + "_mass_fraction: must lie in [0, 1]");
  }
  if (!(p.gyration_m >= 0.0)) e.push_back("[payload] " + name + "_gyration_m: must be >= 0");
  if (!(std::abs(p.com_m) <= 2.0)) e.push_back("[payload] " + name + "_com_m: must lie in [-2, 2] m");
}

void CheckWaypoints(Errors& e, const std::string& key, const std::string& text) {
  try {
    const auto pts = ParseWaypointList(text);
    if (pts.size() < 2) e.push_back("[trajectory] " + key + ": needs at least two waypoints");
  } catch (const Error& ex) {
    e.push_back("[trajectory] " + key + ": " + ex.what());
  }
}

}  // namespace

std::vector<Waypoint> ParseWaypointList(const std::string& text) {
  std::vector<Waypoint> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    Waypoint w;
    if (colon == std::string::npos || !ToDouble(item.substr(0, colon), w.t_norm) ||
        !ToDouble(item.substr(colon + 1), w.angle_deg)) {
      throw InvalidArgument("malformed waypoint '" + item + "', expected t_norm:angle_deg");
    }
    out.push_back(w);
  }
  for (size_t i = 1; i < out.size(); ++i) {
    if (!(out[i].t_norm > out[i - 1].t_norm)) {
      throw InvalidArgument("waypoint times must be strictly increasing");
    }
  }
  if (!out.empty() && (out.front().t_norm != 0.0 || out.back().t_norm != 1.0)) {
    throw InvalidArgument("waypoints must start at 0 and end at 1");
  }
  for (const auto& w : out) {
    if (std::abs(w.angle_deg) > 180.0) throw InvalidArgument("waypoint angle outside [-180, 180]");
  }
  return out;
}

WaypointTable WaypointsFromConfig(const TrajectoryConfig& cfg) {
  WaypointTable table;
  table[Joint::kHip] = ParseWaypointList(cfg.hip_waypoints);
  table[Joint::kKnee] = ParseWaypointList(cfg.knee_waypoints);
  table[Joint::kAnkle] = ParseWaypointList(cfg.ankle_waypoints);
  return table;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return model == o.model && trajectory == o.trajectory && pid == o.pid && lqr == o.lqr &&
         hybrid == o.hybrid && gains == o.gains && sim == o.sim && metrics == o.metrics &&
         output == o.output;
}

std::string RunConfig::ResolvePath(const std::string& path) const {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : InvalidArgument([&] {
        std::string msg = "invalid configuration (" + std::to_string(violations.size()) +
                          " problem" + (violations.size() == 1 ? "" : "s") + ")";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> ValidateRunConfig(const RunConfig& c) {
  Errors e;
  const auto& m = c.model;
  if (!m.link_table.empty() && !std::filesystem::exists(c.ResolvePath(m.link_table))) {
    e.push_back("[model] link_table: file not found: " + c.ResolvePath(m.link_table));
  }
  if (m.trunk_links.empty()) e.push_back("[model] trunk_links: empty");
  if (m.thigh_links.empty()) e.push_back("[model] thigh_links: empty");
  if (m.shank_links.empty()) e.push_back("[model] shank_links: empty");
  if (!(m.gravity_mps2 >= 0.0)) e.push_back("[model] gravity_mps2: must be >= 0");
  if (!AllPositive(m.torque_limit_nm)) e.push_back("[model] torque_limit_nm: must be > 0");
  if (!(m.body_mass_kg >= 0.0)) e.push_back("[payload] body_mass_kg: must be >= 0");
  if (!(m.trunk_share >= 0.0 && m.trunk_share <= 1.0)) {
    e.push_back("[payload] trunk_share: must lie in [0, 1]");
  }
  CheckPayload(e, "trunk", m.trunk);
  CheckPayload(e, "thigh", m.thigh);
  CheckPayload(e, "shank", m.shank);

  const auto& t = c.trajectory;
  if (t.source != "generated" && t.source != "csv") {
    e.push_back("[trajectory] source: must be 'generated' or 'csv'");
  }
  if (t.source == "csv") {
    if (t.csv_path.empty()) {
      e.push_back("[trajectory] csv_path: required when source = csv");
    } else if (!std::filesystem::exists(c.ResolvePath(t.csv_path))) {
      e.push_back("[trajectory] csv_path: file not found: " + c.ResolvePath(t.csv_path));
    }
  }
  if (!(t.duration_s > 0.0)) e.push_back("[trajectory] duration_s: must be > 0");
  if (!(t.rate_hz >= 100.0)) e.push_back("[trajectory] rate_hz: must be >= 100");
  CheckWaypoints(e, "hip_waypoints", t.hip_waypoints);
  CheckWaypoints(e, "knee_waypoints", t.knee_waypoints);
  CheckWaypoints(e, "ankle_waypoints", t.ankle_waypoints);
  if (!(t.phase_marks[0] > 0.0 && t.phase_marks[0] < t.phase_marks[1] && t.phase_marks[1] < 1.0)) {
    e.push_back("[trajectory] phase_marks: need 0 < first < second < 1");
  }
  if (!(t.filter_cutoff_hz > 0.0 && t.filter_cutoff_hz < t.rate_hz / 2.0)) {
    e.push_back("[trajectory] filter_cutoff_hz: must lie in (0, rate_hz / 2)");
  }
  if (t.filter_convention != "effective" && t.filter_convention != "per_pass") {
    e.push_back("[trajectory] filter_convention: must be 'effective' or 'per_pass'");
  }
  if (t.filter_order < 1 || (t.filter_convention == "effective" && t.filter_order % 2 != 0)) {
    e.push_back("[trajectory] filter_order: must be positive (and even for 'effective')");
  }

  CheckPid(e, "pid", c.pid);
  CheckPid(e, "hybrid", c.hybrid.pid);
  if (!AllNonNegative(c.lqr.q_position)) e.push_back("[lqr] q_position: must be >= 0");
  if (!AllNonNegative(c.lqr.q_velocity)) e.push_back("[lqr] q_velocity: must be >= 0");
  if (!AllPositive(c.lqr.r)) e.push_back("[lqr] r: must be > 0");
  if (c.lqr.structure != "per_joint" && c.lqr.structure != "coupled") {
    e.push_back("[lqr] structure: must be 'per_joint' or 'coupled'");
  }
  if (c.lqr.feedforward != "none" && c.lqr.feedforward != "gravity" &&
      c.lqr.feedforward != "inverse_dynamics") {
    e.push_back("[lqr] feedforward: must be 'none', 'gravity' or 'inverse_dynamics'");
  }
  if (!(c.hybrid.alpha >= 0.0 && c.hybrid.alpha <= 1.0)) {
    e.push_back("[hybrid] alpha: must lie in [0, 1]");
  }
  if (c.gains.scaling != "reflected_inertia" && c.gains.scaling != "none") {
    e.push_back("[gains] scaling: must be 'reflected_inertia' or 'none'");
  }
  if (!(c.gains.operating_point >= 0.0 && c.gains.operating_point <= 1.0)) {
    e.push_back("[gains] operating_point: must lie in [0, 1]");
  }

  const auto& s = c.sim;
  if (!(s.dt_s > 0.0)) e.push_back("[sim] dt_s: must be > 0");
  if (!(s.duration_s >= s.dt_s)) e.push_back("[sim] duration_s: must be >= dt_s");
  const std::set<std::string> joints = {"none", "hip", "knee", "ankle"};
  if (!joints.count(s.disturbance_joint)) {
    e.push_back("[sim] disturbance_joint: must be none, hip, knee or ankle");
  }
  if (!(s.disturbance_width_s >= 0.0)) e.push_back("[sim] disturbance_width_s: must be >= 0");
  for (double f : s.mass_perturbation) {
    if (!(std::abs(f) <= 0.5)) {
      e.push_back("[sim] mass_perturbation: fractions must lie in [-0.5, 0.5]");
      break;
    }
  }

  if (!(c.metrics.band_pct > 0.0)) e.push_back("[metrics] band_pct: must be > 0");
  if (!(c.metrics.w1 >= 0.0)) e.push_back("[metrics] w1: must be >= 0");
  if (!(c.metrics.w2 >= 0.0)) e.push_back("[metrics] w2: must be >= 0");
  try {
    ParseAlphaGrid(c.metrics.alpha_grid);
  } catch (const Error& ex) {
    e.push_back(std::string("[metrics] alpha_grid: ") + ex.what());
  }
  if (c.output.directory.empty()) e.push_back("[output] directory: must not be empty");
  return e;
}

RunConfig ParseRunConfig(std::istream& in, const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& ex) {
    throw ParseError("config: " + ex.message(), static_cast<int>(ex.line()));
  }
  RunConfig cfg;
  cfg.base_dir = base_dir;
  Errors errors;
  auto fields = Fields(cfg);
  std::map<std::string, std::map<std::string, Field*>> index;
  for (auto& f : fields) index[f.section][f.key] = &f;
  for (const auto& [section, body] : tree) {
    const auto sec = index.find(section);
    if (sec == index.end()) {
      errors.push_back("[" + section + "]: unknown section");
      continue;
    }
    if (!body.data().empty()) errors.push_back("[" + section + "]: key outside any section");
    for (const auto& [key, value] : body) {
      const auto f = sec->second.find(key);
      if (f == sec->second.end()) {
        errors.push_back("[" + section + "] " + key + ": unknown key");
      } else if (!f->second->parse(value.data())) {
        errors.push_back("[" + section + "] " + key + ": malformed value '" + value.data() + "'");
      }
    }
  }
  for (auto& v : ValidateRunConfig(cfg)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  return ParseRunConfig(in, dir.empty() ? "." : dir.string());
}

void WriteRunConfig(std::ostream& out, const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string section;
  for (const auto& f : Fields(copy)) {
    if (f.section != section) {
      out << (section.empty() ? "" : "\n") << "[" << f.section << "]\n";
      section = f.section;
    }
    out << f.key << " = " << f.emit() << '\n';
  }
}

std::string RunConfigText(const RunConfig& cfg) {
  std::ostringstream s;
  WriteRunConfig(s, cfg);
  return s.str();
}

}  // namespace stsexo
