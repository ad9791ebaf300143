#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "stsexo/error.hpp"
#include "stsexo/trajectory.hpp"

namespace stsexo {

/// Values listed per joint are in hip, knee, ankle order. Values listed per
/// segment refer to the segment each of those joints drives: trunk, thigh,
/// shank.
using JointTriple = std::array<double, 3>;

/// Anthropometric payload carried by one exoskeleton segment.
struct PayloadConfig {
  double mass_fraction = 0.0;  // of body mass
  double com_m = 0.0;          // along the segment from its proximal joint
  double gyration_m = 0.0;     // centroidal radius of gyration
  bool operator==(const PayloadConfig&) const = default;
};

struct ModelConfig {
  std::string link_table;  // empty: built-in reference table
  std::vector<std::string> trunk_links = {"L1", "L2", "L3"};
  std::vector<std::string> thigh_links = {"L4", "L5"};
  std::vector<std::string> shank_links = {"L6", "L7", "L8"};
  std::vector<std::string> excluded_links = {"L9"};
  std::array<int, 3> joint_signs = {1, -1, 1};  // trunk, thigh, shank
  double gravity_mps2 = 9.81;
  JointTriple torque_limit_nm = {150.0, 150.0, 150.0};
  double body_mass_kg = 75.0;
  double trunk_share = 0.5;  // share of the head-arms-trunk mass carried per leg
  PayloadConfig trunk = {0.678, 0.31, 0.25};
  PayloadConfig thigh = {0.100, 0.24, 0.139};
  PayloadConfig shank = {0.0465, 0.24, 0.13};
  bool operator==(const ModelConfig&) const = default;
};

struct TrajectoryConfig {
  std::string source = "generated";  // generated | csv
  std::string csv_path;
  double duration_s = 3.0;
  double rate_hz = 1000.0;
  std::string hip_waypoints = "0:88, 0.33:70, 0.66:20, 1:2";
  std::string knee_waypoints = "0:98, 0.33:85, 0.66:30, 1:3";
  std::string ankle_waypoints = "0:12, 0.2:18, 0.66:10, 1:2";
  std::array<double, 2> phase_marks = {0.33, 0.66};
  bool filter_enabled = false;
  double filter_cutoff_hz = 6.0;
  int filter_order = 4;
  std::string filter_convention = "effective";  // effective | per_pass
  bool operator==(const TrajectoryConfig&) const = default;
};

struct PidConfig {
  JointTriple kp{}, ki{}, kd{};
  double d_filter_tau_s = 0.01;
  double windup_limit_nm = 50.0;
  bool operator==(const PidConfig&) const = default;
};

struct LqrConfig {
  JointTriple q_position = {200.0, 280.0, 120.0};
  JointTriple q_velocity = {10.0, 14.0, 6.0};
  JointTriple r = {0.10, 0.08, 0.15};
  std::string structure = "per_joint";  // per_joint | coupled
  std::string feedforward = "gravity";  // none | gravity | inverse_dynamics
  bool operator==(const LqrConfig&) const = default;
};

struct HybridConfig {
  double alpha = 0.65;
  PidConfig pid = {{90.0, 110.0, 60.0}, {5.2, 6.8, 3.5}, {12.0, 15.0, 8.0}};
  bool operator==(const HybridConfig&) const = default;
};

/// How the configured gains map onto torque-level gains.
struct GainConfig {
  std::string scaling = "reflected_inertia";  // reflected_inertia | none
  /// Normalized reference time of the posture used for gain scaling and
  /// linearization.
  double operating_point = 1.0;
  bool operator==(const GainConfig&) const = default;
};

struct SimSectionConfig {
  double dt_s = 1e-3;
  double duration_s = 3.0;
  JointTriple initial_offset_deg = {0.0, 0.0, 0.0};
  std::string disturbance_joint = "none";  // none | hip | knee | ankle
  double disturbance_start_s = 0.0;
  double disturbance_width_s = 0.0;
  double disturbance_magnitude_nm = 0.0;
  JointTriple mass_perturbation = {0.0, 0.0, 0.0};  // trunk, thigh, shank
  bool operator==(const SimSectionConfig&) const = default;
};

struct MetricsConfig {
  double band_pct = 2.0;
  std::vector<std::string> baselines = {"pid", "lqr"};
  double w1 = 1.0;
  double w2 = 1e-4;
  std::string alpha_grid = "0:1:0.05";
  bool operator==(const MetricsConfig&) const = default;
};

struct OutputConfig {
  std::string directory = "out";
  bool svg = true;
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  TrajectoryConfig trajectory;
  PidConfig pid = {{120.0, 150.0, 80.0}, {8.5, 10.2, 5.4}, {18.0, 22.0, 12.0}};
  LqrConfig lqr;
  HybridConfig hybrid;
  GainConfig gains;
  SimSectionConfig sim;
  MetricsConfig metrics;
  OutputConfig output;
  /// Directory relative paths are resolved against (not serialized).
  std::string base_dir = ".";

  bool operator==(const RunConfig& other) const;
  /// Resolves a path from the config against base_dir.
  std::string ResolvePath(const std::string& path) const;
};

/// Every violation found, each as "[section] key: problem". Empty when valid.
std::vector<std::string> ValidateRunConfig(const RunConfig& cfg);

/// Raised when a configuration has one or more violations.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses INI text. Missing keys keep their defaults; unknown sections or
/// keys and malformed values are violations. Throws ConfigError listing all
/// of them, including the ValidateRunConfig results.
RunConfig ParseRunConfig(std::istream& in, const std::string& base_dir = ".");
RunConfig LoadRunConfig(const std::string& path);

/// Parses "t_norm:angle_deg, ..." waypoint lists.
std::vector<Waypoint> ParseWaypointList(const std::string& text);
WaypointTable WaypointsFromConfig(const TrajectoryConfig& cfg);

/// Writes every field in the INI form ParseRunConfig reads.
void WriteRunConfig(std::ostream& out, const RunConfig& cfg);
std::string RunConfigText(const RunConfig& cfg);

}  // namespace stsexo
