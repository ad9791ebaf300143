#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stsexo/sim.hpp"
#include "stsexo/trajectory.hpp"

namespace stsexo {

using Series = std::span<const double>;

/// sqrt(mean((ref - actual)^2)). Throws InvalidArgument on empty or
/// mismatched input.
double Rmse(Series ref, Series actual);
double Mae(Series ref, Series actual);

/// 100 * max(0, peak travel past the terminal reference value in the
/// direction of motion) / |reference excursion|.
double OvershootPct(Series ref, Series actual);

/// Time metric with a flag for the sentinel cases.
struct TimedMetric {
  double value_s = 0.0;
  bool flagged = false;
};

/// 10-90 % rise time of actual from its start value toward the terminal
/// reference value, interpolated between samples. +inf and flagged when the
/// 90 % level is never reached.
TimedMetric RiseTime(Series t, Series ref, Series actual);

/// Earliest time (from t[0]) after which |actual - ref_end| stays within
/// band_pct % of the reference excursion, with the band entry interpolated.
/// Flagged with value = duration when the last sample is outside the band.
TimedMetric SettlingTime(Series t, Series ref, Series actual, double band_pct = 2.0);

/// RMSE per phase; a sample on a boundary belongs to the earlier phase. An
/// empty phase reports 0.
std::array<double, 3> PhaseRmse(Series t, Series ref, Series actual, const PhaseMarks& marks);

/// 100 (base - candidate) / base.
double ImprovementPct(double base, double candidate);

/// 64-bit FNV-1a hash, used to tag reports with the exact configuration.
std::uint64_t Fnv1a64(const std::string& text);
std::string HashHex(std::uint64_t hash);

struct JointMetrics {
  double rmse_deg = 0.0;
  double mae_deg = 0.0;
  double overshoot_pct = 0.0;
  TimedMetric rise;
  TimedMetric settling;
  std::array<double, 3> phase_rmse_deg{};
};

struct ControllerMetrics {
  std::string controller;
  std::array<JointMetrics, kNumJoints> joints;  // Joint order

  const JointMetrics& operator[](Joint j) const { return joints[Index(j)]; }
};

struct Improvement {
  std::string baseline;
  std::string candidate;
  Joint joint = Joint::kHip;
  std::string metric;  // "rmse" or "mae"
  double pct = 0.0;
};

struct ReportOptions {
  double band_pct = 2.0;
  /// Controllers every other controller is compared against.
  std::vector<std::string> baselines = {"pid", "lqr"};
  std::string config_hash;
};

struct MetricsReport {
  std::vector<ControllerMetrics> controllers;  // sorted by name
  std::vector<Improvement> improvements;
  std::map<std::string, std::string> metadata;

  const ControllerMetrics& at(const std::string& name) const;
};

/// Computes every metric per joint and controller (in degrees) plus the
/// improvement percentages over each baseline present in the logs.
MetricsReport BuildReport(const std::map<std::string, SimLog>& logs, const ReportOptions& options);

/// Human-readable table laid out as metric x joint rows by controller columns.
void WriteReportText(std::ostream& out, const MetricsReport& report);

/// `controller,joint,metric,value,flag`. Core metric names are rmse_deg,
/// mae_deg, overshoot_pct, rise_time_s and settling_time_s.
void WriteReportCsv(std::ostream& out, const MetricsReport& report);

struct ReportRow {
  std::string controller;
  std::string joint;
  std::string metric;
  double value = 0.0;
  std::string flag;
};

std::vector<ReportRow> LoadReportCsv(std::istream& in);

}  // namespace stsexo
