#include "stsexo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "csv.hpp"
#include "stsexo/error.hpp"
#include "stsexo/units.hpp"

namespace stsexo {

namespace {

void CheckPair(Series a, Series b) {
  if (a.empty()) throw InvalidArgument("metric of an empty series");
  if (a.size() != b.size()) throw InvalidArgument("metric series lengths differ");
}

void CheckTimed(Series t, Series ref, Series actual) {
  CheckPair(ref, actual);
  if (t.size() != ref.size()) throw InvalidArgument("time base length differs from the series");
}

double Excursion(Series ref) {
  const double e = ref.back() - ref.front();
  if (e == 0.0) throw InvalidArgument("reference excursion is zero");
  return e;
}

// Time at which the segment (t0, v0)-(t1, v1) reaches level.
double Crossing(double t0, double v0, double t1, double v1, double level) {
  if (v1 == v0) return t1;
  return t0 + (level - v0) / (v1 - v0) * (t1 - t0);
}

}  // namespace

double Rmse(Series ref, Series actual) {
  CheckPair(ref, actual);
  double sum = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) sum += (ref[i] - actual[i]) * (ref[i] - actual[i]);
  return std::sqrt(sum / static_cast<double>(ref.size()));
}

double Mae(Series ref, Series actual) {
  CheckPair(ref, actual);
  double sum = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) sum += std::abs(ref[i] - actual[i]);
  return sum / static_cast<double>(ref.size());
}

double OvershootPct(Series ref, Series actual) {
  CheckPair(ref, actual);
  const double exc = Excursion(ref);
  const double dir = exc > 0.0 ? 1.0 : -1.0;
  double peak = 0.0;
  for (double a : actual) peak = std::max(peak, dir * (a - ref.back()));
  return 100.0 * peak / std::abs(exc);
}

TimedMetric RiseTime(Series t, Series ref, Series actual) {
  CheckTimed(t, ref, actual);
  Excursion(ref);
  const double start = actual.front();
  const double span = ref.back() - start;
  const double inf = std::numeric_limits<double>::infinity();
  if (span == 0.0) return {inf, true};
  // Progress toward the terminal value, 0 at the start and 1 on arrival.
  auto progress = [&](size_t i) { return (actual[i] - start) / span; };
  auto first_reach = [&](double level) {
    if (progress(0) >= level) return t[0];
    for (size_t i = 1; i < t.size(); ++i) {
      if (progress(i) >= level) return Crossing(t[i - 1], progress(i - 1), t[i], progress(i), level);
    }
    return inf;
  };
  const double t10 = first_reach(0.1);
  const double t90 = first_reach(0.9);
  if (!std::isfinite(t90)) return {inf, true};
  return {t90 - t10, false};
}

TimedMetric SettlingTime(Series t, Series ref, Series actual, double band_pct) {
  CheckTimed(t, ref, actual);
  if (!(band_pct > 0.0)) throw InvalidArgument("settling band must be positive");
  const double band = band_pct / 100.0 * std::abs(Excursion(ref));
  const double target = ref.back();
  auto dev = [&](size_t i) { return std::abs(actual[i] - target); };
  const size_t n = t.size();
  if (dev(n - 1) > band) return {t[n - 1] - t[0], true};
  size_t k = n - 1;
  while (k > 0 && dev(k - 1) <= band) --k;
  if (k == 0) return {0.0, false};
  return {Crossing(t[k - 1], dev(k - 1), t[k], dev(k), band) - t[0], false};
}

std::array<double, 3> PhaseRmse(Series t, Series ref, Series actual, const PhaseMarks& marks) {
  CheckTimed(t, ref, actual);
  std::array<double, 3> sum{}, count{};
  const double t0 = t.front(), span = t.back() - t.front();
  for (size_t i = 0; i < t.size(); ++i) {
    const double tn = span > 0.0 ? std::clamp((t[i] - t0) / span, 0.0, 1.0) : 0.0;
    const int p = static_cast<int>(PhaseAt(tn, marks));
    sum[p] += (ref[i] - actual[i]) * (ref[i] - actual[i]);
    count[p] += 1.0;
  }
  std::array<double, 3> out{};
  for (int p = 0; p < 3; ++p) out[p] = count[p] > 0.0 ? std::sqrt(sum[p] / count[p]) : 0.0;
  return out;
}

double ImprovementPct(double base, double candidate) {
  if (base == 0.0) throw InvalidArgument("improvement relative to a zero baseline");
  return 100.0 * (base - candidate) / base;
}

std::uint64_t Fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashHex(std::uint64_t hash) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << hash;
  return s.str();
}

const ControllerMetrics& MetricsReport::at(const std::string& name) const {
  for (const auto& c : controllers) {
    if (c.controller == name) return c;
  }
  throw InvalidArgument("report has no controller '" + name + "'");
}

MetricsReport BuildReport(const std::map<std::string, SimLog>& logs, const ReportOptions& options) {
  if (logs.empty()) throw InvalidArgument("report needs at least one log");
  const int n = logs.begin()->second.num_samples();
  MetricsReport report;
  for (const auto& [name, log] : logs) {
    if (log.num_samples() != n || log.q.cols() != kNumJoints || log.q_ref.rows() != n) {
      throw InvalidArgument("logs have inconsistent series lengths");
    }
    ControllerMetrics cm;
    cm.controller = name;
    const std::vector<double> t(log.t.data(), log.t.data() + n);
    for (int j = 0; j < kNumJoints; ++j) {
      std::vector<double> r(n), a(n);
      for (int k = 0; k < n; ++k) {
        r[k] = log.q_ref(k, j) * kRadToDeg;
        a[k] = log.q(k, j) * kRadToDeg;
      }
      JointMetrics& m = cm.joints[j];
      m.rmse_deg = Rmse(r, a);
      m.mae_deg = Mae(r, a);
      m.overshoot_pct = OvershootPct(r, a);
      m.rise = RiseTime(t, r, a);
      m.settling = SettlingTime(t, r, a, options.band_pct);
      m.phase_rmse_deg = PhaseRmse(t, r, a, log.phase_marks);
    }
    report.controllers.push_back(std::move(cm));
  }
  for (const auto& base : options.baselines) {
    if (!logs.count(base)) continue;
    const auto& b = report.at(base);
    for (const auto& c : report.controllers) {
      if (c.controller == base) continue;
      for (Joint j : kReportOrder) {
        report.improvements.push_back(
            {base, c.controller, j, "rmse", ImprovementPct(b[j].rmse_deg, c[j].rmse_deg)});
        report.improvements.push_back(
            {base, c.controller, j, "mae", ImprovementPct(b[j].mae_deg, c[j].mae_deg)});
      }
    }
  }
  std::ostringstream band;
  band << options.band_pct;
  report.metadata = {
      {"metrics_version", "1"},
      {"rmse", "sqrt(mean((ref - actual)^2)), degrees"},
      {"mae", "mean(|ref - actual|), degrees"},
      {"overshoot", "100 * peak travel past terminal reference / |reference excursion|"},
      {"rise_time", "10-90 % of travel from actual start to terminal reference, interpolated"},
      {"settling_time", "last entry into +/-" + band.str() +
                            " % of |excursion| around terminal reference, from motion start"},
      {"improvement", "100 * (baseline - candidate) / baseline"},
      {"config_hash", options.config_hash},
  };
  return report;
}

namespace {

std::string FormatTimed(const TimedMetric& m, const char* flag_text) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(3);
  if (std::isfinite(m.value_s)) {
    s << m.value_s;
  } else {
    s << "inf";
  }
  if (m.flagged) s << " (" << flag_text << ")";
  return s.str();
}

}  // namespace

void WriteReportText(std::ostream& out, const MetricsReport& report) {
  constexpr int kLabel = 28, kCol = 24;
  out << std::left << std::setw(kLabel) << "metric";
  for (const auto& c : report.controllers) out << std::setw(kCol) << c.controller;
  out << '\n';
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  for (Joint j : kReportOrder) {
    out << '\n' << JointName(j) << '\n';
    const std::vector<std::pair<std::string, std::function<std::string(const JointMetrics&)>>> rows = {
        {"  RMSE (deg)", [&](const JointMetrics& m) { return fixed(m.rmse_deg, 3); }},
        {"  MAE (deg)", [&](const JointMetrics& m) { return fixed(m.mae_deg, 3); }},
        {"  Overshoot (%)", [&](const JointMetrics& m) { return fixed(m.overshoot_pct, 3); }},
        {"  Rise time (s)", [](const JointMetrics& m) { return FormatTimed(m.rise, "not reached"); }},
        {"  Settling time (s)",
         [](const JointMetrics& m) { return FormatTimed(m.settling, "did not settle"); }},
        {"  RMSE phase 1/2/3 (deg)",
         [&](const JointMetrics& m) {
           return fixed(m.phase_rmse_deg[0], 2) + "/" + fixed(m.phase_rmse_deg[1], 2) + "/" +
                  fixed(m.phase_rmse_deg[2], 2);
         }},
    };
    for (const auto& [label, fmt] : rows) {
      out << std::setw(kLabel) << label;
      for (const auto& c : report.controllers) out << std::setw(kCol) << fmt(c[j]);
      out << '\n';
    }
  }
  if (!report.improvements.empty()) {
    out << "\nImprovement (%)\n";
    for (const auto& imp : report.improvements) {
      out << "  " << std::setw(8) << imp.candidate << " vs " << std::setw(8) << imp.baseline
          << std::setw(7) << JointName(imp.joint) << std::setw(6) << imp.metric
          << fixed(imp.pct, 1) << '\n';
    }
  }
  out << "\nDefinitions\n";
  for (const auto& [k, v] : report.metadata) out << "  " << k << ": " << v << '\n';
  out << std::right;
}

void WriteReportCsv(std::ostream& out, const MetricsReport& report) {
  out << "controller,joint,metric,value,flag\n" << std::setprecision(17);
  for (const auto& c : report.controllers) {
    for (Joint j : kReportOrder) {
      const JointMetrics& m = c[j];
      const std::string jn = JointName(j);
      out << c.controller << ',' << jn << ",rmse_deg," << m.rmse_deg << ",\n";
      out << c.controller << ',' << jn << ",mae_deg," << m.mae_deg << ",\n";
      out << c.controller << ',' << jn << ",overshoot_pct," << m.overshoot_pct << ",\n";
      out << c.controller << ',' << jn << ",rise_time_s," << m.rise.value_s << ','
          << (m.rise.flagged ? "not_reached" : "") << '\n';
      out << c.controller << ',' << jn << ",settling_time_s," << m.settling.value_s << ','
          << (m.settling.flagged ? "did_not_settle" : "") << '\n';
      for (int p = 0; p < 3; ++p) {
        out << c.controller << ',' << jn << ",phase" << p + 1 << "_rmse_deg,"
            << m.phase_rmse_deg[p] << ",\n";
      }
    }
  }
  for (const auto& imp : report.improvements) {
    out << imp.candidate << ',' << JointName(imp.joint) << ',' << imp.metric
        << "_improvement_pct," << imp.pct << ",vs_" << imp.baseline << '\n';
  }
}

std::vector<ReportRow> LoadReportCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      detail::SplitCells(line) !=
          std::vector<std::string>{"controller", "joint", "metric", "value", "flag"}) {
    throw ParseError("unexpected report header", 1);
  }
  std::vector<ReportRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    auto cells = detail::SplitCells(line);
    if (cells.size() == 4 && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw ParseError("expected 5 columns", line_no);
    ReportRow r{cells[0], cells[1], cells[2], 0.0, cells[4]};
    if (cells[3] == "inf") {
      r.value = std::numeric_limits<double>::infinity();
    } else {
      r.value = detail::ParseDouble(cells[3], line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace stsexo
