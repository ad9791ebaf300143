#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "stsexo/config.hpp"
#include "stsexo/experiment.hpp"
#include "stsexo/metrics.hpp"
#include "stsexo/sim.hpp"
#include "stsexo/tuning.hpp"
#include "stsexo/units.hpp"
#include "svg.hpp"

namespace stsexo::tools {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::string> kControllerColors = {
    {"pid", "#d62728"}, {"lqr", "#1f77b4"}, {"hybrid", "#2ca02c"}};

RunConfig LoadConfig(const CliOptions& opts) {
  if (opts.config_path.empty()) {
    spdlog::info("no --config given, using built-in defaults");
    return RunConfig{};
  }
  spdlog::info("loading {}", opts.config_path);
  return LoadRunConfig(opts.config_path);
}

fs::path OutputDir(const CliOptions& opts, const RunConfig& cfg) {
  const fs::path dir = opts.out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

/// Files are rendered in memory first and written together at the end.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& Add(const std::string& name) { return files_[name]; }

  void Flush() {
    for (const auto& [name, text] : files_) {
      const fs::path path = dir_ / name;
      std::ofstream out(path, std::ios::binary);
      out << text.str();
      if (!out) throw Error("cannot write " + path.string());
      spdlog::debug("wrote {}", path.string());
    }
  }

 private:
  fs::path dir_;
  std::map<std::string, std::ostringstream> files_;
};

std::vector<double> Column(const Eigen::MatrixXd& m, int col, double scale = 1.0) {
  std::vector<double> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m(i, col) * scale;
  return v;
}

std::vector<double> Times(const Eigen::VectorXd& t) { return {t.data(), t.data() + t.size()}; }

std::vector<double> PhaseTimes(const SimLog& log) {
  if (log.num_samples() == 0) return {};
  const double t0 = log.t(0);
  const double span = log.t(log.num_samples() - 1) - t0;
  return {t0 + log.phase_marks.first * span, t0 + log.phase_marks.second * span};
}

std::string Color(const std::string& name) {
  const auto it = kControllerColors.find(name);
  return it == kControllerColors.end() ? "#9467bd" : it->second;
}

/// Tracking panel (reference plus every log) over an error panel.
Figure JointFigure(Joint joint, const std::map<std::string, SimLog>& logs) {
  Figure fig;
  fig.title = fmt::format("{} tracking", JointName(joint));
  Panel angles{"angle (deg)", {}};
  Panel errors{"error (deg)", {}};
  const int j = Index(joint);
  bool have_ref = false;
  for (const auto& [name, log] : logs) {
    const auto t = Times(log.t);
    if (!have_ref) {
      angles.series.push_back({"reference", "#000000", t, Column(log.q_ref, j, kRadToDeg), true});
      fig.x_markers = PhaseTimes(log);
      have_ref = true;
    }
    angles.series.push_back({name, Color(name), t, Column(log.q, j, kRadToDeg)});
    std::vector<double> err(t.size());
    for (std::size_t i = 0; i < err.size(); ++i) err[i] = (log.q_ref(i, j) - log.q(i, j)) * kRadToDeg;
    errors.series.push_back({name, Color(name), t, std::move(err)});
  }
  fig.panels = {std::move(angles), std::move(errors)};
  return fig;
}

void AddJointPlots(OutputSet& files, const std::map<std::string, SimLog>& logs) {
  for (Joint j : kReportOrder) {
    WriteFigureSvg(files.Add(std::string(JointName(j)) + ".svg"), JointFigure(j, logs));
  }
}

MetricsReport MakeReport(const Experiment& exp, const std::map<std::string, SimLog>& logs) {
  const auto& m = exp.config.metrics;
  MetricsReport report = BuildReport(logs, {m.band_pct, m.baselines, exp.ConfigHash()});
  report.metadata["w1"] = fmt::format("{:g}", m.w1);
  report.metadata["w2"] = fmt::format("{:g}", m.w2);
  report.metadata["hybrid_alpha"] = fmt::format("{:g}", exp.config.hybrid.alpha);
  for (const auto& [name, log] : logs) {
    const auto idx = ComputePerformanceIndex(log, m.w1, m.w2);
    report.metadata["J_" + name] = fmt::format("{:.6g}", idx.J);
  }
  return report;
}

SimLog RunOne(const Experiment& exp, const std::string& name) {
  spdlog::info("simulating {} for {} s at dt = {} s", name, exp.sim.duration_s, exp.sim.dt_s);
  SimLog log = Simulate(*exp.model, exp.Controller(name), exp.reference, exp.sim);
  log.controller = name;
  return log;
}

std::string AbsolutePath(const RunConfig& cfg, const std::string& path) {
  return path.empty() ? path : fs::absolute(cfg.ResolvePath(path)).lexically_normal().string();
}

}  // namespace

int CmdSimulate(const CliOptions& opts) {
  const RunConfig cfg = LoadConfig(opts);
  const Experiment exp = BuildExperiment(cfg);
  const std::map<std::string, SimLog> logs = {{opts.controller, RunOne(exp, opts.controller)}};
  const SimLog& log = logs.begin()->second;
  const MetricsReport report = MakeReport(exp, logs);

  OutputSet files(OutputDir(opts, cfg));
  WriteSimLogCsv(files.Add("log.csv"), log);
  WriteReportText(files.Add("report.txt"), report);
  WriteReportCsv(files.Add("report.csv"), report);
  if (cfg.output.svg) AddJointPlots(files, logs);
  files.Flush();

  const auto sat = std::count(log.saturated.begin(), log.saturated.end(), true);
  if (sat > 0) spdlog::warn("{}: torque saturated on {} of {} samples", opts.controller, sat, log.num_samples());
  WriteReportText(std::cout, report);
  return 0;
}

int CmdCompare(const CliOptions& opts) {
  const RunConfig cfg = LoadConfig(opts);
  const Experiment exp = BuildExperiment(cfg);
  spdlog::info("running pid, lqr and hybrid concurrently");
  const ComparisonResult result = RunComparison(*exp.model, exp.Controllers(), exp.reference, exp.sim);
  for (const auto& [name, what] : result.errors) spdlog::error("{}: {}", name, what);
  if (result.logs.empty()) return 1;

  const MetricsReport report = MakeReport(exp, result.logs);
  OutputSet files(OutputDir(opts, cfg));
  for (const auto& [name, log] : result.logs) WriteSimLogCsv(files.Add("log_" + name + ".csv"), log);
  WriteReportText(files.Add("report.txt"), report);
  WriteReportCsv(files.Add("report.csv"), report);
  auto& bars = files.Add("bars.csv");
  bars << "controller,joint,rmse_deg,mae_deg\n";
  for (const auto& c : report.controllers) {
    for (Joint j : kReportOrder) {
      fmt::print(bars, "{},{},{:.17g},{:.17g}\n", c.controller, JointName(j), c[j].rmse_deg, c[j].mae_deg);
    }
  }
  if (cfg.output.svg) AddJointPlots(files, result.logs);
  files.Flush();

  WriteReportText(std::cout, report);
  return result.errors.empty() ? 0 : 1;
}

int CmdTuneAlpha(const CliOptions& opts) {
  const RunConfig cfg = LoadConfig(opts);
  const std::vector<double> grid = ParseAlphaGrid(opts.grid.empty() ? cfg.metrics.alpha_grid : opts.grid);
  const Experiment exp = BuildExperiment(cfg);
  spdlog::info("evaluating {} alpha values", grid.size());
  const AlphaTuning tuning =
      TuneAlpha(*exp.model, exp.hybrid, exp.reference, exp.sim, cfg.metrics.w1, cfg.metrics.w2, grid);

  OutputSet files(OutputDir(opts, cfg));
  auto& csv = files.Add("alpha_tuning.csv");
  csv << "alpha,J,rmse_total,torque_energy\n";
  for (const auto& p : tuning.curve) {
    fmt::print(csv, "{:.17g},{:.17g},{:.17g},{:.17g}\n", p.alpha, p.index.J, p.index.rmse_total_rad,
               p.index.torque_energy);
  }
  RunConfig tuned = cfg;
  tuned.hybrid.alpha = tuning.alpha_star;
  tuned.model.link_table = AbsolutePath(cfg, cfg.model.link_table);
  tuned.trajectory.csv_path = AbsolutePath(cfg, cfg.trajectory.csv_path);
  WriteRunConfig(files.Add("tuned.ini"), tuned);
  files.Flush();

  fmt::print(std::cout, "{:>6}  {:>12}  {:>12}  {:>14}\n", "alpha", "J", "rmse_rad", "torque_energy");
  for (const auto& p : tuning.curve) {
    fmt::print(std::cout, "{:>6.3f}  {:>12.6g}  {:>12.6g}  {:>14.6g}{}\n", p.alpha, p.index.J,
               p.index.rmse_total_rad, p.index.torque_energy, p.alpha == tuning.alpha_star ? "  *" : "");
  }
  fmt::print(std::cout, "alpha* = {:g}\n", tuning.alpha_star);
  return 0;
}

int CmdFrames(const CliOptions& opts) {
  if (opts.count < 2) throw InvalidArgument("--count must be at least 2");
  const RunConfig cfg = LoadConfig(opts);
  const Experiment exp = BuildExperiment(cfg);
  const SimLog log = RunOne(exp, opts.controller);
  static const char* kPostures[] = {"Seated", "Push-Up", "Mid-Stand", "Stand", "Final Stand"};

  double foot = 0.08;
  const auto table = cfg.model.link_table.empty() ? ReferenceLinkTable()
                                                   : LoadLinkTableCsv(cfg.ResolvePath(cfg.model.link_table));
  for (const auto& link : table) {
    for (const auto& name : cfg.model.excluded_links) {
      if (link.name == name && link.length_m > 0.0) foot = link.length_m;
    }
  }

  OutputSet files(OutputDir(opts, cfg));
  auto& index = files.Add("frames.csv");
  index << "frame,t_s,hip_deg,knee_deg,ankle_deg\n";
  const int last = log.num_samples() - 1;
  for (int f = 0; f < opts.count; ++f) {
    const double s = static_cast<double>(f) / (opts.count - 1);
    const int k = static_cast<int>(std::lround(s * last));
    const Eigen::VectorXd q = log.q.row(k).transpose();
    StickFrame frame;
    frame.title = opts.count == 5 ? fmt::format("{} (t = {:.2f} s)", kPostures[f], log.t(k))
                                  : fmt::format("Frame {} (t = {:.2f} s)", f + 1, log.t(k));
    frame.points = JointPositions(*exp.model, q);
    frame.foot_length_m = foot;
    for (Joint j : kReportOrder) {
      frame.annotations.push_back(fmt::format("{}: {:.1f} deg", JointName(j), q(Index(j)) * kRadToDeg));
    }
    WriteStickFigureSvg(files.Add(fmt::format("frame_{}.svg", f + 1)), frame);
    fmt::print(index, "{},{:.17g},{:.17g},{:.17g},{:.17g}\n", f + 1, log.t(k),
               q(Index(Joint::kHip)) * kRadToDeg, q(Index(Joint::kKnee)) * kRadToDeg,
               q(Index(Joint::kAnkle)) * kRadToDeg);
  }
  files.Flush();
  fmt::print(std::cout, "wrote {} frames\n", opts.count);
  return 0;
}

int CmdModelInfo(const CliOptions& opts) {
  const RunConfig cfg = LoadConfig(opts);
  if (auto v = ValidateRunConfig(cfg); !v.empty()) throw ConfigError(std::move(v));
  const ChainModel model = BuildModel(cfg);
  const Trajectory ref = BuildReference(cfg);
  const JointState op = OperatingPoint(cfg, ref);

  static const Joint kProximal[] = {Joint::kAnkle, Joint::kKnee, Joint::kHip};
  auto& out = std::cout;
  fmt::print(out, "{:<7} {:<6} {:>9} {:>9} {:>9} {:>9} {:>11} {:>5}  {}\n", "segment", "joint", "mass_kg",
             "length_m", "com_x_m", "com_y_m", "I_com_kgm2", "sign", "links");
  double total = 0.0;
  for (int i = 0; i < model.num_joints(); ++i) {
    const Segment& s = model.segments()[i];
    std::string links;
    for (const auto& l : s.constituents) links += (links.empty() ? "" : " ") + l;
    fmt::print(out, "{:<7} {:<6} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>11.5f} {:>+5d}  {}\n", s.name,
               JointName(kProximal[i]), s.mass_kg, s.length_m, s.com_m.x(), s.com_m.y(), s.inertia_kgm2,
               s.joint_sign, links);
    total += s.mass_kg;
  }
  fmt::print(out, "total mass: {:.4f} kg, gravity: {:g} m/s^2\n", total, model.gravity());
  const Eigen::VectorXd seated = ReflectedInertia(model, ref.StateAt(0).q);
  const Eigen::VectorXd at_op = ReflectedInertia(model, op.q);
  const Eigen::VectorXd scale = GainScale(cfg, model, op);
  fmt::print(out, "{:<6} {:>10} {:>14} {:>14} {:>12}\n", "joint", "limit_nm", "M_jj_seated", "M_jj_op",
             "gain_scale");
  for (Joint j : kReportOrder) {
    const int k = Index(j);
    fmt::print(out, "{:<6} {:>10.1f} {:>14.4f} {:>14.4f} {:>12.4f}\n", JointName(j), model.torque_limit()(k),
               seated(k), at_op(k), scale(k));
  }
  fmt::print(out, "operating point: t_norm = {:g} ({})\n", cfg.gains.operating_point, cfg.gains.scaling);

  const auto shared = std::make_shared<const ChainModel>(model);
  const LqrController lqr = LqrFromConfig(cfg, shared, op, scale);
  fmt::print(out, "\nLQR design ({}, state [q; qd] in ankle, knee, hip order)\n", cfg.lqr.structure);
  WriteDesignReport(out, lqr.design);
  const Eigen::IOFormat matrix(6, 0, "  ", "\n", "    ", "");
  out << "torque gain (N m per rad, N m s per rad)\n" << lqr.torque_gain.format(matrix) << '\n';
  return 0;
}

int RunCli(int argc, const char* const* argv) {
  auto logger = spdlog::get("stsexo");
  if (!logger) logger = spdlog::stderr_color_mt("stsexo");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("STSEXO_LOG_LEVEL"); env && *env) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("unknown STSEXO_LOG_LEVEL '{}', keeping info", env);
    } else {
      spdlog::set_level(level);
    }
  }

  CLI::App app{"Sit-to-stand exoskeleton simulator"};
  app.require_subcommand(1);
  CliOptions opts;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory (overrides [output] directory)");
  };
  auto* simulate = app.add_subcommand("simulate", "run one controller and write log, report and plots");
  add_common(simulate);
  simulate->add_option("--controller", opts.controller, "pid, lqr or hybrid")
      ->check(CLI::IsMember({"pid", "lqr", "hybrid"}));
  auto* compare = app.add_subcommand("compare", "run pid, lqr and hybrid and write a combined report");
  add_common(compare);
  auto* tune = app.add_subcommand("tune-alpha", "grid search of the hybrid blend coefficient");
  add_common(tune);
  tune->add_option("--grid", opts.grid, "alpha grid a:b:step");
  auto* frames = app.add_subcommand("frames", "stick-figure snapshots along the motion");
  add_common(frames);
  frames->add_option("--count", opts.count, "number of frames")->check(CLI::Range(2, 1000));
  frames->add_option("--controller", opts.controller, "pid, lqr or hybrid")
      ->check(CLI::IsMember({"pid", "lqr", "hybrid"}));
  auto* info = app.add_subcommand("model-info", "print aggregated segment parameters");
  info->add_option("--config", opts.config_path, "INI configuration file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) return CmdSimulate(opts);
    if (compare->parsed()) return CmdCompare(opts);
    if (tune->parsed()) return CmdTuneAlpha(opts);
    if (frames->parsed()) return CmdFrames(opts);
    return CmdModelInfo(opts);
  } catch (const ConfigError& e) {
    spdlog::error("invalid configuration:");
    for (const auto& v : e.violations()) spdlog::error("  {}", v);
  } catch (const DivergenceError& e) {
    spdlog::error("simulation diverged: {}", e.what());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
  }
  return 1;
}

}  // namespace stsexo::tools
