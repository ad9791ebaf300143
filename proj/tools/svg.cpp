#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace stsexo::tools {

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 240.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kGap = 30.0;
constexpr double kBottom = 50.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void Finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double pad = std::max(1e-3, std::abs(lo) * 0.05);
      lo -= pad;
      hi += pad;
    }
  }
};

double NiceStep(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double nice = r < 1.5 ? 1.0 : r < 3.0 ? 2.0 : r < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

std::vector<double> Ticks(Range& r, int target) {
  const double step = NiceStep(r.hi - r.lo, target);
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
  std::vector<double> ticks;
  for (double v = r.lo; v <= r.hi + step * 1e-6; v += step) {
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  }
  return ticks;
}

std::string Label(double v) { return fmt::format("{:g}", v); }

}  // namespace

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void WriteFigureSvg(std::ostream& out, const Figure& figure) {
  const int n = std::max<int>(1, static_cast<int>(figure.panels.size()));
  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + n * kPanelHeight + (n - 1) * kGap + kBottom;

  Range xr;
  for (const auto& p : figure.panels) {
    for (const auto& s : p.series) {
      for (double x : s.x) xr.Add(x);
    }
  }
  xr.Finish();
  const double x0 = xr.lo, x1 = xr.hi;
  const auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * plot_w; };

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
             "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
             kWidth, height);
  fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::print(out, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
             kLeft + plot_w / 2, XmlEscape(figure.title));

  for (int pi = 0; pi < static_cast<int>(figure.panels.size()); ++pi) {
    const Panel& panel = figure.panels[pi];
    const double top = kTop + pi * (kPanelHeight + kGap);
    const double bottom = top + kPanelHeight;

    Range yr;
    for (const auto& s : panel.series) {
      for (double y : s.y) yr.Add(y);
    }
    yr.Finish();
    const auto yticks = Ticks(yr, 5);
    const auto sy = [&](double y) { return bottom - (y - yr.lo) / (yr.hi - yr.lo) * kPanelHeight; };

    fmt::print(out, "<g>\n");
    for (double t : yticks) {
      fmt::print(out,
                 "<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#e6e6e6\"/>\n"
                 "<text x=\"{3}\" y=\"{4:.2f}\" text-anchor=\"end\">{5}</text>\n",
                 kLeft, sy(t), kLeft + plot_w, kLeft - 6, sy(t) + 4, Label(t));
    }
    for (double m : figure.x_markers) {
      if (m < x0 || m > x1) continue;
      fmt::print(out,
                 "<line class=\"phase-marker\" x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" "
                 "stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n",
                 sx(m), top, bottom);
    }
    fmt::print(out,
               "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
               kLeft, top, plot_w, kPanelHeight);
    fmt::print(out,
               "<text transform=\"translate({},{}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
               18, top + kPanelHeight / 2, XmlEscape(panel.y_label));

    double legend_y = top + 14;
    for (const auto& s : panel.series) {
      const std::size_t count = std::min(s.x.size(), s.y.size());
      // thin long series to about two points per pixel
      const std::size_t stride = std::max<std::size_t>(1, count / static_cast<std::size_t>(2 * plot_w));
      fmt::print(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{} points=\"",
                 s.color, s.dashed ? " stroke-dasharray=\"6,3\"" : "");
      for (std::size_t i = 0; i < count; i += stride) {
        if (!std::isfinite(s.y[i])) continue;
        fmt::print(out, "{:.2f},{:.2f} ", sx(s.x[i]), sy(s.y[i]));
      }
      if (count && (count - 1) % stride != 0 && std::isfinite(s.y[count - 1])) {
        fmt::print(out, "{:.2f},{:.2f}", sx(s.x[count - 1]), sy(s.y[count - 1]));
      }
      fmt::print(out, "\"/>\n");
      const double lx = kLeft + plot_w + 12;
      fmt::print(out,
                 "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n"
                 "<text x=\"{5}\" y=\"{6}\">{7}</text>\n",
                 lx, legend_y, lx + 22, s.color, s.dashed ? " stroke-dasharray=\"6,3\"" : "",
                 lx + 28, legend_y + 4, XmlEscape(s.label));
      legend_y += 18;
    }
    fmt::print(out, "</g>\n");
  }

  Range xt = xr;
  const double step = NiceStep(x1 - x0, 6);
  const double bottom = kTop + n * kPanelHeight + (n - 1) * kGap;
  for (double v = std::ceil(xt.lo / step) * step; v <= x1 + step * 1e-6; v += step) {
    fmt::print(out, "<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", sx(v),
               bottom + 16, Label(std::abs(v) < step * 1e-9 ? 0.0 : v));
  }
  fmt::print(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + plot_w / 2,
             bottom + 38, XmlEscape(figure.x_label));
  fmt::print(out, "</svg>\n");
}

void WriteStickFigureSvg(std::ostream& out, const StickFrame& frame) {
  constexpr double kSize = 420.0;
  constexpr double kScale = 260.0;  // px per metre
  const double ox = kSize * 0.45;
  const double oy = kSize - 50.0;
  const auto px = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(ox + kScale * p.x(), oy - kScale * p.y());
  };

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
             "viewBox=\"0 0 {0} {0}\" font-family=\"sans-serif\" font-size=\"12\">\n",
             kSize);
  fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::print(out, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
             kSize / 2, XmlEscape(frame.title));
  fmt::print(out, "<line x1=\"10\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#999\" stroke-width=\"2\"/>\n",
             oy, kSize - 10);

  if (!frame.points.empty()) {
    const Eigen::Vector2d ankle = px(frame.points.front());
    const Eigen::Vector2d toe = px(frame.points.front() + Eigen::Vector2d(frame.foot_length_m, 0.0));
    fmt::print(out,
               "<line class=\"foot\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
               "stroke=\"#555\" stroke-width=\"6\" stroke-linecap=\"round\"/>\n",
               ankle.x(), ankle.y(), toe.x(), toe.y());
  }
  static const char* kColors[] = {"#1f77b4", "#2ca02c", "#d62728"};
  for (std::size_t i = 0; i + 1 < frame.points.size(); ++i) {
    const Eigen::Vector2d a = px(frame.points[i]);
    const Eigen::Vector2d b = px(frame.points[i + 1]);
    fmt::print(out,
               "<line class=\"link\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
               "stroke=\"{}\" stroke-width=\"6\" stroke-linecap=\"round\"/>\n",
               a.x(), a.y(), b.x(), b.y(), kColors[i % 3]);
  }
  for (std::size_t i = 0; i + 1 < frame.points.size(); ++i) {
    const Eigen::Vector2d a = px(frame.points[i]);
    fmt::print(out, "<circle class=\"joint\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"black\"/>\n",
               a.x(), a.y());
  }
  double y = 44;
  for (const auto& line : frame.annotations) {
    fmt::print(out, "<text x=\"14\" y=\"{}\">{}</text>\n", y, XmlEscape(line));
    y += 16;
  }
  fmt::print(out, "</svg>\n");
}

}  // namespace stsexo::tools
