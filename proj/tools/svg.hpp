#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stsexo::tools {

struct LineSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Panel {
  std::string y_label;
  std::vector<LineSeries> series;
};

/// Stacked line-plot panels sharing one x axis. Vertical markers are drawn
/// across every panel.
struct Figure {
  std::string title;
  std::string x_label = "time (s)";
  std::vector<Panel> panels;
  std::vector<double> x_markers;
};

void WriteFigureSvg(std::ostream& out, const Figure& figure);

/// Foot-anchored stick figure. `points` are the ankle, knee, hip and head
/// positions in metres; the foot is drawn forward from the ankle.
struct StickFrame {
  std::string title;
  std::vector<Eigen::Vector2d> points;
  double foot_length_m = 0.08;
  std::vector<std::string> annotations;
};

void WriteStickFigureSvg(std::ostream& out, const StickFrame& frame);

/// Escapes &, <, > and quotes for SVG text.
std::string XmlEscape(const std::string& text);

}  // namespace stsexo::tools
