#include "stsexo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "stsexo/error.hpp"

namespace stsexo {

const char* JointName(Joint joint) {
  switch (joint) {
    case Joint::kAnkle:
      return "ankle";
    case Joint::kKnee:
      return "knee";
    case Joint::kHip:
      return "hip";
  }
  return "?";
}

void LinkParam::Validate() const {
  if (!(mass_kg > 0.0)) {
    throw InvalidArgument("link " + name + ": mass must be positive");
  }
  if (!(length_m >= 0.0)) {
    throw InvalidArgument("link " + name + ": length must be non-negative");
  }
  if (!(inertia_zz_kgm2 >= 0.0)) {
    throw InvalidArgument("link " + name + ": inertia must be non-negative");
  }
  if (!com_offset_m.allFinite() || com_offset_m.norm() > length_m + 0.2) {
    throw InvalidArgument("link " + name + ": CoM offset too far from the link");
  }
}

namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double ParseNumber(const std::string& s, int line) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line);
  }
}

}  // namespace

std::vector<LinkParam> LoadLinkTableCsv(std::istream& in) {
  static const std::vector<std::string> kHeader = {"name",    "length_mm", "mass_kg",
                                                   "com_x_m", "com_y_m",   "com_z_m"};
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty link table", 0);
  ++line_no;
  if (SplitCsv(line) != kHeader) {
    throw ParseError("link table header must be name,length_mm,mass_kg,com_x_m,com_y_m,com_z_m",
                     line_no);
  }
  std::vector<LinkParam> links;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != kHeader.size()) {
      throw ParseError("expected 6 columns", line_no);
    }
    LinkParam link;
    link.name = cells[0];
    const bool connector = cells[1] == "---" || cells[1] == "-";
    link.length_m = connector ? 0.0 : ParseNumber(cells[1], line_no) / 1000.0;
    link.mass_kg = ParseNumber(cells[2], line_no);
    link.com_offset_m = {ParseNumber(cells[3], line_no), ParseNumber(cells[4], line_no)};
    ParseNumber(cells[5], line_no);  // medio-lateral, unused in the sagittal model
    link.inertia_zz_kgm2 = link.mass_kg * link.length_m * link.length_m / 12.0;
    try {
      link.Validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no);
    }
    links.push_back(std::move(link));
  }
  return links;
}

std::vector<LinkParam> LoadLinkTableCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open link table: " + path);
  return LoadLinkTableCsv(in);
}

std::vector<LinkParam> ReferenceLinkTable() {
  // name, length (m), mass (kg), CoM anterior, CoM axial
  struct Row {
    const char* name;
    double length, mass, cx, cy;
  };
  static constexpr Row kRows[] = {
      {"L1", 0.380, 0.358, 0.000, 0.010}, {"L2", 0.0, 0.182, 0.000, 0.059},
      {"L3", 0.0, 0.054, 0.003, 0.011},   {"L4", 0.0, 0.068, 0.003, 0.030},
      {"L5", 0.395, 0.459, 0.000, 0.148}, {"L6", 0.0, 0.068, 0.003, 0.030},
      {"L7", 0.330, 0.347, 0.000, 0.113}, {"L8", 0.0, 0.068, 0.003, 0.031},
      {"L9", 0.080, 0.366, 0.046, 0.064},
  };
  std::vector<LinkParam> links;
  for (const auto& r : kRows) {
    links.push_back({r.name, r.length, r.mass, {r.cx, r.cy}, r.mass * r.length * r.length / 12.0});
  }
  return links;
}

ChainBuildOptions ChainBuildOptions::Defaults() {
  ChainBuildOptions o;
  o.segments = {{"shank", {"L6", "L7", "L8"}, +1},
                {"thigh", {"L4", "L5"}, -1},
                {"trunk", {"L1", "L2", "L3"}, +1}};
  o.excluded_links = {"L9"};
  o.torque_limit_nm = {150.0, 150.0, 150.0};
  return o;
}

ChainModel BuildChain(const std::vector<LinkParam>& link_table,
                      const ChainBuildOptions& options) {
  const int n = static_cast<int>(options.segments.size());
  if (n == 0 || (n != kNumJoints && !options.allow_reduced) || n > kNumJoints) {
    throw InvalidArgument("chain must have exactly 3 segments (shank, thigh, trunk)");
  }
  if (static_cast<int>(options.torque_limit_nm.size()) != n) {
    throw InvalidArgument("one torque limit per joint required");
  }
  std::map<std::string, const LinkParam*> by_name;
  for (const auto& link : link_table) {
    if (!by_name.emplace(link.name, &link).second) {
      throw InvalidArgument("duplicate link name " + link.name);
    }
  }
  std::set<std::string> assigned;
  for (const auto& name : options.excluded_links) {
    if (!by_name.count(name)) throw InvalidArgument("unknown link name " + name);
    assigned.insert(name);
  }

  std::vector<Segment> segments;
  for (const auto& spec : options.segments) {
    if (spec.links.empty()) {
      throw InvalidArgument("segment " + spec.name + " has no links assigned");
    }
    if (spec.joint_sign != 1 && spec.joint_sign != -1) {
      throw InvalidArgument("segment " + spec.name + ": joint sign must be +1 or -1");
    }
    struct Part {
      double m;
      Eigen::Vector2d c;
      double inertia;
    };
    std::vector<Part> parts;
    Segment seg;
    seg.name = spec.name;
    seg.joint_sign = spec.joint_sign;
    for (const auto& name : spec.links) {
      const auto it = by_name.find(name);
      if (it == by_name.end()) throw InvalidArgument("unknown link name " + name);
      if (!assigned.insert(name).second) {
        throw InvalidArgument("link " + name + " assigned twice");
      }
      const LinkParam& link = *it->second;
      link.Validate();
      parts.push_back({link.mass_kg, link.com_offset_m, link.inertia_zz_kgm2});
      seg.length_m = std::max(seg.length_m, link.length_m);
      seg.constituents.push_back(name);
    }
    if (const auto p = options.payload.find(spec.name); p != options.payload.end()) {
      if (p->second.mass_kg < 0.0 || p->second.inertia_kgm2 < 0.0) {
        throw InvalidArgument("payload on " + spec.name + " has negative mass or inertia");
      }
      if (p->second.mass_kg > 0.0) {
        parts.push_back({p->second.mass_kg, p->second.offset_m, p->second.inertia_kgm2});
      }
    }
    for (const auto& part : parts) {
      seg.mass_kg += part.m;
      seg.com_m += part.m * part.c;
    }
    seg.com_m /= seg.mass_kg;
    for (const auto& part : parts) {
      seg.inertia_kgm2 += part.inertia + part.m * (part.c - seg.com_m).squaredNorm();
    }
    segments.push_back(std::move(seg));
  }
  for (const auto& [name, link] : by_name) {
    if (!assigned.count(name)) {
      throw InvalidArgument("link " + name + " has no segment assignment");
    }
  }
  for (const auto& [seg_name, mass] : options.payload) {
    const bool known = std::any_of(options.segments.begin(), options.segments.end(),
                                   [&](const SegmentSpec& s) { return s.name == seg_name; });
    if (!known) throw InvalidArgument("payload names unknown segment " + seg_name);
  }
  return ChainModel(std::move(segments),
                    Eigen::Map<const Eigen::VectorXd>(options.torque_limit_nm.data(), n),
                    options.gravity_mps2);
}

ChainModel::ChainModel(std::vector<Segment> segments, Eigen::VectorXd torque_limit_nm,
                       double gravity_mps2)
    : segments_(std::move(segments)),
      torque_limit_(std::move(torque_limit_nm)),
      gravity_(gravity_mps2) {
  if (segments_.empty() || static_cast<int>(segments_.size()) > kNumJoints) {
    throw InvalidArgument("chain must have between 1 and 3 segments");
  }
  if (torque_limit_.size() != num_joints() || (torque_limit_.array() <= 0.0).any()) {
    throw InvalidArgument("torque limits must be positive, one per joint");
  }
  for (const auto& s : segments_) {
    if (!(s.mass_kg > 0.0)) throw InvalidArgument("segment " + s.name + ": non-positive mass");
    if (!(s.inertia_kgm2 >= 0.0)) throw InvalidArgument("segment " + s.name + ": negative inertia");
  }
  Precompute();
}

// Segment i contributes, for every a <= i, a lever of length w_ia at angle
// phi_a + beta_ia: the full segment length (beta = 0) for a < i and the CoM
// distance and bearing for a == i. Collecting them gives
//   M_phi(a,b) = Re(Z_ab e^{j(phi_a - phi_b)}),  V = g sum_a Re(Y_a e^{j phi_a}).
void ChainModel::Precompute() {
  const int n = num_joints();
  tilt_map_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) tilt_map_(i, j) = segments_[j].joint_sign;
  }
  pair_coeff_ = Eigen::MatrixXcd::Zero(n, n);
  gravity_coeff_ = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Segment& s = segments_[i];
    const double com_dist = s.com_m.norm();
    const double com_bearing = std::atan2(s.com_m.x(), s.com_m.y());
    std::vector<std::complex<double>> lever(i + 1);
    for (int a = 0; a < i; ++a) lever[a] = segments_[a].length_m;
    lever[i] = std::polar(com_dist, com_bearing);
    for (int a = 0; a <= i; ++a) {
      gravity_coeff_(a) += s.mass_kg * lever[a];
      for (int b = 0; b <= i; ++b) pair_coeff_(a, b) += s.mass_kg * lever[a] * std::conj(lever[b]);
    }
    pair_coeff_(i, i) += s.inertia_kgm2;
  }
}

ChainModel ChainModel::WithMassScaling(const Eigen::VectorXd& fraction) const {
  if (fraction.size() != num_joints()) {
    throw InvalidArgument("one mass scaling fraction per segment required");
  }
  auto segs = segments_;
  for (int i = 0; i < num_joints(); ++i) {
    const double scale = 1.0 + fraction(i);
    if (!(scale > 0.0)) {
      throw InvalidArgument("mass scaling leaves segment " + segs[i].name + " non-positive");
    }
    segs[i].mass_kg *= scale;
    segs[i].inertia_kgm2 *= scale;
  }
  return ChainModel(std::move(segs), torque_limit_, gravity_);
}

ChainModel ChainModel::WithGravity(double gravity_mps2) const {
  return ChainModel(segments_, torque_limit_, gravity_mps2);
}

ChainModel ChainModel::WithTorqueLimit(const Eigen::VectorXd& limit) const {
  return ChainModel(segments_, limit, gravity_);
}

namespace {

void CheckSize(const ChainModel& model, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != model.num_joints()) {
    throw InvalidArgument(std::string(what) + " has wrong dimension");
  }
}

Eigen::VectorXcd Phasors(const Eigen::VectorXd& phi) {
  Eigen::VectorXcd out(phi.size());
  for (int i = 0; i < phi.size(); ++i) out(i) = std::polar(1.0, phi(i));
  return out;
}

}  // namespace

Eigen::MatrixXd MassMatrix(const ChainModel& model, const Eigen::VectorXd& q) {
  CheckSize(model, q, "q");
  const int n = model.num_joints();
  const Eigen::MatrixXd& S = model.tilt_map();
  const Eigen::MatrixXcd& Z = model.pair_coeff();
  // accumulated in extended precision
  using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const Wide Sw = S.cast<long double>();
  const Eigen::Matrix<long double, Eigen::Dynamic, 1> phi = Sw * q.cast<long double>();
  Wide m_phi(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const long double d = phi(a) - phi(b);
      m_phi(a, b) = static_cast<long double>(Z(a, b).real()) * std::cos(d) -
                    static_cast<long double>(Z(a, b).imag()) * std::sin(d);
    }
  }
  return (Sw.transpose() * m_phi * Sw).cast<double>();
}

// Christoffel symbols of M_phi reduce to C_phi(a,b) = Im(Z_ab e^{j(phi_a-phi_b)}) dphi_b
// for a != b and zero on the diagonal.
Eigen::MatrixXd CoriolisMatrix(const ChainModel& model, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd) {
  CheckSize(model, q, "q");
  CheckSize(model, qd, "qd");
  const int n = model.num_joints();
  const Eigen::MatrixXd& S = model.tilt_map();
  const Eigen::VectorXcd e = Phasors(S * q);
  const Eigen::VectorXd phid = S * qd;
  Eigen::MatrixXd c_phi = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      c_phi(a, b) = std::imag(model.pair_coeff()(a, b) * e(a) * std::conj(e(b))) * phid(b);
    }
  }
  return S.transpose() * c_phi * S;
}

Eigen::VectorXd GravityVector(const ChainModel& model, const Eigen::VectorXd& q) {
  CheckSize(model, q, "q");
  const Eigen::MatrixXd& S = model.tilt_map();
  const Eigen::VectorXcd e = Phasors(S * q);
  Eigen::VectorXd g_phi(model.num_joints());
  for (int a = 0; a < model.num_joints(); ++a) {
    g_phi(a) = -model.gravity() * std::imag(model.gravity_coeff()(a) * e(a));
  }
  return S.transpose() * g_phi;
}

double PotentialEnergy(const ChainModel& model, const Eigen::VectorXd& q) {
  CheckSize(model, q, "q");
  const Eigen::VectorXcd e = Phasors(model.tilt_map() * q);
  double v = 0.0;
  for (int a = 0; a < model.num_joints(); ++a) {
    v += std::real(model.gravity_coeff()(a) * e(a));
  }
  return model.gravity() * v;
}

double KineticEnergy(const ChainModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qd) {
  CheckSize(model, qd, "qd");
  return 0.5 * qd.dot(MassMatrix(model, q) * qd);
}

double TotalEnergy(const ChainModel& model, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& qd) {
  return KineticEnergy(model, q, qd) + PotentialEnergy(model, q);
}

Eigen::VectorXd ForwardDynamics(const ChainModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qd, const Eigen::VectorXd& tau) {
  CheckSize(model, tau, "tau");
  const Eigen::MatrixXd M = MassMatrix(model, q);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw SingularConfiguration("mass matrix is singular or ill-conditioned");
  }
  const Eigen::VectorXd rhs = tau - CoriolisMatrix(model, q, qd) * qd - GravityVector(model, q);
  return M.ldlt().solve(rhs);
}

Eigen::VectorXd InverseDynamics(const ChainModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd) {
  CheckSize(model, qdd, "qdd");
  return MassMatrix(model, q) * qdd + CoriolisMatrix(model, q, qd) * qd +
         GravityVector(model, q);
}

std::vector<Eigen::Vector2d> JointPositions(const ChainModel& model, const Eigen::VectorXd& q) {
  CheckSize(model, q, "q");
  const Eigen::VectorXd phi = model.tilt_map() * q;
  std::vector<Eigen::Vector2d> points{Eigen::Vector2d::Zero()};
  for (int i = 0; i < model.num_joints(); ++i) {
    const double len = model.segments()[i].length_m;
    points.push_back(points.back() + len * Eigen::Vector2d(std::sin(phi(i)), std::cos(phi(i))));
  }
  return points;
}

}  // namespace stsexo
