#pragma once

#include <array>
#include <complex>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stsexo {

/// Joint indices, ordered from the grounded foot upward.
enum class Joint { kAnkle = 0, kKnee = 1, kHip = 2 };
inline constexpr int kNumJoints = 3;
/// Order used in every report and file: hip, knee, ankle.
inline constexpr std::array<Joint, 3> kReportOrder = {Joint::kHip, Joint::kKnee,
                                                      Joint::kAnkle};
const char* JointName(Joint joint);
inline int Index(Joint joint) { return static_cast<int>(joint); }

/// One rigid link of the exoskeleton as listed in the CAD link table.
///
/// The CoM offset is expressed in the sagittal plane of the link frame,
/// measured from the proximal joint: x is anterior, y runs along the link.
struct LinkParam {
  std::string name;
  double length_m = 0.0;
  double mass_kg = 0.0;
  Eigen::Vector2d com_offset_m = Eigen::Vector2d::Zero();
  double inertia_zz_kgm2 = 0.0;

  /// Throws InvalidArgument when mass, length, inertia or CoM are out of range.
  void Validate() const;
};

/// Reads a link table with header `name,length_mm,mass_kg,com_x_m,com_y_m,com_z_m`.
/// A length of `---` (or 0) marks a connector, which is treated as a point
/// mass; other links get the slender-rod inertia m L^2 / 12. The z (medio-
/// lateral) component is dropped.
std::vector<LinkParam> LoadLinkTableCsv(std::istream& in);
std::vector<LinkParam> LoadLinkTableCsv(const std::string& path);

/// The nine links of the reference exoskeleton (Al 6061-T6 CAD assembly).
std::vector<LinkParam> ReferenceLinkTable();

/// A rigid body attached to a segment, e.g. the user's limb: mass, CoM
/// offset in the segment frame and centroidal inertia.
struct Payload {
  double mass_kg = 0.0;
  Eigen::Vector2d offset_m = Eigen::Vector2d::Zero();
  double inertia_kgm2 = 0.0;
};

/// Which table links make up one chain segment, and the sign relating the
/// flexion-positive joint angle at the segment's proximal joint to the
/// segment's absolute tilt.
struct SegmentSpec {
  std::string name;
  std::vector<std::string> links;
  int joint_sign = 1;
};

struct ChainBuildOptions {
  std::vector<SegmentSpec> segments;
  /// Table links deliberately left out of the chain (the grounded foot).
  std::vector<std::string> excluded_links;
  std::map<std::string, Payload> payload;
  std::vector<double> torque_limit_nm;
  double gravity_mps2 = 9.81;
  /// Accept chains with fewer than three segments (used by tests).
  bool allow_reduced = false;

  /// shank <- {L6, L7, L8}, thigh <- {L4, L5}, trunk <- {L1, L2, L3}; L9 is
  /// the base. Signs map ankle dorsiflexion, knee flexion and hip flexion
  /// onto absolute segment tilt.
  static ChainBuildOptions Defaults();
};

/// Aggregated rigid segment of the planar chain.
struct Segment {
  std::string name;
  double length_m = 0.0;
  double mass_kg = 0.0;
  Eigen::Vector2d com_m = Eigen::Vector2d::Zero();
  double inertia_kgm2 = 0.0;  // about the segment CoM
  int joint_sign = 1;
  std::vector<std::string> constituents;
};

/// Fixed-base planar serial chain. Immutable once built.
///
/// Joint angles are flexion-positive and zero at upright stance. Internally
/// the dynamics are evaluated in absolute segment tilts phi = S q, where S is
/// the constant lower-triangular matrix of joint signs, and mapped back with
/// M_q = S^T M_phi S, C_q = S^T C_phi S, G_q = S^T G_phi.
class ChainModel {
 public:
  ChainModel(std::vector<Segment> segments, Eigen::VectorXd torque_limit_nm,
             double gravity_mps2);

  int num_joints() const { return static_cast<int>(segments_.size()); }
  const std::vector<Segment>& segments() const { return segments_; }
  const Eigen::VectorXd& torque_limit() const { return torque_limit_; }
  double gravity() const { return gravity_; }
  const Eigen::MatrixXd& tilt_map() const { return tilt_map_; }

  /// Copy with every segment mass and inertia scaled by (1 + fraction[i]).
  ChainModel WithMassScaling(const Eigen::VectorXd& fraction) const;
  ChainModel WithGravity(double gravity_mps2) const;
  ChainModel WithTorqueLimit(const Eigen::VectorXd& limit) const;

  // Per-pair complex coefficients of the closed-form dynamics; see .cpp.
  const Eigen::MatrixXcd& pair_coeff() const { return pair_coeff_; }
  const Eigen::VectorXcd& gravity_coeff() const { return gravity_coeff_; }

 private:
  void Precompute();

  std::vector<Segment> segments_;
  Eigen::VectorXd torque_limit_;
  double gravity_;
  Eigen::MatrixXd tilt_map_;
  Eigen::MatrixXcd pair_coeff_;
  Eigen::VectorXcd gravity_coeff_;
};

/// Aggregates table links into segments (parallel-axis theorem for inertia)
/// and attaches the payloads.
ChainModel BuildChain(const std::vector<LinkParam>& link_table,
                      const ChainBuildOptions& options);

struct JointState {
  Eigen::VectorXd q;   // rad
  Eigen::VectorXd qd;  // rad/s

  bool IsFinite() const { return q.allFinite() && qd.allFinite(); }
};

Eigen::MatrixXd MassMatrix(const ChainModel& model, const Eigen::VectorXd& q);
Eigen::MatrixXd CoriolisMatrix(const ChainModel& model, const Eigen::VectorXd& q,
                               const Eigen::VectorXd& qd);
Eigen::VectorXd GravityVector(const ChainModel& model, const Eigen::VectorXd& q);
double PotentialEnergy(const ChainModel& model, const Eigen::VectorXd& q);
double KineticEnergy(const ChainModel& model, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& qd);
double TotalEnergy(const ChainModel& model, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& qd);

/// Solves M qdd = tau - C qd - G. Throws SingularConfiguration when the
/// condition number of M exceeds 1e12.
Eigen::VectorXd ForwardDynamics(const ChainModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qd, const Eigen::VectorXd& tau);

Eigen::VectorXd InverseDynamics(const ChainModel& model, const Eigen::VectorXd& q,
                                const Eigen::VectorXd& qd, const Eigen::VectorXd& qdd);

/// Sagittal positions of the base joint, every subsequent joint and the tip
/// of the last segment (num_joints + 1 points).
std::vector<Eigen::Vector2d> JointPositions(const ChainModel& model,
                                            const Eigen::VectorXd& q);

}  // namespace stsexo
