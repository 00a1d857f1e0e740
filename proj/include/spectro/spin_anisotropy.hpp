#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

// Effective g-factors, resonance fields, sub-site orbit angle maps, and
// strain-model linewidth anisotropy for Kramers-doublet spins under an
// in-plane field with tilt misalignment.
//
// Angles are degrees at API boundaries, radians internally.
namespace spectro {

// 3x3 symmetric, dimensionless g-tensor.
struct GTensor {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  // Validates symmetry (1e-12 relative) and eigenvalues >= 0.
  static GTensor from_matrix(const Eigen::Matrix3d& m);
  static GTensor isotropic(double g);
  // axial tensor: g_perp transverse to `axis`, g_par along it
  static GTensor axial(double g_perp, double g_par, const Eigen::Vector3d& axis);
  // principal values g1,g2,g3 along the columns of rotation R
  static GTensor principal(double g1, double g2, double g3, const Eigen::Matrix3d& R);
};

struct SubSite {
  std::string id;
  GTensor tensor;
};

enum class SiteLabel { C2, C3i };

// Symmetry-equivalent sub-site set. C2 has 6 members (cubic <100> axes, two
// transverse azimuths each); C3i has 4 (the <111> axis family). Tensors are
// stored in the lab frame (z = film normal, x = theta=0 field direction), so
// the crystal-to-lab registration is baked in at construction.
struct SubSiteOrbit {
  SiteLabel label = SiteLabel::C2;
  std::vector<SubSite> members;

  // Throws unless the member count matches the label (6 for C2, 4 for C3i)
  // and all members share one eigenvalue set (1e-9 relative).
  void validate() const;

  // C2 orbit from principal values and transverse azimuth psi; each <100>
  // axis contributes members at psi and psi+90 deg. theta_reg_deg maps the
  // lab x axis onto the crystal in-plane angle chi = theta + theta_reg
  // measured from [2,-1,-1]/sqrt(6) toward [0,1,-1]/sqrt(2) in the (111)
  // film plane.
  static SubSiteOrbit c2(double g1, double g2, double g3, double psi_deg,
                         double theta_reg_deg);
  // C3i orbit: axial tensors about the four <111> axes.
  static SubSiteOrbit c3i(double g_perp, double g_par, double theta_reg_deg);

  // Shipped defaults are calibrated synthetics, not literature values: they
  // reproduce the reference effective g patterns (C2: {3.6 x2, ~8.6 x4} at
  // theta=40 deg; C3i in-plane 3.2). See data/reference_params.ini.
  static SubSiteOrbit c2_default();
  static SubSiteOrbit c3i_default();
};

// delta_phi(theta) misalignment model parameters, degrees.
struct TiltParams {
  double dphi1_deg = 0.0;
  double dphi2_deg = 0.0;
  double theta0_deg = 0.0;
  // rotation sense of the out-of-plane tilt; the model itself does not fix it
  double sign = 1.0;
};

struct FieldConfig {
  double magnitude_T = 0.0;
  double theta_deg = 0.0;  // in-plane angle, normalized to [0,360)
  TiltParams tilt;

  void validate() const;  // magnitude >= 0
  static double normalize_theta(double theta_deg);
};

// sqrt(n^T g g^T n). `direction` must be unit length within 1e-9.
double effective_g(const GTensor& tensor, const Eigen::Vector3d& direction);

// B0 = h f / (g_eff mu_B), tesla.
double resonance_field(double g_eff, double f_mw_hz);

// delta_phi(theta) = atan(tan(dphi1) cos(theta+theta0) + tan(dphi2) sin(theta+theta0))
double tilt_offset_deg(double theta_deg, const TiltParams& tilt);

// Unit field direction in the lab frame: the in-plane direction at theta
// rotated out of plane by tilt_offset (toward +z for tilt.sign=+1).
Eigen::Vector3d field_direction(double theta_deg, const TiltParams& tilt);

struct AngleMapRow {
  double theta_deg;
  std::string sub_site_id;
  double b_res_T;
};

// Resonance field per sub-site over a theta grid; sorted by (theta, id).
std::vector<AngleMapRow> angle_map(const SubSiteOrbit& orbit, double f_mw_hz,
                                   const std::vector<double>& theta_grid_deg,
                                   const TiltParams& tilt);

// Quadratic-form coefficients for g^2(theta) and g*delta_g(theta):
//   g^2 = a cos^2 + 2 b cos sin + c sin^2   (likewise primed for g dg)
struct StrainLinewidthModel {
  double a = 1, b = 0, c = 1;
  double ap = 0, bp = 0, cp = 0;
};

struct StrainEval {
  double g_squared;
  double g_delta_g;
};

StrainEval strain_linewidth(double theta_deg, const StrainLinewidthModel& model);

// delta_g = g * delta_B / B_res
double delta_g_from_delta_B(double g, double delta_B_T, double B_res_T);

}  // namespace spectro
