#include "spectro/spin_anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spectro/constants.hpp"
#include "spectro/errors.hpp"

namespace spectro {

namespace {

constexpr double kDeg = M_PI / 180.0;

// Crystal-to-lab rotation for a (111)-oriented film. Lab x maps to the
// crystal in-plane direction at angle theta_reg from e1=[2,-1,-1]/sqrt(6)
// toward e2=[0,1,-1]/sqrt(2); lab z is the film normal [1,1,1]/sqrt(3).
Eigen::Matrix3d crystal_to_lab(double theta_reg_deg) {
  const Eigen::Vector3d e1 = Eigen::Vector3d(2, -1, -1).normalized();
  const Eigen::Vector3d e2 = Eigen::Vector3d(0, 1, -1).normalized();
  const Eigen::Vector3d zf = Eigen::Vector3d(1, 1, 1).normalized();
  const double r = theta_reg_deg * kDeg;
  Eigen::Matrix3d R;
  R.row(0) = (std::cos(r) * e1 + std::sin(r) * e2).transpose();
  R.row(1) = (-std::sin(r) * e1 + std::cos(r) * e2).transpose();
  R.row(2) = zf.transpose();
  return R;
}

}  // namespace

GTensor GTensor::from_matrix(const Eigen::Matrix3d& m) {
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("GTensor: matrix is not symmetric within 1e-12 relative");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  if (es.eigenvalues().minCoeff() < -1e-12 * scale)
    throw ValidationError("GTensor: negative eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()));
  GTensor g;
  g.m = 0.5 * (m + m.transpose());
  return g;
}

GTensor GTensor::isotropic(double g) {
  return from_matrix(g * Eigen::Matrix3d::Identity());
}

GTensor GTensor::axial(double g_perp, double g_par, const Eigen::Vector3d& axis) {
  const Eigen::Vector3d a = axis.normalized();
  return from_matrix(g_perp * Eigen::Matrix3d::Identity() +
                     (g_par - g_perp) * a * a.transpose());
}

GTensor GTensor::principal(double g1, double g2, double g3, const Eigen::Matrix3d& R) {
  Eigen::Vector3d d(g1, g2, g3);
  return from_matrix(R * d.asDiagonal() * R.transpose());
}

void SubSiteOrbit::validate() const {
  const size_t want = (label == SiteLabel::C2) ? 6 : 4;
  if (members.size() != want)
    throw ValidationError("SubSiteOrbit: expected " + std::to_string(want) +
                          " members, got " + std::to_string(members.size()));
  // all members share one eigenvalue set
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es0(members.front().tensor.m);
  const Eigen::Vector3d ref = es0.eigenvalues();
  const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-300);
  for (const auto& s : members) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s.tensor.m);
    if ((es.eigenvalues() - ref).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw ValidationError("SubSiteOrbit: member " + s.id +
                            " has a different eigenvalue set");
  }
}

SubSiteOrbit SubSiteOrbit::c2(double g1, double g2, double g3, double psi_deg,
                              double theta_reg_deg) {
  const Eigen::Matrix3d R = crystal_to_lab(theta_reg_deg);
  // canonical transverse frames (u0, v0, axis), cyclic over the cube axes
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  const int frames[3][3] = {{1, 2, 0}, {2, 0, 1}, {0, 1, 2}};
  const char* axis_name[3] = {"x", "y", "z"};
  SubSiteOrbit orbit;
  orbit.label = SiteLabel::C2;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d u0 = I.col(frames[k][0]);
    const Eigen::Vector3d v0 = I.col(frames[k][1]);
    const Eigen::Vector3d a = I.col(frames[k][2]);
    for (int j = 0; j < 2; ++j) {
      const double psi = (psi_deg + 90.0 * j) * kDeg;
      const Eigen::Vector3d u = std::cos(psi) * u0 + std::sin(psi) * v0;
      const Eigen::Vector3d v = -std::sin(psi) * u0 + std::cos(psi) * v0;
      Eigen::Matrix3d P;
      P.col(0) = u;
      P.col(1) = v;
      P.col(2) = a;
      GTensor t = GTensor::principal(g1, g2, g3, P);
      t.m = R * t.m * R.transpose();  // lab frame
      orbit.members.push_back(
          {std::string("c2_") + axis_name[frames[k][2]] + (j == 0 ? "_a" : "_b"), t});
    }
  }
  orbit.validate();
  return orbit;
}

SubSiteOrbit SubSiteOrbit::c3i(double g_perp, double g_par, double theta_reg_deg) {
  const Eigen::Matrix3d R = crystal_to_lab(theta_reg_deg);
  const double axes[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const char* names[4] = {"c3i_ppp", "c3i_pmm", "c3i_mpm", "c3i_mmp"};
  SubSiteOrbit orbit;
  orbit.label = SiteLabel::C3i;
  for (int k = 0; k < 4; ++k) {
    GTensor t = GTensor::axial(g_perp, g_par,
                               Eigen::Vector3d(axes[k][0], axes[k][1], axes[k][2]));
    t.m = R * t.m * R.transpose();
    orbit.members.push_back({names[k], t});
  }
  orbit.validate();
  return orbit;
}

// Calibrated defaults, matching data/reference_params.ini [spin].
SubSiteOrbit SubSiteOrbit::c2_default() {
  return c2(3.6, 3.6, 11.61722859, 45.0, 50.0);
}

SubSiteOrbit SubSiteOrbit::c3i_default() { return c3i(3.2, 12.0, 50.0); }

void FieldConfig::validate() const {
  if (magnitude_T < 0) throw ValidationError("FieldConfig: magnitude must be >= 0");
}

double FieldConfig::normalize_theta(double theta_deg) {
  double t = std::fmod(theta_deg, 360.0);
  if (t < 0) t += 360.0;
  return t;
}

double effective_g(const GTensor& tensor, const Eigen::Vector3d& direction) {
  if (std::abs(direction.norm() - 1.0) > 1e-9)
    throw ValidationError(
        "effective_g: direction must be unit length (|n| = " +
        std::to_string(direction.norm()) + "); normalize it first");
  // n^T g g^T n = |g n|^2 for symmetric g
  return (tensor.m * direction).norm();
}

double resonance_field(double g_eff, double f_mw_hz) {
  if (g_eff <= 0) throw ValidationError("resonance_field: g_eff must be > 0");
  if (f_mw_hz <= 0) throw ValidationError("resonance_field: f_mw must be > 0");
  return constants::h * f_mw_hz / (g_eff * constants::mu_B);
}

double tilt_offset_deg(double theta_deg, const TiltParams& tilt) {
  const double x = (theta_deg + tilt.theta0_deg) * kDeg;
  const double t = std::tan(tilt.dphi1_deg * kDeg) * std::cos(x) +
                   std::tan(tilt.dphi2_deg * kDeg) * std::sin(x);
  return tilt.sign * std::atan(t) / kDeg;
}

Eigen::Vector3d field_direction(double theta_deg, const TiltParams& tilt) {
  const double th = theta_deg * kDeg;
  const double dp = tilt_offset_deg(theta_deg, tilt) * kDeg;
  const Eigen::Vector3d in_plane(std::cos(th), std::sin(th), 0.0);
  return std::cos(dp) * in_plane + std::sin(dp) * Eigen::Vector3d::UnitZ();
}

std::vector<AngleMapRow> angle_map(const SubSiteOrbit& orbit, double f_mw_hz,
                                   const std::vector<double>& theta_grid_deg,
                                   const TiltParams& tilt) {
  if (orbit.members.empty()) throw ValidationError("angle_map: empty orbit");
  orbit.validate();
  if (theta_grid_deg.empty())
    throw ValidationError("angle_map: theta grid must be non-empty");
  std::vector<AngleMapRow> rows;
  rows.reserve(theta_grid_deg.size() * orbit.members.size());
  for (double th : theta_grid_deg) {
    const Eigen::Vector3d n = field_direction(th, tilt);
    for (const auto& s : orbit.members)
      rows.push_back({th, s.id, resonance_field(effective_g(s.tensor, n), f_mw_hz)});
  }
  std::sort(rows.begin(), rows.end(), [](const AngleMapRow& a, const AngleMapRow& b) {
    if (a.theta_deg != b.theta_deg) return a.theta_deg < b.theta_deg;
    return a.sub_site_id < b.sub_site_id;
  });
  return rows;
}

StrainEval strain_linewidth(double theta_deg, const StrainLinewidthModel& model) {
  const double c = std::cos(theta_deg * kDeg), s = std::sin(theta_deg * kDeg);
  return {model.a * c * c + 2.0 * model.b * c * s + model.c * s * s,
          model.ap * c * c + 2.0 * model.bp * c * s + model.cp * s * s};
}

double delta_g_from_delta_B(double g, double delta_B_T, double B_res_T) {
  if (B_res_T <= 0) throw ValidationError("delta_g_from_delta_B: B_res must be > 0");
  return g * delta_B_T / B_res_T;
}

}  // namespace spectro
