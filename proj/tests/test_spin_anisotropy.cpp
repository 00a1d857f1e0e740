#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "spectro/errors.hpp"
#include "spectro/spin_anisotropy.hpp"

#include "oracles.hpp"

using namespace spectro;

namespace {
std::vector<double> sorted_orbit_g(const SubSiteOrbit& orbit, double theta_deg,
                                   const TiltParams& tilt) {
  std::vector<double> g;
  const Eigen::Vector3d n = field_direction(theta_deg, tilt);
  for (const auto& m : orbit.members) g.push_back(effective_g(m.tensor, n));
  std::sort(g.begin(), g.end());
  return g;
}

TiltParams reference_tilt() { return {2.8, 0.2, 30.0, 1.0}; }
}  // namespace

TEST_CASE("isotropic tensor gives the same g in every direction") {
  const GTensor g = GTensor::isotropic(3.2);
  CHECK_REL(effective_g(g, Eigen::Vector3d::UnitX()), 3.2, 1e-12);
  CHECK_REL(effective_g(g, Eigen::Vector3d(1, 1, 1).normalized()), 3.2, 1e-12);
  CHECK_REL(effective_g(g, Eigen::Vector3d(-0.3, 0.5, 2).normalized()), 3.2, 1e-12);
}

TEST_CASE("diagonal tensor along the body diagonal") {
  // |diag(2,4,6) n| for n = (1,1,1)/sqrt(3) is sqrt((4+16+36)/3)
  const GTensor g = GTensor::principal(2, 4, 6, Eigen::Matrix3d::Identity());
  CHECK_REL(effective_g(g, Eigen::Vector3d(1, 1, 1).normalized()),
            4.320493799, 1e-9);
}

TEST_CASE("axial tensor along and across its symmetry axis") {
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, -1).normalized();
  const GTensor g = GTensor::axial(3.2, 12.0, axis);
  CHECK_REL(effective_g(g, axis), 12.0, 1e-12);
  const Eigen::Vector3d perp = axis.cross(Eigen::Vector3d::UnitZ()).normalized();
  CHECK_REL(effective_g(g, perp), 3.2, 1e-12);
}

TEST_CASE("tensor construction rejects bad input") {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(GTensor::from_matrix(m), ValidationError);
  CHECK_THROWS_AS(GTensor::from_matrix(-2.0 * Eigen::Matrix3d::Identity()),
                  ValidationError);
  CHECK_THROWS_AS(effective_g(GTensor::isotropic(2), Eigen::Vector3d(1, 1, 0)),
                  ValidationError);  // not unit length
}

TEST_CASE("resonance field matches h f / (g muB)") {
  const double f = 5.81e9;
  CHECK_REL(resonance_field(3.2, f), 0.129722294, 1e-9);
  CHECK_REL(resonance_field(3.6, f), 0.1153087057, 1e-9);
  CHECK_REL(resonance_field(2.0, f), 0.2075556703, 1e-9);
  CHECK_REL(resonance_field(8.6, f), 0.04826876055, 1e-9);
  // g * B is fixed at fixed frequency
  CHECK_REL(3.2 * resonance_field(3.2, f), 8.6 * resonance_field(8.6, f), 1e-12);
  CHECK_THROWS_AS(resonance_field(0.0, f), ValidationError);
  CHECK_THROWS_AS(resonance_field(2.0, -1.0), ValidationError);
}

TEST_CASE("out-of-plane tilt harmonic model") {
  const TiltParams tilt = reference_tilt();
  // at theta = 15 deg the harmonic argument is 45 deg
  CHECK_REL(tilt_offset_deg(15.0, tilt), 2.121927905, 1e-9);
  CHECK_REL(tilt_offset_deg(15.0 + 360.0, tilt), 2.121927905, 1e-9);
  CHECK_REL(tilt_offset_deg(-30.0, tilt), 2.8, 1e-12);  // argument 0: pure first harmonic
  TiltParams flipped = tilt;
  flipped.sign = -1.0;
  CHECK_REL(tilt_offset_deg(15.0, flipped), -2.121927905, 1e-9);
  CHECK(tilt_offset_deg(10.0, TiltParams{}) == 0.0);
}

TEST_CASE("field direction is a unit vector with the tilt out of plane") {
  const TiltParams tilt = reference_tilt();
  for (double th : {0.0, 10.0, 40.0, 123.0, 350.0}) {
    const Eigen::Vector3d n = field_direction(th, tilt);
    CHECK_REL(n.norm(), 1.0, 1e-12);
    CHECK_REL(n.z(), std::sin(tilt_offset_deg(th, tilt) * M_PI / 180.0), 1e-12);
  }
  const Eigen::Vector3d flat = field_direction(90.0, TiltParams{});
  CHECK_REL(flat.y(), 1.0, 1e-12);
  CHECK(std::abs(flat.x()) < 1e-12);
  CHECK(flat.z() == 0.0);
}

TEST_CASE("low-symmetry orbit: six members, frozen effective g sets") {
  const SubSiteOrbit orbit = SubSiteOrbit::c2_default();
  REQUIRE(orbit.members.size() == 6);
  const TiltParams tilt = reference_tilt();
  const auto g40 = sorted_orbit_g(orbit, 40.0, tilt);
  const double want40[6] = {3.602259, 3.602259, 8.482903, 8.482903, 8.714591, 8.714591};
  for (int i = 0; i < 6; ++i) CHECK_REL(g40[i], want40[i], 5e-6);
  const auto g10 = sorted_orbit_g(orbit, 10.0, tilt);
  const double want10[6] = {5.967035, 5.967035, 5.967035, 5.967035, 9.469371, 9.469371};
  for (int i = 0; i < 6; ++i) CHECK_REL(g10[i], want10[i], 5e-6);
}

TEST_CASE("trigonal orbit: four members, frozen effective g sets") {
  const SubSiteOrbit orbit = SubSiteOrbit::c3i_default();
  REQUIRE(orbit.members.size() == 4);
  const TiltParams tilt = reference_tilt();
  const auto g40 = sorted_orbit_g(orbit, 40.0, tilt);
  const double want40[4] = {3.200929, 3.208352, 9.895829, 10.041901};
  for (int i = 0; i < 4; ++i) CHECK_REL(g40[i], want40[i], 5e-6);
  const auto g10 = sorted_orbit_g(orbit, 10.0, tilt);
  const double want10[4] = {3.232737, 6.186632, 6.186632, 11.502489};
  for (int i = 0; i < 4; ++i) CHECK_REL(g10[i], want10[i], 5e-6);
}

TEST_CASE("film-normal trigonal member is angle-independent without tilt") {
  // the member whose symmetry axis is the film normal sees only g_perp in plane
  const SubSiteOrbit orbit = SubSiteOrbit::c3i_default();
  for (double th = 0.0; th < 360.0; th += 7.0)
    CHECK_REL(effective_g(orbit.members[0].tensor, field_direction(th, TiltParams{})),
              3.2, 1e-12);
}

TEST_CASE("orbit validation requires one shared eigenvalue set") {
  SubSiteOrbit orbit = SubSiteOrbit::c3i_default();
  orbit.members[2].tensor = GTensor::isotropic(5.0);
  CHECK_THROWS_AS(orbit.validate(), ValidationError);
}

TEST_CASE("angle map is sorted and consistent with the pointwise operations") {
  const SubSiteOrbit orbit = SubSiteOrbit::c3i_default();
  const TiltParams tilt = reference_tilt();
  const std::vector<double> grid{120.0, 0.0, 40.0};  // deliberately unsorted
  const auto rows = angle_map(orbit, 5.81e9, grid, tilt);
  REQUIRE(rows.size() == grid.size() * orbit.members.size());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered = rows[i - 1].theta_deg < rows[i].theta_deg ||
                         (rows[i - 1].theta_deg == rows[i].theta_deg &&
                          rows[i - 1].sub_site_id < rows[i].sub_site_id);
    CHECK(ordered);
  }
  for (const auto& r : rows) {
    const auto it = std::find_if(orbit.members.begin(), orbit.members.end(),
                                 [&](const SubSite& s) { return s.id == r.sub_site_id; });
    REQUIRE(it != orbit.members.end());
    const double g = effective_g(it->tensor, field_direction(r.theta_deg, tilt));
    CHECK_REL(r.b_res_T, resonance_field(g, 5.81e9), 1e-12);
  }
}

TEST_CASE("strain linewidth quadratic form hits its axes") {
  const StrainLinewidthModel m{10.0, 1.5, 4.0, 0.3, -0.1, 0.8};
  CHECK_REL(strain_linewidth(0.0, m).g_squared, 10.0, 1e-12);
  CHECK_REL(strain_linewidth(0.0, m).g_delta_g, 0.3, 1e-12);
  CHECK_REL(strain_linewidth(90.0, m).g_squared, 4.0, 1e-12);
  CHECK_REL(strain_linewidth(90.0, m).g_delta_g, 0.8, 1e-12);
  // at 45 deg the cross term contributes fully
  CHECK_REL(strain_linewidth(45.0, m).g_squared, 0.5 * (10.0 + 4.0) + 1.5, 1e-12);
}

TEST_CASE("line shift from a field offset") {
  CHECK_REL(delta_g_from_delta_B(3.2, 1e-3, 0.13), 0.02461538462, 1e-9);
  CHECK_REL(delta_g_from_delta_B(3.2, 2e-3, 0.13),
            2.0 * delta_g_from_delta_B(3.2, 1e-3, 0.13), 1e-12);
  CHECK_THROWS_AS(delta_g_from_delta_B(3.2, 1e-3, 0.0), ValidationError);
}
