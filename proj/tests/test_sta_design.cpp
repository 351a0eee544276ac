#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "atomchip/classical_sim.hpp"
#include "atomchip/errors.hpp"
#include "atomchip/sta_design.hpp"

using namespace atomchip;

namespace {

TrajectoryAnsatz synthetic(AnsatzKind kind, double a = 0, double b = 0) {
  TrajectoryAnsatz an;
  an.kind = kind;
  an.z_i = 0.45e-3;
  an.z_f = 1.65e-3;
  an.t_f = 75e-3;
  an.chirp_a = a;
  an.chirp_b = b;
  return an;
}

} // namespace

TEST_CASE("boundary conditions: value fixed, four derivatives vanish") {
  for (auto kind : {AnsatzKind::Polynomial9, AnsatzKind::ChirpedSine}) {
    auto an = synthetic(kind, default_chirp_a, default_chirp_b);
    const double D = an.z_f - an.z_i;
    auto p0 = evaluate_trajectory(an, 0.0);
    auto pf = evaluate_trajectory(an, an.t_f);
    CHECK(p0.z == doctest::Approx(an.z_i).epsilon(1e-12));
    CHECK(pf.z == doctest::Approx(an.z_f).epsilon(1e-12));
    int n = 1;
    for (double* d : {&p0.v, &p0.a, &p0.j, &p0.s}) {
      CHECK(std::abs(*d) < 1e-10 * std::abs(D) / std::pow(an.t_f, n));
      ++n;
    }
    n = 1;
    for (double* d : {&pf.v, &pf.a, &pf.j, &pf.s}) {
      CHECK(std::abs(*d) < 1e-10 * std::abs(D) / std::pow(an.t_f, n));
      ++n;
    }
  }
}

TEST_CASE("polynomial midpoint symmetry") {
  auto an = synthetic(AnsatzKind::Polynomial9);
  auto p = evaluate_trajectory(an, an.t_f / 2);
  CHECK(p.z == doctest::Approx(0.5 * (an.z_i + an.z_f)).epsilon(1e-12));
}

TEST_CASE("chirp with a=b=0 still ends at z_f") {
  auto an = synthetic(AnsatzKind::ChirpedSine, 0.0, 0.0);
  CHECK(evaluate_trajectory(an, an.t_f).z ==
        doctest::Approx(an.z_f).epsilon(1e-12));
}

TEST_CASE("analytic derivatives match finite differences") {
  for (auto kind :
       {AnsatzKind::Polynomial9, AnsatzKind::ChirpedSine, AnsatzKind::Linear}) {
    auto an = synthetic(kind, default_chirp_a, default_chirp_b);
    const double h = 1e-6;
    for (double t : {0.21 * an.t_f, 0.5 * an.t_f, 0.83 * an.t_f}) {
      auto p = evaluate_trajectory(an, t);
      auto zf = [&](double tt) { return evaluate_trajectory(an, tt).z; };
      // 5-point stencils.
      double v = (-zf(t + 2 * h) + 8 * zf(t + h) - 8 * zf(t - h) +
                  zf(t - 2 * h)) /
                 (12 * h);
      const double ha = 1e-5; // wider step: the h^-2 division amplifies noise
      double acc = (-zf(t + 2 * ha) + 16 * zf(t + ha) - 30 * zf(t) +
                    16 * zf(t - ha) - zf(t - 2 * ha)) /
                   (12 * ha * ha);
      double vscale = std::abs(an.z_f - an.z_i) / an.t_f;
      double ascale = vscale / an.t_f;
      CHECK(std::abs(p.v - v) < 1e-7 * vscale);
      if (kind != AnsatzKind::Linear)
        CHECK(std::abs(p.a - acc) < 1e-4 * ascale);
      else
        CHECK(std::abs(p.a) < 1e-12);
    }
  }
}

TEST_CASE("times outside the ramp are rejected") {
  auto an = synthetic(AnsatzKind::Polynomial9);
  CHECK_THROWS_AS(evaluate_trajectory(an, -1e-6), OutOfDomain);
  CHECK_THROWS_AS(evaluate_trajectory(an, an.t_f + 1e-6), OutOfDomain);
  TrajectoryAnsatz bad = an;
  bad.t_f = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = an;
  bad.z_f = bad.z_i;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("preset ramp: bias endpoints and Newton residual") {
  const auto& s = testfix::preset75();
  CHECK(s.bias.front() == doctest::Approx(21.5e-4).epsilon(1e-3));
  CHECK(s.bias.back() == doctest::Approx(4.5e-4).epsilon(1e-3));
  CHECK(s.z_t.front() ==
        doctest::Approx(testfix::preset_ansatz().z_i).epsilon(1e-9));
  CHECK(s.z_t.back() ==
        doctest::Approx(testfix::preset_ansatz().z_f).epsilon(1e-6));

  // Newton residual of the schedule on its own grid.
  auto an = testfix::preset_ansatz();
  double amax = 0;
  for (size_t i = 0; i < s.size(); ++i)
    amax = std::max(amax, std::abs(evaluate_trajectory(an, s.times[i]).a));
  for (size_t i = 0; i < s.size(); i += 7) {
    auto p = evaluate_trajectory(an, s.times[i]);
    double resid = p.a + s.omega_z[i] * s.omega_z[i] * (p.z - s.z_t[i]);
    CHECK(std::abs(resid) < 1e-6 * amax);
  }

  // Root continuity along the schedule.
  double vmax = 0;
  for (size_t i = 1; i < s.size(); ++i)
    vmax = std::max(vmax, std::abs(s.z_t[i] - s.z_t[i - 1]) / s.dt());
  for (size_t i = 1; i < s.size(); ++i)
    CHECK(std::abs(s.z_t[i] - s.z_t[i - 1]) < 5 * vmax * s.dt() + 1e-15);
}

TEST_CASE("chi criterion for the preset and the unchirped variant") {
  const auto& tab = testfix::tables();
  auto chirped = chi_profile(testfix::preset75(), tab.L3_of_zt);
  CHECK(chirped.second == doctest::Approx(0.03).epsilon(1.0 / 3.0));

  auto an0 = testfix::preset_ansatz();
  an0.chirp_a = an0.chirp_b = 0.0;
  auto plain = design_ramp(an0, tab, 7501);
  auto unchirped = chi_profile(plain, tab.L3_of_zt);
  CHECK(unchirped.second == doctest::Approx(0.09).epsilon(2.0 / 9.0));
  CHECK(chirped.second < unchirped.second);
}

TEST_CASE("round trip: integrating the schedule reproduces the ansatz") {
  const auto& s = testfix::preset75();
  auto res = integrate(s, TrapModel::Harmonic, 0.0);
  auto an = testfix::preset_ansatz();
  CHECK(std::abs(res.trajectory.back().z - an.z_f) < 10e-9);
}

TEST_CASE("linear ansatz moves the trap linearly (no STA inversion)") {
  auto an = synthetic(AnsatzKind::Linear);
  auto s = design_ramp(an, testfix::tables(), 751);
  for (size_t i = 0; i < s.size(); i += 50) {
    double frac = s.times[i] / an.t_f;
    CHECK(s.z_t[i] ==
          doctest::Approx(an.z_i + frac * (an.z_f - an.z_i)).epsilon(1e-9));
  }
}

TEST_CASE("chirp optimizer finds the preset region") {
  auto an = testfix::preset_ansatz();
  auto [a, b] = optimize_chirp(an, testfix::tables(), 751, -2.0, -0.8, 0.3,
                               1.2, 7);
  // Coarse grid: just require improvement over no chirp and sane location.
  an.chirp_a = a;
  an.chirp_b = b;
  auto best = chi_profile(design_ramp(an, testfix::tables(), 751),
                          testfix::tables().L3_of_zt);
  an.chirp_a = an.chirp_b = 0.0;
  auto none = chi_profile(design_ramp(an, testfix::tables(), 751),
                          testfix::tables().L3_of_zt);
  CHECK(best.second < none.second);
}
