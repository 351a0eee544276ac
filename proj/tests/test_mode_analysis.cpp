#include <cmath>
#include <vector>

#include "doctest.h"

#include "atomchip/errors.hpp"
#include "atomchip/mode_analysis.hpp"

using namespace atomchip;

namespace {

std::vector<double> grid(double duration, double rate) {
  std::vector<double> t;
  for (double x = 0; x < duration; x += 1.0 / rate) t.push_back(x);
  return t;
}

std::vector<double> tone(const std::vector<double>& t, double f, double amp,
                         double offset = 0.0) {
  std::vector<double> v;
  for (double x : t) v.push_back(offset + amp * std::sin(2 * M_PI * f * x));
  return v;
}

} // namespace

TEST_CASE("mode table at eta = 1") {
  auto m = mode_frequencies(1.0, 2 * M_PI * 10.0);
  double wp = 2 * M_PI * 10.0;
  CHECK(m[Mode::Q1] == doctest::Approx(std::sqrt(5.0) * wp).epsilon(1e-12));
  CHECK(m[Mode::M] == doctest::Approx(std::sqrt(2.0) * wp).epsilon(1e-12));
  CHECK(m[Mode::Sc_xy] == doctest::Approx(std::sqrt(2.0) * wp).epsilon(1e-12));
  CHECK(m[Mode::Q2] == doctest::Approx(std::sqrt(2.0) * wp).epsilon(1e-12));
  CHECK(m[Mode::D_perp] == doctest::Approx(wp).epsilon(1e-12));
  CHECK(m[Mode::D_x] == doctest::Approx(wp).epsilon(1e-12));
}

TEST_CASE("mode table at eta = 0.25") {
  auto m = mode_frequencies(0.25, 1.0);
  CHECK(m[Mode::Q1] == doctest::Approx(2.0081).epsilon(1e-4));
  CHECK(m[Mode::M] == doctest::Approx(0.3937).epsilon(1e-4));
  CHECK(m[Mode::Sc_xy] == doctest::Approx(1.0308).epsilon(1e-4));
  CHECK(m[Mode::Q2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(m[Mode::D_x] == doctest::Approx(0.25).epsilon(1e-12));

  // Small-eta expansion of the minus branch: sqrt(5/2) eta omega_perp.
  auto ms = mode_frequencies(0.01, 1.0);
  CHECK(ms[Mode::M] ==
        doctest::Approx(std::sqrt(2.5) * 0.01).epsilon(1e-3));
}

TEST_CASE("branch ordering and discriminant positivity") {
  for (double eta = 0.05; eta <= 2.0; eta += 0.05) {
    auto m = mode_frequencies(eta, 1.0);
    CHECK(m[Mode::Q1] >= m[Mode::M]);
    CHECK(std::isfinite(m[Mode::Q1]));
    CHECK(9 * std::pow(eta, 4) - 16 * eta * eta + 16 > 0.0);
  }

  // Construction from trap frequencies: omega_perp is the (y, z) mean.
  Vec3 w{2 * M_PI * 12.5, 2 * M_PI * 50.0, 2 * M_PI * 49.5};
  auto m = mode_frequencies(w);
  CHECK(m.omega_perp == doctest::Approx(0.5 * (w[1] + w[2])).epsilon(1e-14));
  CHECK(m.eta == doctest::Approx(w[0] / m.omega_perp).epsilon(1e-14));
}

TEST_CASE("pure sinusoid yields one peak at the tone") {
  auto t = grid(1.0, 2000.0);
  auto spectrum = analyze_series(t, tone(t, 50.0, 1e-6, 5e-6), 1e-2);
  REQUIRE(!spectrum.peaks.empty());
  CHECK(spectrum.peaks[0].frequency ==
        doctest::Approx(50.0).epsilon(5e-3));
  CHECK(spectrum.peaks.size() == 1); // windowed sidelobes are not peaks
  CHECK(std::abs(spectrum.parseval_residual) < 1e-9);
}

TEST_CASE("two tones resolved and prominence filtered") {
  auto t = grid(2.0, 1000.0);
  auto v = tone(t, 30.0, 1e-6);
  auto v2 = tone(t, 80.0, 2e-7);
  for (size_t i = 0; i < v.size(); ++i) v[i] += v2[i];
  auto spectrum = analyze_series(t, v, 1e-2);
  REQUIRE(spectrum.peaks.size() == 2);
  CHECK(spectrum.peaks[0].frequency == doctest::Approx(30.0).epsilon(1e-3));
  CHECK(spectrum.peaks[1].frequency == doctest::Approx(80.0).epsilon(1e-3));

  // Raising the prominence threshold drops the weak tone.
  auto strict = analyze_series(t, v, 0.5);
  CHECK(strict.peaks.size() == 1);
}

TEST_CASE("error conditions") {
  std::vector<double> t{0.0, 1e-3, 2e-3}, v{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(analyze_series(t, v), SeriesTooShort);

  auto tg = grid(1.0, 500.0);
  std::vector<double> flat(tg.size(), 3.3);
  CHECK_THROWS_AS(analyze_series(tg, flat), NoOscillation);
}

TEST_CASE("peaks are labeled by the closest predicted mode") {
  Vec3 w{2 * M_PI * 12.5, 2 * M_PI * 50.0, 2 * M_PI * 49.5};
  auto modes = mode_frequencies(w);
  double fq1 = modes[Mode::Q1] / (2 * M_PI);

  auto t = grid(2.0, 2000.0);
  auto spectrum = analyze_series(t, tone(t, fq1, 1e-6), 1e-2);
  match_modes(spectrum, modes);
  REQUIRE(!spectrum.peaks.empty());
  CHECK(spectrum.peaks[0].mode == mode_label(Mode::Q1));

  // A tone far from every prediction stays unlabeled.
  auto far = analyze_series(t, tone(t, 211.7, 1e-6), 1e-2);
  match_modes(far, modes);
  REQUIRE(!far.peaks.empty());
  CHECK(far.peaks[0].mode.empty());
}
