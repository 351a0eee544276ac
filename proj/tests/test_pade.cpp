#include <cmath>
#include <vector>

#include "doctest.h"

#include "atomchip/errors.hpp"
#include "atomchip/pade.hpp"

using namespace atomchip;

namespace {

std::vector<std::pair<double, double>> sample(double lo, double hi, int n,
                                              double (*f)(double)) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double z = lo + (hi - lo) * i / (n - 1);
    out.push_back({z, f(z)});
  }
  return out;
}

} // namespace

TEST_CASE("rational (1,2) model is recovered exactly") {
  auto s = sample(0.0, 2.0, 25,
                  [](double z) { return (2.0 + 3.0 * z) / (1.0 + z + z * z); });
  auto fit = fit_pade(s, 1, 2);
  CHECK(fit.max_residual < 1e-12);
  CHECK(fit.numerator_coeffs[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.numerator_coeffs[1] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.denominator_coeffs[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(fit.denominator_coeffs[1] == doctest::Approx(1.0).epsilon(1e-10));
  for (double z : {0.1, 0.77, 1.5})
    CHECK(fit(z) ==
          doctest::Approx((2 + 3 * z) / (1 + z + z * z)).epsilon(1e-10));
}

TEST_CASE("constant samples with orders (0,0)") {
  auto s = sample(0.0, 1.0, 10, [](double) { return 4.25; });
  auto fit = fit_pade(s, 0, 0);
  CHECK(fit.numerator_coeffs.size() == 1);
  CHECK(fit.numerator_coeffs[0] == doctest::Approx(4.25).epsilon(1e-14));
  CHECK(fit.max_residual == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("denominator roots inside the domain are rejected") {
  // 1/(1-z) has a pole at z = 1, inside [0.5, 1.5].
  std::vector<std::pair<double, double>> s;
  for (double z : {0.5, 0.6, 0.7, 0.8, 0.9, 1.2, 1.3, 1.4, 1.5})
    s.push_back({z, 1.0 / (1.0 - z)});
  CHECK_THROWS_AS(fit_pade(s, 0, 1), PolesInDomain);
}

TEST_CASE("too few samples") {
  auto s = sample(0.0, 1.0, 3, [](double z) { return z; });
  CHECK_THROWS_AS(fit_pade(s, 2, 2), InsufficientSamples);
}

TEST_CASE("auto order selection prefers the lowest adequate order") {
  auto s = sample(0.1, 1.0, 30,
                  [](double z) { return (1.0 + 2.0 * z) / (1.0 + 0.5 * z); });
  auto fit = fit_pade_auto(s, {{1, 1}, {2, 2}, {3, 3}}, 1e-4);
  CHECK(fit.numerator_coeffs.size() == 2); // picked (1,1)
  CHECK(fit.max_residual < 1e-10);
}
