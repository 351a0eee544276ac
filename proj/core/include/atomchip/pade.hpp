#pragma once

#include <utility>
#include <vector>

namespace atomchip {

// Rational function N(z)/D(z) with the constant term of D fixed to 1,
// valid on a stated domain.
struct PadeFit {
  std::vector<double> numerator_coeffs;   // a0 + a1 z + ...
  std::vector<double> denominator_coeffs; // d1 z + d2 z^2 + ... (constant = 1)
  double z_min = 0.0;
  double z_max = 0.0;
  double max_residual = 0.0; // relative, over the fitted samples

  double operator()(double z) const;
  double numerator(double z) const;
  double denominator(double z) const;
};

// Least-squares rational fit of (z, value) samples. Samples must be sorted in
// z with distinct abscissae. Throws InsufficientSamples, IllConditioned or
// PolesInDomain.
PadeFit fit_pade(const std::vector<std::pair<double, double>>& samples,
                 int num_order, int den_order);

// Lowest-order fit out of the given candidates whose relative residual beats
// `tol`; falls back to the best candidate if none does.
PadeFit fit_pade_auto(const std::vector<std::pair<double, double>>& samples,
                      const std::vector<std::pair<int, int>>& orders,
                      double tol = 1e-4);

} // namespace atomchip
