#include "atomchip/pade.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "atomchip/errors.hpp"

namespace atomchip {

double PadeFit::numerator(double z) const {
  double acc = 0.0;
  for (auto it = numerator_coeffs.rbegin(); it != numerator_coeffs.rend(); ++it)
    acc = acc * z + *it;
  return acc;
}

double PadeFit::denominator(double z) const {
  double acc = 0.0;
  for (auto it = denominator_coeffs.rbegin(); it != denominator_coeffs.rend(); ++it)
    acc = acc * z + *it;
  return 1.0 + acc * z;
}

double PadeFit::operator()(double z) const {
  return numerator(z) / denominator(z);
}

PadeFit fit_pade(const std::vector<std::pair<double, double>>& samples,
                 int num_order, int den_order) {
  const int p = num_order, q = den_order;
  const int n_coeffs = p + 1 + q;
  const int n = static_cast<int>(samples.size());
  if (n < n_coeffs)
    throw InsufficientSamples("fit_pade: need at least " +
                              std::to_string(n_coeffs) + " samples, got " +
                              std::to_string(n));
  for (int i = 1; i < n; ++i)
    if (!(samples[i].first > samples[i - 1].first))
      throw InsufficientSamples("fit_pade: samples must be sorted with distinct z");

  const double z_lo = samples.front().first;
  const double z_hi = samples.back().first;
  double z_scale = std::max(std::abs(z_lo), std::abs(z_hi));
  if (z_scale == 0.0) z_scale = 1.0;
  double f_scale = 0.0;
  for (const auto& [z, f] : samples) f_scale = std::max(f_scale, std::abs(f));
  if (f_scale == 0.0) f_scale = 1.0;

  // Linearize: N(zeta) - f * (D(zeta) - 1) = f, with zeta = z / z_scale.
  Eigen::MatrixXd A(n, n_coeffs);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const double zeta = samples[i].first / z_scale;
    const double f = samples[i].second / f_scale;
    double zp = 1.0;
    for (int j = 0; j <= p; ++j) {
      A(i, j) = zp;
      zp *= zeta;
    }
    zp = zeta;
    for (int j = 0; j < q; ++j) {
      A(i, p + 1 + j) = -f * zp;
      zp *= zeta;
    }
    b(i) = f;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < n_coeffs)
    throw IllConditioned("fit_pade: rank-deficient normal system (rank " +
                         std::to_string(qr.rank()) + " of " +
                         std::to_string(n_coeffs) + ")");
  Eigen::VectorXd c = qr.solve(b);

  PadeFit fit;
  fit.z_min = z_lo;
  fit.z_max = z_hi;
  fit.numerator_coeffs.resize(p + 1);
  fit.denominator_coeffs.resize(q);
  // Undo the scaling: coefficients in the original variable.
  double sp = 1.0;
  for (int j = 0; j <= p; ++j) {
    fit.numerator_coeffs[j] = c(j) * f_scale / sp;
    sp *= z_scale;
  }
  sp = z_scale;
  for (int j = 0; j < q; ++j) {
    fit.denominator_coeffs[j] = c(p + 1 + j) / sp;
    sp *= z_scale;
  }

  // Denominator must be root-free on the domain: sign check on a dense grid.
  const int n_check = 1000;
  const double d0 = fit.denominator(z_lo);
  for (int i = 0; i <= n_check; ++i) {
    const double z = z_lo + (z_hi - z_lo) * i / n_check;
    if (fit.denominator(z) * d0 <= 0.0)
      throw PolesInDomain("fit_pade: denominator changes sign inside fit domain");
  }

  double max_res = 0.0;
  for (const auto& [z, f] : samples)
    max_res = std::max(max_res, std::abs(fit(z) - f) / f_scale);
  fit.max_residual = max_res;
  return fit;
}

PadeFit fit_pade_auto(const std::vector<std::pair<double, double>>& samples,
                      const std::vector<std::pair<int, int>>& orders,
                      double tol) {
  PadeFit best;
  bool have_best = false;
  for (const auto& [p, q] : orders) {
    PadeFit fit;
    try {
      fit = fit_pade(samples, p, q);
    } catch (const Error&) {
      continue;
    }
    if (fit.max_residual < tol) return fit;
    if (!have_best || fit.max_residual < best.max_residual) {
      best = fit;
      have_best = true;
    }
  }
  if (!have_best)
    throw IllConditioned("fit_pade_auto: no candidate order produced a fit");
  return best;
}

} // namespace atomchip
