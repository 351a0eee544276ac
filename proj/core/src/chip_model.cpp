#include "atomchip/chip_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

constexpr double wire_exclusion = 1e-9; // m, distance to a segment axis

// Field of one finite thin segment at perpendicular distance rho:
// B = mu0 I / (4 pi rho) * (cos(theta_1) - cos(theta_2)), directed along
// u x a with u the current direction.
Vec3 segment_field(const WireSegment& seg, const Vec3& point) {
  const Vec3 a = point - seg.start;
  const Vec3 b = point - seg.end;
  const Vec3 u = normalized(seg.end - seg.start);
  const Vec3 perp = a - dot(a, u) * u;
  const double rho = norm(perp);
  if (rho < wire_exclusion)
    throw PointOnWire("field_at: point within 1e-9 m of a wire segment axis");
  const double cos1 = dot(u, a) / norm(a);
  const double cos2 = dot(u, b) / norm(b);
  const double mag =
      constants::mu_0 * seg.current / (4.0 * M_PI * rho) * (cos1 - cos2);
  return mag * normalized(cross(u, perp));
}

} // namespace

void ChipConfig::validate() const {
  const double dn = std::abs(norm(bias_direction) - 1.0);
  if (dn > 1e-12)
    throw ValidationError("ChipConfig: bias_direction must be a unit vector");
  if (bias_magnitude < 0.0)
    throw ValidationError("ChipConfig: bias_magnitude must be non-negative");
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (norm(s.end - s.start) == 0.0)
      throw ValidationError("ChipConfig: zero-length wire segment");
    if (!std::isfinite(s.current))
      throw ValidationError("ChipConfig: non-finite segment current");
    if (i > 0 && norm(segments[i - 1].end - s.start) > 1e-12)
      throw ValidationError("ChipConfig: segments do not form a connected polyline");
  }
}

void AtomSpecies::validate() const {
  if (!(m_F * g_F > 0.0))
    throw ValidationError("AtomSpecies: m_F * g_F must be positive (low-field seeker)");
  if (!(mass > 0.0) || !(a_s > 0.0) || !(atom_number > 0.0))
    throw ValidationError("AtomSpecies: mass, a_s and atom_number must be positive");
}

AtomSpecies rb87_f2m2(double atom_number) {
  AtomSpecies s;
  s.mass = constants::rb87_mass;
  s.g_F = 0.5;
  s.m_F = 2.0;
  s.mu_B = constants::mu_B;
  s.a_s = constants::rb87_scattering_length;
  s.atom_number = atom_number;
  return s;
}

ChipConfig quantus_z_chip(double wire_current, double bias_tesla) {
  // Central 4 mm wire along X; 16 mm leads along Y making a "Z": current
  // enters at (-2 mm, -16 mm), exits at (+2 mm, +16 mm).
  const double mm = 1e-3;
  ChipConfig cfg;
  cfg.segments = {
      {{-2 * mm, 16 * mm, 0.0}, {-2 * mm, 0.0, 0.0}, wire_current},
      {{-2 * mm, 0.0, 0.0}, {2 * mm, 0.0, 0.0}, wire_current},
      {{2 * mm, 0.0, 0.0}, {2 * mm, -16 * mm, 0.0}, wire_current},
  };
  cfg.bias_direction = {0.0, 1.0, 0.0};
  cfg.bias_magnitude = bias_tesla;
  return cfg;
}

Vec3 field_at(const ChipConfig& config, const Vec3& point) {
  Vec3 total = config.bias_direction * config.bias_magnitude;
  for (const auto& seg : config.segments) total += segment_field(seg, point);
  return total;
}

double potential_at(const ChipConfig& config, const AtomSpecies& species,
                    const Vec3& point) {
  return species.moment() * norm(field_at(config, point));
}

namespace {

using PotFn = std::function<double(const Vec3&)>;

Vec3 fd_gradient(const PotFn& V, const Vec3& p, double h) {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    Vec3 lo = p, hi = p;
    lo[i] -= h;
    hi[i] += h;
    g[i] = (V(hi) - V(lo)) / (2.0 * h);
  }
  return g;
}

Eigen::Matrix3d fd_hessian(const PotFn& V, const Vec3& p, double h) {
  Eigen::Matrix3d H;
  const double v0 = V(p);
  for (int i = 0; i < 3; ++i) {
    Vec3 lo = p, hi = p;
    lo[i] -= h;
    hi[i] += h;
    H(i, i) = (V(hi) - 2.0 * v0 + V(lo)) / (h * h);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Vec3 pp = p, pm = p, mp = p, mm = p;
      pp[i] += h; pp[j] += h;
      pm[i] += h; pm[j] -= h;
      mp[i] -= h; mp[j] += h;
      mm[i] -= h; mm[j] -= h;
      H(i, j) = H(j, i) = (V(pp) - V(pm) - V(mp) + V(mm)) / (4.0 * h * h);
    }
  return H;
}

} // namespace

TrapCharacterization characterize_trap(const ChipConfig& config,
                                       const AtomSpecies& species) {
  const PotFn V = [&](const Vec3& p) { return potential_at(config, species, p); };

  // Coarse line search along the Z line through the origin.
  const double z_lo = 5e-5, z_hi = 8e-3;
  const int n_scan = 400;
  int best = -1;
  double best_v = 0.0;
  std::vector<double> zs(n_scan), vs(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    zs[i] = z_lo * std::pow(z_hi / z_lo, static_cast<double>(i) / (n_scan - 1));
    vs[i] = V({0.0, 0.0, zs[i]});
  }
  for (int i = 1; i + 1 < n_scan; ++i)
    if (vs[i] < vs[i - 1] && vs[i] < vs[i + 1] && (best < 0 || vs[i] < best_v)) {
      best = i;
      best_v = vs[i];
    }
  if (best < 0)
    throw NoTrapFound("characterize_trap: no interior minimum along the Z line");

  // Golden-section refine along z.
  {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = zs[best - 1], b = zs[best + 1];
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = V({0, 0, c}), fd = V({0, 0, d});
    while (b - a > 1e-10) {
      if (fc < fd) {
        b = d; d = c; fd = fc;
        c = b - gr * (b - a); fc = V({0, 0, c});
      } else {
        a = c; c = d; fc = fd;
        d = a + gr * (b - a); fd = V({0, 0, d});
      }
    }
    zs[best] = 0.5 * (a + b);
  }

  // Full 3D refinement: damped Newton on the gradient.
  Vec3 p{0.0, 0.0, zs[best]};
  const double h = std::max(1e-7, 1e-4 * p.z);
  for (int it = 0; it < 100; ++it) {
    const Vec3 g = fd_gradient(V, p, h);
    if (norm(g) < 1e-30) break;
    const Eigen::Matrix3d H = fd_hessian(V, p, h);
    Eigen::Vector3d gv(g.x, g.y, g.z);
    Eigen::Vector3d step = H.ldlt().solve(gv);
    // Guard against runaway steps out of the trap region.
    const double max_step = 0.2 * p.z;
    double sn = step.norm();
    if (sn > max_step) step *= max_step / sn;
    Vec3 p_new{p.x - step(0), p.y - step(1), p.z - step(2)};
    if (V(p_new) > V(p) + 1e-40) {
      // Stagnation at finite-difference noise floor.
      if (sn < 1e-12) break;
      step *= 0.5;
      p_new = {p.x - step(0), p.y - step(1), p.z - step(2)};
    }
    const double moved = norm(p_new - p);
    p = p_new;
    if (moved < 1e-14) break;
  }
  if (!(p.z > 0.0) || !std::isfinite(p.z))
    throw NoTrapFound("characterize_trap: refinement left the physical region");

  TrapCharacterization out;
  out.minimum = p;
  out.z_t = p.z;
  out.bias = config.bias_magnitude;

  const double hh = std::max(1e-7, 1e-4 * p.z);
  Eigen::Matrix3d H = fd_hessian(V, p, hh);
  H = 0.5 * (H + H.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NoTrapFound("characterize_trap: Hessian not positive definite at candidate minimum");

  // Identify the eigenvector closest to the Z axis; the remaining pair is
  // ordered by eigenvalue (x is the weak axis).
  int iz = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(es.eigenvectors()(2, i)) > std::abs(es.eigenvectors()(2, iz)))
      iz = i;
  int ix = -1, iy = -1;
  for (int i = 0; i < 3; ++i) {
    if (i == iz) continue;
    if (ix < 0) ix = i;
    else iy = i;
  }
  if (es.eigenvalues()(ix) > es.eigenvalues()(iy)) std::swap(ix, iy);

  const double m = species.mass;
  auto freq = [&](int i) { return std::sqrt(es.eigenvalues()(i) / m) / (2.0 * M_PI); };
  out.nu_x = freq(ix);
  out.nu_y = freq(iy);
  out.nu_z = freq(iz);

  Eigen::Vector3d ex = es.eigenvectors().col(ix);
  if (ex(0) < 0.0) ex = -ex;
  out.theta = std::atan2(ex(1), ex(0));

  // Third derivative along the z eigen-axis, 5-point stencil.
  Eigen::Vector3d ez = es.eigenvectors().col(iz);
  if (ez(2) < 0.0) ez = -ez;
  const Vec3 dir{ez(0), ez(1), ez(2)};
  auto Vline = [&](double s) { return V(p + s * dir); };
  const double h3 = std::max(1e-7, 1e-4 * p.z);
  const double d3 =
      (-Vline(-2 * h3) + 2 * Vline(-h3) - 2 * Vline(h3) + Vline(2 * h3)) /
      (2.0 * h3 * h3 * h3);
  // Stored as a magnitude: with z pointing away from the chip the cubic
  // coefficient is negative (the wall toward the wire is steeper).
  const double omega_z2 = es.eigenvalues()(iz) / m;
  out.L3 = std::abs(2.0 * m * omega_z2 / d3);

  return out;
}

TrapTables trap_tables(const ChipConfig& config_template,
                       const AtomSpecies& species, double bias_lo,
                       double bias_hi, int n_samples, int workers) {
  using constants::gauss;
  if (n_samples < 20)
    throw InsufficientSamples("trap_tables: need at least 20 samples");
  if (bias_lo > bias_hi) std::swap(bias_lo, bias_hi);
  if (bias_lo < 0.1 * gauss || bias_hi > 50.0 * gauss)
    throw ValidationError("trap_tables: bias range must lie within [0.1, 50] G");

  std::vector<TrapCharacterization> rows(n_samples);
  auto run = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      ChipConfig cfg = config_template;
      cfg.bias_magnitude =
          bias_lo + (bias_hi - bias_lo) * i / double(n_samples - 1);
      rows[i] = characterize_trap(cfg, species);
    }
  };
  workers = std::clamp(workers, 1, n_samples);
  if (workers == 1) {
    run(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_samples + workers - 1) / workers;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(run, w * chunk, std::min(n_samples, (w + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.z_t < b.z_t; });

  auto column = [&](auto&& get) {
    std::vector<std::pair<double, double>> s;
    s.reserve(rows.size());
    for (const auto& r : rows) s.emplace_back(r.z_t, get(r));
    return s;
  };
  auto w2 = [](double nu) { return std::pow(2.0 * M_PI * nu, 2); };

  TrapTables t;
  t.rows = rows;
  t.omega_z2 = fit_pade(column([&](const auto& r) { return w2(r.nu_z); }), 1, 2);
  const std::vector<std::pair<int, int>> orders{{2, 2}, {3, 3}};
  t.omega_x2 = fit_pade_auto(column([&](const auto& r) { return w2(r.nu_x); }), orders);
  t.omega_y2 = fit_pade_auto(column([&](const auto& r) { return w2(r.nu_y); }), orders);
  t.bias_of_zt = fit_pade_auto(column([](const auto& r) { return r.bias; }), orders);
  t.L3_of_zt = fit_pade_auto(column([](const auto& r) { return r.L3; }), orders);
  t.theta_of_zt = fit_pade_auto(column([](const auto& r) { return r.theta; }), orders);

  std::vector<std::pair<double, double>> zb;
  for (const auto& r : rows) zb.emplace_back(r.bias, r.z_t);
  std::sort(zb.begin(), zb.end());
  t.zt_of_bias = fit_pade_auto(zb, orders);

  return t;
}

} // namespace atomchip
