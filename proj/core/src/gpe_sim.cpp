#include "atomchip/gpe_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include <fftw3.h>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

std::mutex fftw_mutex; // FFTW planning is not thread-safe

void init_fftw_threads(int workers) {
#ifdef ATOMCHIP_FFTW_THREADS
  static std::once_flag once;
  std::call_once(once, [] { fftw_init_threads(); });
  fftw_plan_with_nthreads(std::max(1, workers));
#else
  (void)workers;
#endif
}

// Deterministic slab partition over iz with ordered reduction.
template <typename Body>
void for_slabs(size_t nz, int workers, Body&& body) {
  const int w = std::clamp<int>(workers, 1, static_cast<int>(nz));
  if (w == 1) {
    body(0, nz);
    return;
  }
  std::vector<std::thread> pool;
  const size_t chunk = (nz + w - 1) / w;
  for (int k = 0; k < w; ++k) {
    const size_t lo = k * chunk, hi = std::min(nz, (k + 1) * chunk);
    if (lo < hi) pool.emplace_back(body, lo, hi);
  }
  for (auto& t : pool) t.join();
}

double default_coupling(const AtomSpecies& species) {
  return 4.0 * M_PI * constants::hbar * constants::hbar * species.a_s /
         species.mass * species.atom_number;
}

// Effective potential parameters for one instant; the general expression
// reduces bitwise to the simpler models (theta = 0 gives wX2 = wx2 exactly,
// inv3L3 = 0 removes the cubic term exactly).
struct PotentialParams {
  double wX2, wY2, wZ2, wXY2; // rad^2/s^2
  double z_t;                 // m
  double inv3L3;              // 1/m (2/(3 L3))
  double Z_a;                 // m
  double Zddot;               // m/s^2
};

PotentialParams potential_params(const TrapSnapshot& trap, PotentialModel model,
                                 double Z_a, double Zddot) {
  PotentialParams p{};
  const double wx2 = trap.omega_x * trap.omega_x;
  const double wy2 = trap.omega_y * trap.omega_y;
  const double th = (model == PotentialModel::AnharmonicRotating) ? trap.theta : 0.0;
  const double c = std::cos(th), s = std::sin(th);
  p.wX2 = wx2 * c * c + wy2 * s * s;
  p.wY2 = wx2 * s * s + wy2 * c * c;
  p.wZ2 = trap.omega_z * trap.omega_z;
  p.wXY2 = (wx2 - wy2) * c * s;
  p.z_t = trap.z_t;
  p.inv3L3 = (model != PotentialModel::HarmonicFixed && trap.L3 > 0.0)
                 ? 2.0 / (3.0 * trap.L3)
                 : 0.0;
  p.Z_a = Z_a;
  p.Zddot = Zddot;
  return p;
}

class Stepper {
 public:
  Stepper(const GridSpec& grid, const AtomSpecies& species, double coupling,
          int workers)
      : grid_(grid), mass_(species.mass), gN_(coupling), workers_(workers) {
    const size_t n = grid.total();
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!buf_) throw Error("Stepper: fftw_malloc failed");
    {
      std::lock_guard<std::mutex> lock(fftw_mutex);
      init_fftw_threads(workers);
      // x-fastest layout: dims passed slowest-first (nz, ny, nx).
      fwd_ = fftw_plan_dft_3d(static_cast<int>(grid.n[2]),
                              static_cast<int>(grid.n[1]),
                              static_cast<int>(grid.n[0]), buf_, buf_,
                              FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_3d(static_cast<int>(grid.n[2]),
                              static_cast<int>(grid.n[1]),
                              static_cast<int>(grid.n[0]), buf_, buf_,
                              FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (int a = 0; a < 3; ++a) {
      k2_[a].resize(grid.n[a]);
      const double dk = 2.0 * M_PI / grid.extent[a];
      for (size_t i = 0; i < grid.n[a]; ++i) {
        const double m = (i <= grid.n[a] / 2) ? double(i)
                                              : double(i) - double(grid.n[a]);
        k2_[a][i] = (m * dk) * (m * dk);
      }
    }
    x_.resize(grid.n[0]);
    y_.resize(grid.n[1]);
    z_.resize(grid.n[2]);
    for (size_t i = 0; i < grid.n[0]; ++i) x_[i] = grid.coord(0, i);
    for (size_t i = 0; i < grid.n[1]; ++i) y_[i] = grid.coord(1, i);
    for (size_t i = 0; i < grid.n[2]; ++i) z_[i] = grid.coord(2, i);
  }

  ~Stepper() {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  std::complex<double>* data() {
    return reinterpret_cast<std::complex<double>*>(buf_);
  }
  const std::complex<double>* data() const {
    return reinterpret_cast<const std::complex<double>*>(buf_);
  }

  void load(const WaveFunction& psi) {
    std::copy(psi.amp.begin(), psi.amp.end(), data());
  }
  void store(WaveFunction& psi) const {
    psi.amp.assign(data(), data() + grid_.total());
  }

  double local_potential(const PotentialParams& p, size_t ix, size_t iy,
                         size_t iz) const {
    const double X = x_[ix], Y = y_[iy];
    const double dz = z_[iz] + p.Z_a - p.z_t;
    const double harm = p.wX2 * X * X + p.wY2 * Y * Y + 2.0 * p.wXY2 * X * Y +
                        p.wZ2 * dz * dz * (1.0 + dz * p.inv3L3);
    return 0.5 * mass_ * harm + mass_ * p.Zddot * z_[iz];
  }

  // exp(-i dt (V + gN |psi|^2) / hbar); dt imaginary handled by the caller
  // via the two scalar prefactors (cos/sin vs exp decay).
  void apply_potential(const PotentialParams& p, double dt, bool imaginary) {
    auto* a = data();
    for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
      for (size_t iz = z0; iz < z1; ++iz)
        for (size_t iy = 0; iy < grid_.n[1]; ++iy) {
          size_t idx = grid_.index(0, iy, iz);
          for (size_t ix = 0; ix < grid_.n[0]; ++ix, ++idx) {
            const double V = local_potential(p, ix, iy, iz) +
                             gN_ * std::norm(a[idx]);
            const double phase = V * dt / constants::hbar;
            if (imaginary)
              a[idx] *= std::exp(-phase);
            else
              a[idx] *= std::complex<double>(std::cos(phase), -std::sin(phase));
          }
        }
    });
  }

  void apply_kinetic(double dt, bool imaginary) {
    fftw_execute(fwd_);
    auto* a = data();
    const double pref = constants::hbar * dt / (2.0 * mass_);
    const double scale = 1.0 / grid_.total();
    for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
      for (size_t iz = z0; iz < z1; ++iz)
        for (size_t iy = 0; iy < grid_.n[1]; ++iy) {
          const double k2yz = k2_[1][iy] + k2_[2][iz];
          size_t idx = grid_.index(0, iy, iz);
          for (size_t ix = 0; ix < grid_.n[0]; ++ix, ++idx) {
            const double phase = pref * (k2_[0][ix] + k2yz);
            if (imaginary)
              a[idx] *= scale * std::exp(-phase);
            else
              a[idx] *= scale *
                        std::complex<double>(std::cos(phase), -std::sin(phase));
          }
        }
    });
    fftw_execute(bwd_);
  }

  double norm2() const {
    const auto* a = data();
    std::vector<double> partial(grid_.n[2], 0.0);
    for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
      for (size_t iz = z0; iz < z1; ++iz) {
        double s = 0.0;
        const size_t base = grid_.index(0, 0, iz);
        for (size_t j = 0; j < grid_.n[0] * grid_.n[1]; ++j)
          s += std::norm(a[base + j]);
        partial[iz] = s;
      }
    });
    double s = 0.0;
    for (double v : partial) s += v;
    return s * grid_.cell_volume();
  }

  void scale(double f) {
    auto* a = data();
    for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
      const size_t plane = grid_.n[0] * grid_.n[1];
      for (size_t j = z0 * plane; j < z1 * plane; ++j) a[j] *= f;
    });
  }

  // (E_kin, E_pot, E_int) of the current buffer; destroys and restores the
  // spectral content via an extra transform pair.
  std::array<double, 3> energies(const PotentialParams& p) {
    const auto* a = data();
    const double dV = grid_.cell_volume();
    double epot = 0.0, eint = 0.0;
    {
      std::vector<double> pp(grid_.n[2], 0.0), pi(grid_.n[2], 0.0);
      for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
        for (size_t iz = z0; iz < z1; ++iz) {
          double sp = 0.0, si = 0.0;
          for (size_t iy = 0; iy < grid_.n[1]; ++iy) {
            size_t idx = grid_.index(0, iy, iz);
            for (size_t ix = 0; ix < grid_.n[0]; ++ix, ++idx) {
              const double d = std::norm(a[idx]);
              sp += local_potential(p, ix, iy, iz) * d;
              si += d * d;
            }
          }
          pp[iz] = sp;
          pi[iz] = si;
        }
      });
      for (size_t iz = 0; iz < grid_.n[2]; ++iz) {
        epot += pp[iz];
        eint += pi[iz];
      }
      epot *= dV;
      eint *= 0.5 * gN_ * dV;
    }
    fftw_execute(fwd_);
    double ekin = 0.0;
    {
      std::vector<double> pk(grid_.n[2], 0.0);
      // Parseval: sum_k k^2 |psihat_k|^2 dV / N with unnormalized FFT
      const double pref =
          constants::hbar * constants::hbar / (2.0 * mass_) * dV / grid_.total();
      for_slabs(grid_.n[2], workers_, [&](size_t z0, size_t z1) {
        for (size_t iz = z0; iz < z1; ++iz) {
          double s = 0.0;
          for (size_t iy = 0; iy < grid_.n[1]; ++iy) {
            const double k2yz = k2_[1][iy] + k2_[2][iz];
            size_t idx = grid_.index(0, iy, iz);
            for (size_t ix = 0; ix < grid_.n[0]; ++ix, ++idx)
              s += (k2_[0][ix] + k2yz) * std::norm(a[idx]);
          }
          pk[iz] = s;
        }
      });
      for (size_t iz = 0; iz < grid_.n[2]; ++iz) ekin += pk[iz];
      ekin *= pref;
      // undo the forward transform so the buffer is unchanged up to rounding
      scale(1.0 / grid_.total());
      fftw_execute(bwd_);
    }
    return {ekin, epot, eint};
  }

  double coupling() const { return gN_; }

 private:
  GridSpec grid_;
  double mass_, gN_;
  int workers_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_{}, bwd_{};
  std::array<std::vector<double>, 3> k2_;
  std::vector<double> x_, y_, z_;
};

double boundary_peak_ratio(const WaveFunction& psi) {
  const auto& g = psi.grid;
  double peak = 0.0, shell = 0.0;
  for (size_t iz = 0; iz < g.n[2]; ++iz)
    for (size_t iy = 0; iy < g.n[1]; ++iy)
      for (size_t ix = 0; ix < g.n[0]; ++ix) {
        const double d = std::norm(psi.amp[g.index(ix, iy, iz)]);
        peak = std::max(peak, d);
        if (ix == 0 || iy == 0 || iz == 0 || ix == g.n[0] - 1 ||
            iy == g.n[1] - 1 || iz == g.n[2] - 1)
          shell = std::max(shell, d);
      }
  return peak > 0.0 ? shell / peak : 0.0;
}

double interp(const std::vector<double>& t, const std::vector<double>& v,
              double tt) {
  return v.empty() ? 0.0 : sample_series(t, v, tt);
}

} // namespace

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 16 || !std::has_single_bit(n[a]))
      throw ValidationError("GridSpec: point counts must be powers of two >= 16");
    if (!(extent[a] > 0.0))
      throw ValidationError("GridSpec: extents must be positive");
  }
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (const auto& c : amp) s += std::norm(c);
  return std::sqrt(s * grid.cell_volume());
}

void WaveFunction::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw Error("WaveFunction::normalize: zero norm");
  for (auto& c : amp) c /= n;
}

FrameTransform frame_from_classical(const std::vector<ClassicalState>& trajectory,
                                    const AtomSpecies& species) {
  const size_t n = trajectory.size();
  if (n < 3) throw UsageError("frame_from_classical: trajectory too short");
  FrameTransform f;
  f.times.resize(n);
  f.Z_a.resize(n);
  f.Zdot.resize(n);
  f.Zddot.resize(n);
  f.K_a.resize(n);
  f.phi_a.resize(n);
  for (size_t i = 0; i < n; ++i) {
    f.times[i] = trajectory[i].t;
    f.Z_a[i] = trajectory[i].z;
    f.Zdot[i] = trajectory[i].v;
    f.K_a[i] = species.mass * trajectory[i].v / constants::hbar;
  }
  const double dt = f.times[1] - f.times[0];
  for (size_t i = 0; i < n; ++i) {
    if (i == 0)
      f.Zddot[i] = (f.Zdot[1] - f.Zdot[0]) / dt;
    else if (i + 1 == n)
      f.Zddot[i] = (f.Zdot[n - 1] - f.Zdot[n - 2]) / dt;
    else
      f.Zddot[i] = (f.Zdot[i + 1] - f.Zdot[i - 1]) / (2.0 * dt);
  }
  const double pref = species.mass / (2.0 * constants::hbar);
  f.phi_a[0] = 0.0;
  for (size_t i = 1; i < n; ++i)
    f.phi_a[i] = f.phi_a[i - 1] +
                 pref * 0.5 *
                     (f.Zdot[i - 1] * f.Zdot[i - 1] + f.Zdot[i] * f.Zdot[i]) *
                     dt;
  return f;
}

TrapSnapshot trap_snapshot(const RampSchedule& schedule, double t) {
  TrapSnapshot s;
  const double tq = std::min(t, schedule.tf());
  s.omega_z = sample_series(schedule.times, schedule.omega_z, tq);
  s.z_t = sample_series(schedule.times, schedule.z_t, tq);
  s.omega_x = schedule.omega_x.empty()
                  ? 0.0
                  : sample_series(schedule.times, schedule.omega_x, tq);
  s.omega_y = schedule.omega_y.empty()
                  ? 0.0
                  : sample_series(schedule.times, schedule.omega_y, tq);
  s.L3 = schedule.L3.empty() ? 0.0
                             : sample_series(schedule.times, schedule.L3, tq);
  s.theta = schedule.theta.empty()
                ? 0.0
                : sample_series(schedule.times, schedule.theta, tq);
  return s;
}

GroundState ground_state(const GridSpec& grid, const AtomSpecies& species,
                         const TrapSnapshot& trap, PotentialModel model,
                         const GroundStateOptions& opts,
                         std::optional<double> coupling_override) {
  grid.validate();
  if (!(trap.omega_x > 0.0 && trap.omega_y > 0.0 && trap.omega_z > 0.0))
    throw NonPositiveFrequency("ground_state: trap must confine all axes");

  const double gN =
      coupling_override ? *coupling_override : default_coupling(species);
  // The trap is referenced to its own minimum: the frame is centered on z_t.
  TrapSnapshot local = trap;
  local.z_t = 0.0;
  const PotentialParams pp = potential_params(local, model, 0.0, 0.0);

  WaveFunction psi;
  psi.grid = grid;
  psi.amp.resize(grid.total());
  // Gaussian seed at the wider of the oscillator and Thomas-Fermi widths.
  const double w[3] = {trap.omega_x, trap.omega_y, trap.omega_z};
  const double wbar = std::cbrt(w[0] * w[1] * w[2]);
  const double aosc = std::sqrt(constants::hbar / (species.mass * wbar));
  const double q = std::max(1.0, 15.0 * species.atom_number * species.a_s / aosc);
  const double rbar = aosc * std::pow(q, 0.2);
  double sig[3];
  for (int a = 0; a < 3; ++a) {
    const double aho = std::sqrt(constants::hbar / (2.0 * species.mass * w[a]));
    const double rtf = rbar * wbar / w[a] / std::sqrt(7.0);
    sig[a] = std::max(aho, rtf);
  }
  for (size_t iz = 0; iz < grid.n[2]; ++iz)
    for (size_t iy = 0; iy < grid.n[1]; ++iy)
      for (size_t ix = 0; ix < grid.n[0]; ++ix) {
        const double ex =
            std::pow(grid.coord(0, ix) / sig[0], 2) +
            std::pow(grid.coord(1, iy) / sig[1], 2) +
            std::pow(grid.coord(2, iz) / sig[2], 2);
        psi.amp[grid.index(ix, iy, iz)] = std::exp(-0.25 * ex);
      }
  psi.normalize();

  Stepper st(grid, species, gN, opts.workers);
  st.load(psi);

  GroundState out;
  double dt = opts.dt_start;
  auto mu_of = [&]() {
    const auto e = st.energies(pp);
    out.energy = e[0] + e[1] + e[2];
    return e[0] + e[1] + 2.0 * e[2];
  };
  double mu_prev = mu_of();
  double e_prev = out.energy;
  WaveFunction accepted = psi;
  long it = 0;
  const long check_every = 10;
  while (it < opts.max_iter) {
    for (long k = 0; k < check_every; ++k, ++it) {
      st.apply_potential(pp, 0.5 * dt, true);
      st.apply_kinetic(dt, true);
      st.apply_potential(pp, 0.5 * dt, true);
      st.scale(1.0 / std::sqrt(st.norm2()));
    }
    const double mu = mu_of();
    if (out.energy > e_prev * (1.0 + 1e-13) && dt > opts.dt_min) {
      // energy went up: halve the step and restart from the last good state
      dt = std::max(0.5 * dt, opts.dt_min);
      st.load(accepted);
      mu_prev = mu_of();
      e_prev = out.energy;
      continue;
    }
    st.store(accepted);
    const double rel = std::abs(mu - mu_prev) / std::abs(mu) / check_every;
    mu_prev = mu;
    e_prev = out.energy;
    if (rel < opts.tol) {
      if (dt > opts.dt_min) {
        dt = std::max(0.5 * dt, opts.dt_min);
        continue;
      }
      out.psi = std::move(accepted);
      out.mu = mu;
      out.iterations = it;
      return out;
    }
  }
  throw NotConverged("ground_state: not converged after " +
                     std::to_string(opts.max_iter) + " iterations");
}

Moments moments(const WaveFunction& psi) {
  const auto& g = psi.grid;
  double n0 = 0.0;
  Vec3 m1, m2;
  double mxy = 0.0;
  for (size_t iz = 0; iz < g.n[2]; ++iz) {
    const double Z = g.coord(2, iz);
    for (size_t iy = 0; iy < g.n[1]; ++iy) {
      const double Y = g.coord(1, iy);
      size_t idx = g.index(0, iy, iz);
      for (size_t ix = 0; ix < g.n[0]; ++ix, ++idx) {
        const double X = g.coord(0, ix);
        const double d = std::norm(psi.amp[idx]);
        n0 += d;
        m1 += Vec3{X, Y, Z} * d;
        m2 += Vec3{X * X, Y * Y, Z * Z} * d;
        mxy += X * Y * d;
      }
    }
  }
  Moments out;
  m1 = m1 / n0;
  m2 = m2 / n0;
  mxy /= n0;
  out.mean = m1 + psi.center;
  for (int a = 0; a < 3; ++a)
    out.width[a] = std::sqrt(std::max(0.0, m2[a] - m1[a] * m1[a]));
  out.cov_xy = mxy - m1[0] * m1[1];
  return out;
}

Vec3 rotated_widths(const Moments& m, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double X2 = m.width[0] * m.width[0];
  const double Y2 = m.width[1] * m.width[1];
  Vec3 out;
  out[0] = std::sqrt(std::max(0.0, X2 * c * c + 2.0 * m.cov_xy * c * s + Y2 * s * s));
  out[1] = std::sqrt(std::max(0.0, X2 * s * s - 2.0 * m.cov_xy * c * s + Y2 * c * c));
  out[2] = m.width[2];
  return out;
}

Vec3 rotated_widths(const WaveFunction& psi, double theta) {
  return rotated_widths(moments(psi), theta);
}

GpeResult propagate(WaveFunction psi, const AtomSpecies& species,
                    const std::function<TrapSnapshot(double)>& trap,
                    PotentialModel model, const FrameTransform& frame,
                    double t0, double t1, const PropagationOptions& opts,
                    std::optional<double> coupling_override) {
  psi.grid.validate();
  if (!(t1 > t0)) throw UsageError("propagate: t1 must exceed t0");
  if (!(opts.dt > 0.0)) throw UsageError("propagate: dt must be positive");
  const double gN =
      coupling_override ? *coupling_override : default_coupling(species);

  const long nsteps = std::lround(std::ceil((t1 - t0) / opts.dt - 1e-9));
  const double dt = (t1 - t0) / nsteps;
  const long obs_every =
      std::max<long>(1, std::lround(opts.observe_dt / dt));

  Stepper st(psi.grid, species, gN, opts.workers);
  st.load(psi);

  GpeResult out;
  out.psi.grid = psi.grid;

  auto frame_at = [&](double t) {
    struct F { double Z_a, Zddot; } f{};
    f.Z_a = interp(frame.times, frame.Z_a, t);
    f.Zddot = interp(frame.times, frame.Zddot, t);
    return f;
  };

  auto record = [&](double t) {
    st.store(out.psi);
    const double nrm = out.psi.norm();
    const auto fr = frame_at(t);
    const TrapSnapshot ts = trap(t);
    const auto pp = potential_params(ts, model, fr.Z_a, fr.Zddot);
    const auto mom = moments(out.psi);
    out.observables.times.push_back(t);
    out.observables.residual_z.push_back(mom.mean[2]);
    out.observables.com_z.push_back(mom.mean[2] + fr.Z_a);
    out.observables.cap_widths.push_back(mom.width);
    out.observables.cov_xy.push_back(mom.cov_xy);
    out.observables.rot_widths.push_back(rotated_widths(mom, ts.theta));
    out.observables.norm.push_back(nrm);
    const auto e = st.energies(pp);
    out.observables.energy.push_back(e[0] + e[1] + e[2]);
    if (opts.check_overflow && boundary_peak_ratio(out.psi) > 1e-6)
      throw GridOverflow("propagate: density at the grid boundary above 1e-6 "
                         "of peak at t = " + std::to_string(t));
  };

  record(t0);
  for (long i = 0; i < nsteps; ++i) {
    const double tm = t0 + (i + 0.5) * dt;
    const auto fr = frame_at(tm);
    const auto pp = potential_params(trap(tm), model, fr.Z_a, fr.Zddot);
    st.apply_potential(pp, 0.5 * dt, false);
    st.apply_kinetic(dt, false);
    st.apply_potential(pp, 0.5 * dt, false);
    if ((i + 1) % obs_every == 0 || i + 1 == nsteps)
      record(t0 + (i + 1) * dt);
  }
  st.store(out.psi);
  return out;
}

WaveFunction lab_frame(const WaveFunction& psi, const FrameTransform& frame,
                       double t) {
  WaveFunction out = psi;
  const double Z_a = interp(frame.times, frame.Z_a, t);
  const double K = interp(frame.times, frame.K_a, t);
  const double phi = interp(frame.times, frame.phi_a, t);
  const auto& g = out.grid;
  for (size_t iz = 0; iz < g.n[2]; ++iz) {
    const double ph = K * g.coord(2, iz) + phi;
    const std::complex<double> f(std::cos(ph), std::sin(ph));
    for (size_t iy = 0; iy < g.n[1]; ++iy) {
      size_t idx = g.index(0, iy, iz);
      for (size_t ix = 0; ix < g.n[0]; ++ix, ++idx) out.amp[idx] *= f;
    }
  }
  out.center = psi.center + Vec3{0.0, 0.0, Z_a};
  return out;
}

void write_snapshot(const std::string& path, const WaveFunction& psi,
                    double t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("write_snapshot: cannot open " + path);
  for (int a = 0; a < 3; ++a) {
    const uint32_t d = static_cast<uint32_t>(psi.grid.n[a]);
    f.write(reinterpret_cast<const char*>(&d), 4);
  }
  for (int a = 0; a < 3; ++a) {
    const double e = psi.grid.extent[a];
    f.write(reinterpret_cast<const char*>(&e), 8);
  }
  f.write(reinterpret_cast<const char*>(&t), 8);
  for (const auto& c : psi.amp) {
    const double re = c.real(), im = c.imag();
    f.write(reinterpret_cast<const char*>(&re), 8);
    f.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!f) throw Error("write_snapshot: short write to " + path);
}

WaveFunction read_snapshot(const std::string& path, double* t) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_snapshot: cannot open " + path);
  WaveFunction psi;
  for (int a = 0; a < 3; ++a) {
    uint32_t d = 0;
    f.read(reinterpret_cast<char*>(&d), 4);
    psi.grid.n[a] = d;
  }
  for (int a = 0; a < 3; ++a)
    f.read(reinterpret_cast<char*>(&psi.grid.extent[a]), 8);
  double tt = 0.0;
  f.read(reinterpret_cast<char*>(&tt), 8);
  if (t) *t = tt;
  psi.grid.validate();
  psi.amp.resize(psi.grid.total());
  for (auto& c : psi.amp) {
    double re = 0, im = 0;
    f.read(reinterpret_cast<char*>(&re), 8);
    f.read(reinterpret_cast<char*>(&im), 8);
    c = {re, im};
  }
  if (!f) throw Error("read_snapshot: truncated file " + path);
  return psi;
}

} // namespace atomchip
