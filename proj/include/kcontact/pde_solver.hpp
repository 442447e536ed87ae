#pragma once

// Method-of-lines integration of the example field systems on a 1+1
// dimensional (t,x) grid: classical RK4 in time, 3-point central stencils in
// space (odd-reflection closure at Dirichlet-zero boundaries), gauge-pinned
// constraint fields, and independent analytic oracles for the damped string
// and for Burgers / heat.

#include "kcontact/kcontact_system.hpp"
#include "kcontact/models.hpp"
#include "kcontact/section_grid.hpp"

#include <algorithm>
#include <complex>
#include <string>
#include <vector>

namespace kcontact {

struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BlowUpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Dirichlet-zero stencils close the boundary by odd reflection. Pinned fields
// in these models satisfy f = f_xx = 0 at the ends, so the reflected extension
// is C^3 and the central error constant is uniform up to the boundary.
inline Vec dx_dirichlet(const Vec& f, double dx) {
  const Eigen::Index n = f.size();
  Vec g(n);
  for (Eigen::Index j = 1; j + 1 < n; ++j) g(j) = (f(j + 1) - f(j - 1)) / (2.0 * dx);
  g(0) = f(1) / dx;
  g(n - 1) = -f(n - 2) / dx;
  return g;
}

inline Vec dxx_dirichlet(const Vec& f, double dx) {
  const Eigen::Index n = f.size();
  Vec g(n);
  const double d2 = dx * dx;
  for (Eigen::Index j = 1; j + 1 < n; ++j) g(j) = (f(j + 1) - 2.0 * f(j) + f(j - 1)) / d2;
  g(0) = (f(1) - 2.0 * f(0) - f(1)) / d2;
  g(n - 1) = (f(n - 2) - 2.0 * f(n - 1) - f(n - 2)) / d2;
  return g;
}

// periodic helpers act on the unique nodes (duplicated endpoint excluded)
inline Vec dx_periodic(const Vec& f, double dx) {
  const Eigen::Index m = f.size();
  Vec g(m);
  for (Eigen::Index j = 0; j < m; ++j)
    g(j) = (f((j + 1) % m) - f((j + m - 1) % m)) / (2.0 * dx);
  return g;
}

inline Vec dxx_periodic(const Vec& f, double dx) {
  const Eigen::Index m = f.size();
  Vec g(m);
  for (Eigen::Index j = 0; j < m; ++j)
    g(j) = (f((j + 1) % m) - 2.0 * f(j) + f((j + m - 1) % m)) / (dx * dx);
  return g;
}

template <typename Rhs>
Vec rk4_step(const Rhs& f, const Vec& y, double dt) {
  const Vec k1 = f(y);
  const Vec k2 = f(Vec(y + 0.5 * dt * k1));
  const Vec k3 = f(Vec(y + 0.5 * dt * k2));
  const Vec k4 = f(Vec(y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Splits t_end into stride-aligned RK4 steps of size at most dt_max.
struct Stepping {
  double dt;
  int n_steps;
  int stride;
};

inline Stepping make_stepping(double t_end, double dt_max, int store_stride) {
  if (!(dt_max > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("integrate: dt and t_end must be positive");
  const int base = std::max(1, static_cast<int>(std::ceil(t_end / dt_max - 1e-12)));
  const int stride = std::clamp(store_stride, 1, base);
  const int intervals = (base + stride - 1) / stride;
  Stepping s;
  s.stride = stride;
  s.n_steps = intervals * stride;
  s.dt = t_end / s.n_steps;
  return s;
}

inline void check_finite_frame(const Mat& frame, double t) {
  if (!frame.allFinite())
    throw BlowUpError("integration blew up at t = " + format_full(t));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Damped vibrating string

struct StringIC {
  std::function<double(double)> u0;        // displacement
  std::function<double(double)> u_t0;      // velocity

  static StringIC sine_mode(int mode, const SpaceGrid& grid) {
    const double l = grid.x1 - grid.x0, x0 = grid.x0;
    return {[mode, l, x0](double x) { return std::sin(mode * M_PI * (x - x0) / l); },
            [](double) { return 0.0; }};
  }
};

/// Evolves (u, p^t, s^t) with the gauge p^x := -tau u_x, s^x := 0 and
/// Dirichlet-zero boundaries. Stored fields: (u, p_t, p_x, s_t, s_x).
inline SectionGrid integrate_damped_string(const DampedStringParams& p, const SpaceGrid& grid,
                                           const StringIC& ic, double t_end, double dt,
                                           int store_stride = 1) {
  if (grid.boundary != Boundary::DirichletZero)
    throw std::invalid_argument("string: Dirichlet-zero boundary required");
  const double dx = grid.dx(), c = p.wave_speed();
  if (dt > 0.5 * dx / c + 1e-15)
    throw StabilityError("string: dt = " + format_full(dt) + " violates dt <= 0.5 dx/c = " +
                         format_full(0.5 * dx / c));
  if (std::abs(ic.u0(grid.x0)) > 1e-4 || std::abs(ic.u0(grid.x1)) > 1e-4)
    throw std::invalid_argument("string: initial displacement must vanish at the boundary");

  const int n = grid.n;
  const auto stepping = detail::make_stepping(t_end, dt, store_stride);

  Vec state(3 * n);  // [u; pt; st]
  for (int j = 0; j < n; ++j) {
    state(j) = ic.u0(grid.node(j));
    state(n + j) = p.rho * ic.u_t0(grid.node(j));
    state(2 * n + j) = 0.0;
  }
  state(0) = state(n - 1) = 0.0;
  state(n) = state(2 * n - 1) = 0.0;

  const double rho = p.rho, tau = p.tau, damp = p.damp;
  auto rhs = [&](const Vec& y) {
    const Vec u = y.segment(0, n), pt = y.segment(n, n), st = y.segment(2 * n, n);
    const Vec ux = detail::dx_dirichlet(u, dx);
    const Vec uxx = detail::dxx_dirichlet(u, dx);
    Vec dy(3 * n);
    dy.segment(0, n) = pt / rho;
    dy.segment(n, n) = tau * uxx - damp * pt;
    for (int j = 0; j < n; ++j) {
      const double px = -tau * ux(j);
      dy(2 * n + j) = pt(j) * pt(j) / (2.0 * rho) - px * px / (2.0 * tau) - damp * st(j);
    }
    dy(0) = dy(n - 1) = 0.0;          // u pinned
    dy(n) = dy(2 * n - 1) = 0.0;      // p^t pinned
    return dy;
  };

  auto make_frame = [&](const Vec& y) {
    Mat f(5, n);
    const Vec u = y.segment(0, n);
    f.row(0) = u.transpose();
    f.row(1) = y.segment(n, n).transpose();
    f.row(2) = (-tau * detail::dx_dirichlet(u, dx)).transpose();
    f.row(3) = y.segment(2 * n, n).transpose();
    f.row(4).setZero();
    return f;
  };

  SectionGrid out;
  out.grid = grid;
  out.field_names = {"u", "p_t", "p_x", "s_t", "s_x"};
  out.model = "damped-string";
  out.gauge = "s_x=0, p_x=-tau*u_x";
  out.times.push_back(0.0);
  out.frames.push_back(make_frame(state));
  for (int step = 1; step <= stepping.n_steps; ++step) {
    state = detail::rk4_step(rhs, state, stepping.dt);
    if (step % stepping.stride == 0) {
      const double t = step * stepping.dt;
      out.times.push_back(t);
      out.frames.push_back(make_frame(state));
      detail::check_finite_frame(out.frames.back(), t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Burgers / heat

/// Evolves u with the gauge v = p^x = s^t = s^x = 0, q^x := -diff u_x on a
/// periodic grid: u_t = diff u_xx + gamma diff u u_x. Stored fields:
/// (u, v, p_x, q_x, s_t, s_x).
inline SectionGrid integrate_burgers(const BurgersParams& p, const SpaceGrid& grid,
                                     const std::function<double(double)>& u0, double t_end,
                                     double dt, int store_stride = 1) {
  if (grid.boundary != Boundary::Periodic)
    throw std::invalid_argument("burgers: periodic boundary required");
  const double dx = grid.dx();
  const int m = grid.unique_nodes();

  Vec u(m);
  double umax = 0.0;
  for (int j = 0; j < m; ++j) {
    u(j) = u0(grid.node(j));
    umax = std::max(umax, std::abs(u(j)));
  }
  const double diffusive = 0.25 * dx * dx / p.diff;
  if (dt > diffusive + 1e-15)
    throw StabilityError("burgers: dt = " + format_full(dt) + " violates dt <= 0.25 dx^2/k = " +
                         format_full(diffusive));
  if (umax > 0.0 && dt > 0.5 * dx / umax + 1e-15)
    throw StabilityError("burgers: dt = " + format_full(dt) + " violates dt <= 0.5 dx/max|u| = " +
                         format_full(0.5 * dx / umax));

  const auto stepping = detail::make_stepping(t_end, dt, store_stride);
  const double diff = p.diff;
  const double advect = p.gamma * p.diff;  // vanishes identically for gamma = 0
  auto rhs = [&](const Vec& y) {
    Vec dy = diff * detail::dxx_periodic(y, dx);
    if (advect != 0.0) dy += advect * y.cwiseProduct(detail::dx_periodic(y, dx));
    return dy;
  };

  auto make_frame = [&](const Vec& y) {
    Mat f = Mat::Zero(6, grid.n);
    const Vec qx = -diff * detail::dx_periodic(y, dx);
    for (int j = 0; j < m; ++j) {
      f(0, j) = y(j);
      f(3, j) = qx(j);
    }
    f(0, grid.n - 1) = f(0, 0);  // duplicated endpoint
    f(3, grid.n - 1) = f(3, 0);
    return f;
  };

  SectionGrid out;
  out.grid = grid;
  out.field_names = {"u", "v", "p_x", "q_x", "s_t", "s_x"};
  out.model = "burgers";
  out.gauge = "v=p_x=s_t=s_x=0, q_x=-k*u_x";
  out.times.push_back(0.0);
  out.frames.push_back(make_frame(u));
  for (int step = 1; step <= stepping.n_steps; ++step) {
    u = detail::rk4_step(rhs, u, stepping.dt);
    if (step % stepping.stride == 0) {
      const double t = step * stepping.dt;
      out.times.push_back(t);
      out.frames.push_back(make_frame(u));
      detail::check_finite_frame(out.frames.back(), t);
    }
  }
  return out;
}

/// Heat limit: the Burgers solver with the advective coupling switched off.
inline SectionGrid integrate_heat(double diff, const SpaceGrid& grid,
                                  const std::function<double(double)>& u0, double t_end,
                                  double dt, int store_stride = 1) {
  return integrate_burgers(BurgersParams::heat(diff), grid, u0, t_end, dt, store_stride);
}

// ---------------------------------------------------------------------------
// Coupled strings

struct CoupledIC {
  std::function<double(double)> q1_0, q2_0;
  std::function<double(double)> q1_t0 = [](double) { return 0.0; };
  std::function<double(double)> q2_t0 = [](double) { return 0.0; };
};

/// Evolves (q1, q2, p^t_1, p^t_2, s^t) with the gauge p^x_i := -dq^i/dx,
/// s^x := 0 and Dirichlet-zero boundaries. Stored fields:
/// (q1, q2, p_t1, p_t2, p_x1, p_x2, s_t, s_x).
inline SectionGrid integrate_coupled_strings(const CoupledStringsParams& p, const SpaceGrid& grid,
                                             const CoupledIC& ic, double t_end, double dt,
                                             int store_stride = 1) {
  if (grid.boundary != Boundary::DirichletZero)
    throw std::invalid_argument("coupled strings: Dirichlet-zero boundary required");
  const double dx = grid.dx();
  if (dt > 0.5 * dx + 1e-15)
    throw StabilityError("coupled strings: dt = " + format_full(dt) +
                         " violates dt <= 0.5 dx = " + format_full(0.5 * dx));
  for (auto* f : {&ic.q1_0, &ic.q2_0})
    if (std::abs((*f)(grid.x0)) > 1e-4 || std::abs((*f)(grid.x1)) > 1e-4)
      throw std::invalid_argument("coupled strings: displacements must vanish at the boundary");

  const int n = grid.n;
  const auto stepping = detail::make_stepping(t_end, dt, store_stride);

  Vec state(5 * n);  // [q1; q2; pt1; pt2; st]
  for (int j = 0; j < n; ++j) {
    const double x = grid.node(j);
    state(j) = ic.q1_0(x);
    state(n + j) = ic.q2_0(x);
    state(2 * n + j) = ic.q1_t0(x);
    state(3 * n + j) = ic.q2_t0(x);
    state(4 * n + j) = 0.0;
  }
  for (int seg = 0; seg < 4; ++seg) state(seg * n) = state(seg * n + n - 1) = 0.0;

  const double gamma = p.gamma;
  auto dgz = p.dg_over_z;
  auto gfun = p.g;
  auto rhs = [&](const Vec& y) {
    const Vec q1 = y.segment(0, n), q2 = y.segment(n, n);
    const Vec pt1 = y.segment(2 * n, n), pt2 = y.segment(3 * n, n), st = y.segment(4 * n, n);
    const Vec q1x = detail::dx_dirichlet(q1, dx), q2x = detail::dx_dirichlet(q2, dx);
    const Vec q1xx = detail::dxx_dirichlet(q1, dx), q2xx = detail::dxx_dirichlet(q2, dx);
    Vec dy(5 * n);
    for (int j = 0; j < n; ++j) {
      const double z = std::hypot(q1(j), q2(j));
      const double w = dgz(z);
      dy(j) = pt1(j);
      dy(n + j) = pt2(j);
      dy(2 * n + j) = q1xx(j) - w * q1(j) - gamma * pt1(j);
      dy(3 * n + j) = q2xx(j) - w * q2(j) - gamma * pt2(j);
      const double px1 = -q1x(j), px2 = -q2x(j);
      dy(4 * n + j) = 0.5 * (pt1(j) * pt1(j) + pt2(j) * pt2(j) + px1 * px1 + px2 * px2) -
                      gfun(z) - gamma * st(j);
    }
    for (int seg = 0; seg < 4; ++seg) dy(seg * n) = dy(seg * n + n - 1) = 0.0;
    return dy;
  };

  auto make_frame = [&](const Vec& y) {
    Mat f(8, n);
    const Vec q1 = y.segment(0, n), q2 = y.segment(n, n);
    f.row(0) = q1.transpose();
    f.row(1) = q2.transpose();
    f.row(2) = y.segment(2 * n, n).transpose();
    f.row(3) = y.segment(3 * n, n).transpose();
    f.row(4) = (-detail::dx_dirichlet(q1, dx)).transpose();
    f.row(5) = (-detail::dx_dirichlet(q2, dx)).transpose();
    f.row(6) = y.segment(4 * n, n).transpose();
    f.row(7).setZero();
    return f;
  };

  SectionGrid out;
  out.grid = grid;
  out.field_names = {"q1", "q2", "p_t1", "p_t2", "p_x1", "p_x2", "s_t", "s_x"};
  out.model = "coupled-strings";
  out.gauge = "s_x=0, p_x_i=-dq_i/dx";
  out.times.push_back(0.0);
  out.frames.push_back(make_frame(state));
  for (int step = 1; step <= stepping.n_steps; ++step) {
    state = detail::rk4_step(rhs, state, stepping.dt);
    if (step % stepping.stride == 0) {
      const double t = step * stepping.dt;
      out.times.push_back(t);
      out.frames.push_back(make_frame(state));
      detail::check_finite_frame(out.frames.back(), t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Damped oscillator (k = 1 mechanics)

struct OscillatorTrajectory {
  std::vector<double> times;
  Mat states;               // 3 x T, rows (q, p, s)
  std::vector<double> energy;  // H along the trajectory
};

/// RK4 integration of the contact Hamiltonian vector field.
inline OscillatorTrajectory integrate_damped_oscillator(const OscillatorParams& p, const Vec& ic,
                                                        double t_end, double dt) {
  if (ic.size() != 3) throw std::invalid_argument("oscillator: ic must be (q, p, s)");
  const KContactSystem sys = build_damped_oscillator(p);
  const auto stepping = detail::make_stepping(t_end, dt, 1);
  auto rhs = [&](const Vec& y) { return contact_hamiltonian_vector_field(sys, y); };

  OscillatorTrajectory out;
  out.states.resize(3, stepping.n_steps + 1);
  Vec y = ic;
  for (int step = 0; step <= stepping.n_steps; ++step) {
    if (step > 0) y = detail::rk4_step(rhs, y, stepping.dt);
    if (!y.allFinite())
      throw BlowUpError("oscillator blew up at t = " + format_full(step * stepping.dt));
    out.times.push_back(step * stepping.dt);
    out.states.col(step) = y;
    out.energy.push_back(sys.hamiltonian(y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Analytic oracles

/// Underdamped separated mode of u_tt - c^2 u_xx + k u_t = 0 with Dirichlet
/// ends, for the initial data u = sin(n pi (x-x0)/L), u_t = 0:
///   u = e^{-kt/2} [cos(w t) + (k/(2w)) sin(w t)] sin(n pi (x-x0)/L),
///   w = sqrt(c^2 n^2 pi^2 / L^2 - k^2/4).
inline double modal_string_oracle(const DampedStringParams& p, int mode, double x0, double x1,
                                  double t, double x) {
  const double l = x1 - x0;
  const double lam = p.wave_speed() * mode * M_PI / l;
  const double om2 = lam * lam - 0.25 * p.damp * p.damp;
  if (!(om2 > 0.0)) throw std::invalid_argument("modal_string_oracle: overdamped mode");
  const double om = std::sqrt(om2);
  const double envelope = std::exp(-0.5 * p.damp * t);
  const double shape = std::cos(om * t) + 0.5 * p.damp / om * std::sin(om * t);
  return envelope * shape * std::sin(mode * M_PI * (x - x0) / l);
}

/// Exact periodic Burgers solution via the Cole-Hopf transform: phi solves
/// the heat equation with phi(0,.) = exp(-(1/2k) integral of u0), evaluated
/// through a truncated Fourier series; u = -2k phi_x / phi. The ic mean is
/// handled by a Galilean shift, so constants are exact.
class ColeHopfOracle {
 public:
  ColeHopfOracle(const std::function<double(double)>& u0, double x0, double x1, double diff,
                 int samples = 1024)
      : x0_(x0), period_(x1 - x0), diff_(diff) {
    if (!(diff > 0.0)) throw std::invalid_argument("cole-hopf: diffusion must be positive");
    const double scale = 1.0 + std::abs(u0(x0));
    if (std::abs(u0(x0) - u0(x1)) > 1e-9 * scale)
      throw std::invalid_argument("cole-hopf: initial condition is not periodic");

    const int m = samples;
    mean_ = 0.0;
    std::vector<double> vals(m);
    for (int j = 0; j < m; ++j) {
      vals[j] = u0(x0 + period_ * j / m);
      mean_ += vals[j];
    }
    mean_ /= m;
    const int mmax = m / 2 - 1;
    // Fourier coefficients of the zero-mean part of u0
    std::vector<std::complex<double>> u0hat(mmax + 1, std::complex<double>(0.0, 0.0));
    for (int mode = 1; mode <= mmax; ++mode) {
      std::complex<double> a(0.0, 0.0);
      for (int j = 0; j < m; ++j) {
        const double ang = -2.0 * M_PI * mode * j / m;
        a += (vals[j] - mean_) * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      u0hat[mode] = a / static_cast<double>(m);
    }
    // primitive V(x) = sum_{mode != 0} a_mode P/(2 pi i mode) (e^{i mode th} - 1)
    auto primitive = [&](double th) {
      double v = 0.0;
      for (int mode = 1; mode <= mmax; ++mode) {
        const std::complex<double> factor =
            period_ / std::complex<double>(0.0, 2.0 * M_PI * mode);
        const std::complex<double> e(std::cos(mode * th), std::sin(mode * th));
        v += 2.0 * (u0hat[mode] * factor * (e - 1.0)).real();
      }
      return v;
    };
    // sample phi0 = exp(-V / (2 diff)) and take its Fourier coefficients
    std::vector<double> phi0(m);
    for (int j = 0; j < m; ++j) phi0[j] = std::exp(-primitive(2.0 * M_PI * j / m) / (2.0 * diff));
    coeffs_.resize(mmax + 1);
    for (int mode = 0; mode <= mmax; ++mode) {
      std::complex<double> b(0.0, 0.0);
      for (int j = 0; j < m; ++j) {
        const double ang = -2.0 * M_PI * mode * j / m;
        b += phi0[j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      coeffs_[mode] = b / static_cast<double>(m);
    }
    // zero everything at the sampling noise floor, then drop the tail;
    // the phi_x weighting amplifies spurious high modes otherwise
    const double cutoff = 1e-13 * std::abs(coeffs_[0]);
    int keep = 0;
    for (int mode = 1; mode <= mmax; ++mode) {
      if (std::abs(coeffs_[mode]) < cutoff)
        coeffs_[mode] = 0.0;
      else
        keep = mode;
    }
    coeffs_.resize(keep + 1);
  }

  double operator()(double t, double x) const {
    if (!(t >= 0.0)) throw std::invalid_argument("cole-hopf: t must be nonnegative");
    // Galilean shift by the ic mean
    double xs = x - mean_ * t;
    double th = 2.0 * M_PI * (xs - x0_) / period_;
    double phi = coeffs_[0].real();
    double phix = 0.0;
    for (std::size_t mode = 1; mode < coeffs_.size(); ++mode) {
      const double wav = 2.0 * M_PI * mode / period_;
      const double decay = std::exp(-diff_ * wav * wav * t);
      const std::complex<double> e(std::cos(mode * th), std::sin(mode * th));
      const std::complex<double> term = coeffs_[mode] * decay * e;
      phi += 2.0 * term.real();
      phix += 2.0 * (term * std::complex<double>(0.0, wav)).real();
    }
    return mean_ - 2.0 * diff_ * phix / phi;
  }

  double mean() const { return mean_; }

 private:
  double x0_;
  double period_;
  double diff_;
  double mean_;
  std::vector<std::complex<double>> coeffs_;
};

// ---------------------------------------------------------------------------
// Residual scan

struct ResidualScan {
  double max_form = 0.0;
  double mean_form = 0.0;
  double max_scalar = 0.0;
  double mean_scalar = 0.0;
  long nodes = 0;

  double max_combined() const { return std::max(max_form, max_scalar); }
};

/// Evaluates the section-form field-equation residuals at every interior
/// (t,x) node of a stored solution, gauge-pinned fields included.
inline ResidualScan residual_scan(const KContactSystem& sys, const SectionGrid& psi) {
  if (psi.n_times() < 3 || psi.grid.n < 3)
    throw std::invalid_argument("residual_scan: need at least a 3x3 stencil");
  ResidualScan scan;
  for (int ti = 1; ti + 1 < psi.n_times(); ++ti) {
    const int xlo = psi.grid.boundary == Boundary::Periodic ? 0 : 1;
    const int xhi = psi.grid.boundary == Boundary::Periodic ? psi.grid.unique_nodes()
                                                            : psi.grid.n - 1;
    for (int xi = xlo; xi < xhi; ++xi) {
      const HdwResidual r = hdw_residual_section(sys, psi, ti, xi);
      const double fn = r.form_norm(), sn = std::abs(r.scalar);
      scan.max_form = std::max(scan.max_form, fn);
      scan.max_scalar = std::max(scan.max_scalar, sn);
      scan.mean_form += fn;
      scan.mean_scalar += sn;
      ++scan.nodes;
    }
  }
  if (scan.nodes > 0) {
    scan.mean_form /= scan.nodes;
    scan.mean_scalar /= scan.nodes;
  }
  return scan;
}

}  // namespace kcontact
