#pragma once

// The model zoo: every concrete system the toolkit works with, each packaged
// as a KContactSystem with analytic form coefficients and Hamiltonian
// gradients, plus the named symmetry candidates used by the checks.

#include "kcontact/kcontact_system.hpp"

#include <cmath>
#include <string>

namespace kcontact {

// ---------------------------------------------------------------------------
// Parameters

struct DampedStringParams {
  double rho = 1.0;   // linear mass density
  double tau = 1.0;   // tension
  double damp = 0.0;  // damping constant

  DampedStringParams() = default;
  DampedStringParams(double rho_, double tau_, double damp_) : rho(rho_), tau(tau_), damp(damp_) {
    if (!(rho > 0.0) || !(tau > 0.0)) throw std::invalid_argument("string: rho, tau must be positive");
    if (damp < 0.0) throw std::invalid_argument("string: damping must be nonnegative");
  }
  double wave_speed() const { return std::sqrt(tau / rho); }
};

struct BurgersParams {
  double diff = 0.1;   // diffusion coefficient
  double gamma = 0.0;  // coupling constant; -1/diff recovers Burgers

  BurgersParams() = default;
  BurgersParams(double diff_, double gamma_) : diff(diff_), gamma(gamma_) {
    if (!(diff > 0.0)) throw std::invalid_argument("burgers: diffusion must be positive");
  }
  static BurgersParams burgers(double diff_) { return BurgersParams(diff_, -1.0 / diff_); }
  static BurgersParams heat(double diff_) { return BurgersParams(diff_, 0.0); }
};

/// Rotationally invariant coupling G(z), z = sqrt((q1)^2 + (q2)^2), given by
/// its value and the quotient G'(z)/z (smooth for even couplings).
struct CoupledStringsParams {
  double gamma = 0.0;
  std::function<double(double)> g;          // G(z)
  std::function<double(double)> dg_over_z;  // G'(z)/z

  static CoupledStringsParams quadratic(double gamma_, double weight) {
    CoupledStringsParams p;
    if (gamma_ < 0.0) throw std::invalid_argument("coupled strings: gamma must be nonnegative");
    p.gamma = gamma_;
    p.g = [weight](double z) { return 0.5 * weight * z * z; };
    p.dg_over_z = [weight](double) { return weight; };
    return p;
  }
  static CoupledStringsParams uncoupled(double gamma_) { return quadratic(gamma_, 0.0); }
};

struct OscillatorParams {
  double gamma = 0.0;  // dissipation rate; mass and stiffness normalized to 1

  OscillatorParams() = default;
  explicit OscillatorParams(double gamma_) : gamma(gamma_) {
    if (gamma < 0.0) throw std::invalid_argument("oscillator: gamma must be nonnegative");
  }
};

// ---------------------------------------------------------------------------
// Shared building blocks

namespace detail {

/// eta^a = ds^a - p_i^a dq^i for a complete Darboux layout.
inline CoordinateForm darboux_eta(const DarbouxLayout& lay, int a, int m) {
  const int n = lay.n();
  auto coeffs = [lay, a, n, m](const Point& x) {
    Vec c = Vec::Zero(m);
    c(lay.s[a]) = 1.0;
    for (int i = 0; i < n; ++i) c(lay.q[i]) = -x(lay.p[a][i]);
    return c;
  };
  auto dcoeffs = [lay, a, n, m](const Point&) {
    Mat d = Mat::Zero(m, m);  // dq^i ^ dp_i^a
    for (int i = 0; i < n; ++i) {
      d(lay.q[i], lay.p[a][i]) = 1.0;
      d(lay.p[a][i], lay.q[i]) = -1.0;
    }
    return d;
  };
  return CoordinateForm::analytic(coeffs, dcoeffs);
}

inline DarbouxLayout canonical_layout(int n, int k) {
  DarbouxLayout lay;
  for (int i = 0; i < n; ++i) lay.q.push_back(i);
  lay.p.resize(k);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) lay.p[a].push_back(n + a * n + i);
  for (int a = 0; a < k; ++a) lay.s.push_back(n + k * n + a);
  return lay;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Builders

/// Canonical model on R^(n+kn+k): eta^a = ds^a - p_i^a dq^i with Darboux
/// layout (q_1..q_n, p^1_1..p^1_n, ..., p^k_1..p^k_n, s^1..s^k) and a zero
/// Hamiltonian placeholder.
inline KContactSystem build_canonical(int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("build_canonical: need n, k >= 1");
  KContactSystem sys;
  sys.dim = n + k * n + k;
  sys.k = k;
  sys.darboux = detail::canonical_layout(n, k);
  for (int a = 0; a < k; ++a) sys.etas.push_back(detail::darboux_eta(*sys.darboux, a, sys.dim));
  sys.hamiltonian = ScalarField::zero();
  for (int i = 0; i < n; ++i) sys.coordinate_names.push_back("q" + std::to_string(i + 1));
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      sys.coordinate_names.push_back("p" + std::to_string(i + 1) + "_" + std::to_string(a + 1));
  for (int a = 0; a < k; ++a) sys.coordinate_names.push_back("s" + std::to_string(a + 1));
  return sys;
}

/// Negative control: the canonical (n=1, k=2) chart with the second form
/// duplicating the first. Condition (i) fails everywhere.
inline KContactSystem build_degenerate_duplicate() {
  KContactSystem sys = build_canonical(1, 2);
  sys.etas[1] = sys.etas[0];
  sys.darboux.reset();
  return sys;
}

/// 2-contact structure on R^6, coordinates (x, y, p, q, s, t):
/// eta1 = ds - (y dx - x dy)/2, eta2 = dt - p dx - q dy.
inline KContactSystem build_example3() {
  KContactSystem sys;
  sys.dim = 6;
  sys.k = 2;
  sys.coordinate_names = {"x", "y", "p", "q", "s", "t"};
  sys.etas.push_back(CoordinateForm::analytic(
      [](const Point& x) {
        Vec c = Vec::Zero(6);
        c(0) = -0.5 * x(1);
        c(1) = 0.5 * x(0);
        c(4) = 1.0;
        return c;
      },
      [](const Point&) {
        Mat d = Mat::Zero(6, 6);  // dx ^ dy
        d(0, 1) = 1.0;
        d(1, 0) = -1.0;
        return d;
      }));
  sys.etas.push_back(CoordinateForm::analytic(
      [](const Point& x) {
        Vec c = Vec::Zero(6);
        c(0) = -x(2);
        c(1) = -x(3);
        c(5) = 1.0;
        return c;
      },
      [](const Point&) {
        Mat d = Mat::Zero(6, 6);  // dx ^ dp + dy ^ dq
        d(0, 2) = 1.0;
        d(2, 0) = -1.0;
        d(1, 3) = 1.0;
        d(3, 1) = -1.0;
        return d;
      }));
  sys.hamiltonian = ScalarField::zero();
  return sys;
}

/// Damped vibrating string on R^5, coordinates (u, p_t, p_x, s_t, s_x):
/// eta^t = ds^t - p^t du, eta^x = ds^x - p^x du,
/// H = (p^t)^2/(2 rho) - (p^x)^2/(2 tau) + damp s^t.
inline KContactSystem build_damped_string(const DampedStringParams& p) {
  KContactSystem sys = build_canonical(1, 2);
  sys.coordinate_names = {"u", "p_t", "p_x", "s_t", "s_x"};
  const double rho = p.rho, tau = p.tau, damp = p.damp;
  sys.hamiltonian = ScalarField::with_gradient(
      [rho, tau, damp](const Point& x) {
        return x(1) * x(1) / (2.0 * rho) - x(2) * x(2) / (2.0 * tau) + damp * x(3);
      },
      [rho, tau, damp](const Point& x) {
        Vec g = Vec::Zero(5);
        g(1) = x(1) / rho;
        g(2) = -x(2) / tau;
        g(3) = damp;
        return g;
      });
  return sys;
}

/// Burgers / heat model on R^6, coordinates (u, v, p_x, q_x, s_t, s_x):
/// eta^t = ds^t - (-v du + u dv)/2, eta^x = ds^x - p^x du - q^x dv,
/// H = -(1/diff) p^x q^x + gamma u s^x. The t-momenta are constrained
/// functions of (u, v), so the Darboux layout is partial (x-slots only).
inline KContactSystem build_burgers(const BurgersParams& p) {
  KContactSystem sys;
  sys.dim = 6;
  sys.k = 2;
  sys.coordinate_names = {"u", "v", "p_x", "q_x", "s_t", "s_x"};
  sys.etas.push_back(CoordinateForm::analytic(
      [](const Point& x) {
        Vec c = Vec::Zero(6);
        c(0) = 0.5 * x(1);   // +v/2 du
        c(1) = -0.5 * x(0);  // -u/2 dv
        c(4) = 1.0;
        return c;
      },
      [](const Point&) {
        Mat d = Mat::Zero(6, 6);  // -du ^ dv
        d(0, 1) = -1.0;
        d(1, 0) = 1.0;
        return d;
      }));
  sys.etas.push_back(CoordinateForm::analytic(
      [](const Point& x) {
        Vec c = Vec::Zero(6);
        c(0) = -x(2);
        c(1) = -x(3);
        c(5) = 1.0;
        return c;
      },
      [](const Point&) {
        Mat d = Mat::Zero(6, 6);  // du ^ dp^x + dv ^ dq^x
        d(0, 2) = 1.0;
        d(2, 0) = -1.0;
        d(1, 3) = 1.0;
        d(3, 1) = -1.0;
        return d;
      }));
  const double diff = p.diff, gamma = p.gamma;
  sys.hamiltonian = ScalarField::with_gradient(
      [diff, gamma](const Point& x) { return -x(2) * x(3) / diff + gamma * x(0) * x(5); },
      [diff, gamma](const Point& x) {
        Vec g = Vec::Zero(6);
        g(0) = gamma * x(5);
        g(2) = -x(3) / diff;
        g(3) = -x(2) / diff;
        g(5) = gamma * x(0);
        return g;
      });
  DarbouxLayout lay;
  lay.q = {0, 1};
  lay.p = {{-1, -1}, {2, 3}};  // t-momenta constrained, x-momenta are coordinates
  lay.s = {4, 5};
  sys.darboux = lay;
  return sys;
}

/// Two coupled damped strings on R^8, coordinates
/// (q1, q2, pt1, pt2, px1, px2, s_t, s_x):
/// eta^t = ds^t - pt_i dq^i, eta^x = ds^x - px_i dq^i,
/// H = (pt1^2 + pt2^2 + px1^2 + px2^2)/2 + G(z) + gamma s^t.
inline KContactSystem build_coupled_strings(const CoupledStringsParams& p) {
  KContactSystem sys = build_canonical(2, 2);
  sys.coordinate_names = {"q1", "q2", "p_t1", "p_t2", "p_x1", "p_x2", "s_t", "s_x"};
  const double gamma = p.gamma;
  auto g = p.g;
  auto dgz = p.dg_over_z;
  sys.hamiltonian = ScalarField::with_gradient(
      [gamma, g](const Point& x) {
        const double z = std::hypot(x(0), x(1));
        return 0.5 * (x(2) * x(2) + x(3) * x(3) + x(4) * x(4) + x(5) * x(5)) + g(z) +
               gamma * x(6);
      },
      [gamma, dgz](const Point& x) {
        const double z = std::hypot(x(0), x(1));
        const double w = dgz(z);  // G'(z)/z
        Vec grad = Vec::Zero(8);
        grad(0) = w * x(0);
        grad(1) = w * x(1);
        grad(2) = x(2);
        grad(3) = x(3);
        grad(4) = x(4);
        grad(5) = x(5);
        grad(6) = gamma;
        return grad;
      });
  return sys;
}

/// Damped harmonic oscillator, k = 1, coordinates (q, p, s):
/// eta = ds - p dq, H = p^2/2 + q^2/2 + gamma s.
inline KContactSystem build_damped_oscillator(const OscillatorParams& p) {
  KContactSystem sys = build_canonical(1, 1);
  sys.coordinate_names = {"q", "p", "s"};
  const double gamma = p.gamma;
  sys.hamiltonian = ScalarField::with_gradient(
      [gamma](const Point& x) {
        return 0.5 * (x(1) * x(1) + x(0) * x(0)) + gamma * x(2);
      },
      [gamma](const Point& x) {
        Vec g(3);
        g << x(0), x(1), gamma;
        return g;
      });
  return sys;
}

// ---------------------------------------------------------------------------
// Named symmetry candidates

/// Translation of the string displacement, d/du.
inline VectorFieldExpr damped_string_translation() {
  return {[](const Point& x) {
    Vec v = Vec::Zero(x.size());
    v(0) = 1.0;
    return v;
  }};
}

/// Simultaneous rotation of (q1,q2), (pt1,pt2), (px1,px2).
inline VectorFieldExpr coupled_strings_rotation() {
  return {[](const Point& x) {
    Vec v = Vec::Zero(8);
    v(0) = -x(1);
    v(1) = x(0);
    v(2) = -x(3);
    v(3) = x(2);
    v(4) = -x(5);
    v(5) = x(4);
    return v;
  }};
}

/// Translation of the auxiliary Burgers field, d/dv.
inline VectorFieldExpr burgers_v_translation() {
  return {[](const Point&) {
    Vec v = Vec::Zero(6);
    v(1) = 1.0;
    return v;
  }};
}

/// d/dv lifted by the s^t gauge term that restores form invariance:
/// Y = d/dv - (u/2) d/ds^t. Both contact forms and H are preserved.
inline VectorFieldExpr burgers_v_translation_lifted() {
  return {[](const Point& x) {
    Vec v = Vec::Zero(6);
    v(1) = 1.0;
    v(4) = -0.5 * x(0);
    return v;
  }};
}

/// Scaling of the Burgers field, u d/du. Negative control: not a symmetry.
inline VectorFieldExpr burgers_u_scaling() {
  return {[](const Point& x) {
    Vec v = Vec::Zero(6);
    v(0) = x(0);
    return v;
  }};
}

/// The oscillator's own contact Hamiltonian vector field as a candidate.
inline VectorFieldExpr oscillator_hamiltonian_flow(const KContactSystem& sys) {
  return {[sys](const Point& x) { return contact_hamiltonian_vector_field(sys, x); }};
}

}  // namespace kcontact
