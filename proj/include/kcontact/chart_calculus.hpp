#pragma once

// Pointwise multilinear algebra and finite-difference differential operators
// on a single coordinate chart of dimension m.
//
// Component conventions, fixed project-wide:
//   * a 1-form eta = eta_I dx^I is stored as the covector (eta_I);
//   * its exterior derivative is the antisymmetric matrix
//       (d eta)_{IJ} = d_I eta_J - d_J eta_I;
//   * the interior product contracts the first slot,
//       (i(v) omega)_J = v^I omega_{IJ},  i.e.  i(v)omega = omega(v, .);
//   * the wedge of two 1-forms is (a ^ b)_{IJ} = a_I b_J - a_J b_I.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace kcontact {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

inline constexpr double kDefaultFdStep = 1e-5;   // for O(1)-scaled charts
inline constexpr double kDefaultRankTol = 1e-9;  // relative singular-value cutoff

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Central-difference gradient of a scalar function, entrywise
/// (f(x+h e_I) - f(x-h e_I)) / (2h). Throws on non-finite evaluations.
inline Vec fd_gradient(const std::function<double(const Point&)>& f,
                       const Point& x, double h = kDefaultFdStep) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vec g(x.size());
  Point xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    const double fp = f(xp), fm = f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("fd_gradient: non-finite function evaluation");
    g(i) = (fp - fm) / (2.0 * h);
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return g;
}

/// A scalar function on the chart with an optional analytic gradient.
/// When no gradient is supplied, gradient_at falls back to central differences.
struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Vec(const Point&)> gradient;  // may be empty
  double fd_step = kDefaultFdStep;

  double operator()(const Point& x) const { return value(x); }

  Vec gradient_at(const Point& x) const {
    if (gradient) return gradient(x);
    return fd_gradient(value, x, fd_step);
  }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient); }

  static ScalarField with_gradient(std::function<double(const Point&)> v,
                                   std::function<Vec(const Point&)> g) {
    return ScalarField{std::move(v), std::move(g), kDefaultFdStep};
  }
  static ScalarField numeric(std::function<double(const Point&)> v,
                             double h = kDefaultFdStep) {
    return ScalarField{std::move(v), nullptr, h};
  }
  static ScalarField zero() {
    return with_gradient([](const Point&) { return 0.0; },
                         [](const Point& x) { return Vec(Vec::Zero(x.size())); });
  }
  static ScalarField constant(double c) {
    return with_gradient([c](const Point&) { return c; },
                         [](const Point& x) { return Vec(Vec::Zero(x.size())); });
  }
};

/// A vector field given by its component functions.
struct VectorFieldExpr {
  std::function<Vec(const Point&)> value;
  Vec operator()(const Point& x) const { return value(x); }
};

/// Interior product of a vector with a 2-form, (i(v)omega)_J = v^I omega_{IJ}.
inline Vec interior_product_2form(const Mat& omega, const Vec& v) {
  if (omega.rows() != omega.cols() || omega.rows() != v.size())
    throw std::invalid_argument("interior_product_2form: dimension mismatch");
  return omega.transpose() * v;
}

/// Wedge of two 1-forms as an antisymmetric matrix, (a^b)_{IJ} = a_I b_J - a_J b_I.
inline Mat wedge_1forms(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("wedge_1forms: dimension mismatch");
  return a * b.transpose() - b * a.transpose();
}

/// A differential 1-form on the chart: pointwise coefficients eta_I(x) and the
/// coefficient matrix of d eta. Model forms supply both analytically; the
/// numeric constructor falls back to a central-difference curl.
struct CoordinateForm {
  std::function<Vec(const Point&)> coeffs;
  std::function<Mat(const Point&)> dcoeffs;

  double pairing(const Point& x, const Vec& v) const { return coeffs(x).dot(v); }

  static CoordinateForm analytic(std::function<Vec(const Point&)> c,
                                 std::function<Mat(const Point&)> dc) {
    return CoordinateForm{std::move(c), std::move(dc)};
  }

  static CoordinateForm numeric(std::function<Vec(const Point&)> c,
                                double h = kDefaultFdStep) {
    auto dc = [c, h](const Point& x) {
      const Eigen::Index m = x.size();
      Mat jac(m, m);  // jac(I, J) = d_I eta_J
      Point xp = x, xm = x;
      for (Eigen::Index i = 0; i < m; ++i) {
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        jac.row(i) = ((c(xp) - c(xm)) / (2.0 * h)).transpose();
        xp(i) = x(i);
        xm(i) = x(i);
      }
      return Mat(jac - jac.transpose());
    };
    return CoordinateForm{std::move(c), std::move(dc)};
  }

  /// Constant-coefficient form (d eta = 0). Not a valid k-contact ingredient
  /// on its own; used for building blocks and tests.
  static CoordinateForm constant(const Vec& c) {
    const Eigen::Index m = c.size();
    return analytic([c](const Point&) { return c; },
                    [m](const Point&) { return Mat(Mat::Zero(m, m)); });
  }
};

/// Jacobian of a vector field by central differences, J(i,j) = d_j X^i.
inline Mat fd_jacobian(const VectorFieldExpr& X, const Point& x,
                       double h = kDefaultFdStep) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: step must be positive");
  const Eigen::Index m = x.size();
  Mat jac(m, m);
  Point xp = x, xm = x;
  for (Eigen::Index j = 0; j < m; ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    const Vec dp = X(xp), dm = X(xm);
    if (!all_finite(dp) || !all_finite(dm))
      throw std::runtime_error("fd_jacobian: non-finite field evaluation");
    jac.col(j) = (dp - dm) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

/// Lie bracket [X,Y]^i = X(Y^i) - Y(X^i) with directional derivatives by
/// central differences.
inline Vec lie_bracket_fd(const VectorFieldExpr& X, const VectorFieldExpr& Y,
                          const Point& x, double h = kDefaultFdStep) {
  return fd_jacobian(Y, x, h) * X(x) - fd_jacobian(X, x, h) * Y(x);
}

/// Lie derivative of a 1-form along a vector field by the Cartan formula,
/// L_Y eta = i(Y) d eta + d <eta, Y>, the second term by central differences.
inline Vec lie_derivative_oneform(const VectorFieldExpr& Y, const CoordinateForm& eta,
                                  const Point& x, double h = kDefaultFdStep) {
  Vec circ = interior_product_2form(eta.dcoeffs(x), Y(x));
  auto pairing = [&](const Point& y) { return eta.coeffs(y).dot(Y(y)); };
  return circ + fd_gradient(pairing, x, h);
}

/// Relative singular-value split of a matrix at a given tolerance.
struct RankInfo {
  int rank = 0;
  double smallest_retained = std::numeric_limits<double>::infinity();  // sigma_r / sigma_1
  double largest_discarded = 0.0;                                      // sigma_{r+1} / sigma_1
};

inline RankInfo singular_split(const Mat& a, double tol = kDefaultRankTol) {
  if (!(tol > 0.0)) throw std::invalid_argument("singular_split: tol must be positive");
  RankInfo info;
  if (a.rows() == 0 || a.cols() == 0) return info;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  if (smax <= 0.0) return info;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double rel = sv(i) / smax;
    if (rel > tol) {
      ++info.rank;
      info.smallest_retained = rel;
    } else {
      info.largest_discarded = std::max(info.largest_discarded, rel);
      break;  // singular values are sorted
    }
  }
  return info;
}

/// Numerical rank: count of singular values above tol * sigma_max.
inline int rank_with_tolerance(const Mat& a, double tol = kDefaultRankTol) {
  return singular_split(a, tol).rank;
}

/// Orthonormal basis (columns) of the numerical nullspace. An empty matrix
/// (zero rows or columns) yields the full space.
inline Mat nullspace_with_tolerance(const Mat& a, double tol = kDefaultRankTol) {
  if (a.cols() == 0) return Mat(0, 0);
  if (a.rows() == 0) return Mat::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int rank = 0;
  if (smax > 0.0)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) / smax > tol) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

/// Minimum-norm least-squares solution of A x = b. Optionally reports the
/// residual max-norm |A x - b|_inf.
inline Vec lstsq(const Mat& a, const Vec& b, double* residual = nullptr) {
  if (a.rows() != b.size()) throw std::invalid_argument("lstsq: dimension mismatch");
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec x = svd.solve(b);
  if (residual) *residual = (a * x - b).cwiseAbs().maxCoeff();
  return x;
}

}  // namespace kcontact
