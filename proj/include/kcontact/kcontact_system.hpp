#pragma once

// k-contact Hamiltonian systems: structure verification, Reeb frames, and the
// Hamilton-De Donder-Weyl field equations in their equivalent formulations.
//
// A k-contact structure is a family of k 1-forms eta^a whose coefficient
// matrix has rank k (condition i), whose stacked d-eta matrices have a
// k-dimensional common kernel, the Reeb distribution (condition ii), and
// whose contact and Reeb distributions intersect trivially (condition iii,
// checked as the combined kernel being zero).

#include "kcontact/chart_calculus.hpp"
#include "kcontact/section_grid.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kcontact {

/// Chart indices of Darboux coordinates (q^i, p_i^a, s^a). A momentum slot
/// may be -1 when the corresponding momentum is not a chart coordinate but
/// a constrained function of the others (e.g. the Burgers t-momenta).
struct DarbouxLayout {
  std::vector<int> q;                // n entries
  std::vector<std::vector<int>> p;   // k rows of n entries, -1 = constrained
  std::vector<int> s;                // k entries

  int n() const { return static_cast<int>(q.size()); }
  int k() const { return static_cast<int>(s.size()); }

  bool complete() const {
    for (const auto& row : p)
      for (int idx : row)
        if (idx < 0) return false;
    return true;
  }
};

struct KContactSystem {
  int dim = 0;  // chart dimension m
  int k = 0;    // number of contact forms
  std::vector<CoordinateForm> etas;
  ScalarField hamiltonian = ScalarField::zero();
  std::vector<std::string> coordinate_names;
  std::optional<DarbouxLayout> darboux;

  /// k x m matrix whose rows are the eta^a coefficients at x.
  Mat eta_matrix(const Point& x) const {
    Mat e(k, dim);
    for (int a = 0; a < k; ++a) e.row(a) = etas[a].coeffs(x).transpose();
    return e;
  }

  /// km x m matrix stacking every d-eta^a coefficient matrix at x.
  Mat stacked_deta(const Point& x) const {
    Mat d(k * dim, dim);
    for (int a = 0; a < k; ++a) d.middleRows(a * dim, dim) = etas[a].dcoeffs(x);
    return d;
  }

  KContactSystem with_hamiltonian(ScalarField h) const {
    KContactSystem out = *this;
    out.hamiltonian = std::move(h);
    return out;
  }

  void check_point(const Point& x) const {
    if (x.size() != dim) throw std::invalid_argument("KContactSystem: point dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("KContactSystem: point has non-finite entries");
  }

  void validate() const {
    if (k < 1 || k > dim) throw std::invalid_argument("KContactSystem: need 1 <= k <= dim");
    if (static_cast<int>(etas.size()) != k)
      throw std::invalid_argument("KContactSystem: need one form per alpha");
    if (darboux && darboux->complete()) {
      const int n = darboux->n();
      if (dim != n + k * n + k)
        throw std::invalid_argument("KContactSystem: Darboux layout size mismatch");
    }
  }
};

// ---------------------------------------------------------------------------
// Structure verification

struct StructurePointCheck {
  Point point;
  int rank_contact = 0;      // rank of the eta coefficient matrix
  int dim_reeb = 0;          // kernel dimension of the stacked d-eta matrix
  int dim_intersection = 0;  // kernel dimension of [d-eta; eta]
  bool pass_i = false, pass_ii = false, pass_iii = false;
  double margin = 0.0;     // smallest retained relative singular value, all checks
  double discarded = 0.0;  // largest discarded relative singular value, all checks

  bool pass() const { return pass_i && pass_ii && pass_iii; }
};

struct StructureReport {
  int k = 0;
  double tol = kDefaultRankTol;
  std::vector<StructurePointCheck> points;
  bool pass_i = true, pass_ii = true, pass_iii = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_discarded = 0.0;

  bool pass() const { return pass_i && pass_ii && pass_iii; }

  std::string first_failure() const {
    if (!pass_i) return "condition (i): contact codistribution rank != k";
    if (!pass_ii) return "condition (ii): Reeb distribution rank != k";
    if (!pass_iii) return "condition (iii): contact/Reeb intersection nonzero";
    return "";
  }
};

inline StructurePointCheck verify_structure_at(const KContactSystem& sys, const Point& x,
                                               double tol = kDefaultRankTol) {
  sys.check_point(x);
  StructurePointCheck c;
  c.point = x;

  const Mat e = sys.eta_matrix(x);
  const Mat d = sys.stacked_deta(x);
  Mat combined(d.rows() + e.rows(), sys.dim);
  combined << d, e;

  const RankInfo ri_e = singular_split(e, tol);
  const RankInfo ri_d = singular_split(d, tol);
  const RankInfo ri_c = singular_split(combined, tol);

  c.rank_contact = ri_e.rank;
  c.dim_reeb = sys.dim - ri_d.rank;
  c.dim_intersection = sys.dim - ri_c.rank;
  c.pass_i = c.rank_contact == sys.k;
  c.pass_ii = c.dim_reeb == sys.k;
  c.pass_iii = c.dim_intersection == 0;
  c.margin = std::min({ri_e.smallest_retained, ri_d.smallest_retained, ri_c.smallest_retained});
  c.discarded = std::max({ri_e.largest_discarded, ri_d.largest_discarded, ri_c.largest_discarded});
  return c;
}

inline StructureReport verify_structure(const KContactSystem& sys,
                                        const std::vector<Point>& points,
                                        double tol = kDefaultRankTol) {
  sys.validate();
  if (points.empty()) throw std::invalid_argument("verify_structure: no sample points");
  StructureReport report;
  report.k = sys.k;
  report.tol = tol;
  for (const Point& x : points) {
    StructurePointCheck c = verify_structure_at(sys, x, tol);
    report.pass_i = report.pass_i && c.pass_i;
    report.pass_ii = report.pass_ii && c.pass_ii;
    report.pass_iii = report.pass_iii && c.pass_iii;
    report.worst_margin = std::min(report.worst_margin, c.margin);
    report.worst_discarded = std::max(report.worst_discarded, c.discarded);
    report.points.push_back(std::move(c));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Reeb vector fields

struct ReebFrame {
  Mat vectors;            // m x k, column b is R_b at the point
  double residual = 0.0;  // max-norm residual of the stacked linear systems
};

/// Solves the defining relations <eta^a, R_b> = delta^a_b, i(R_b) d eta^a = 0
/// pointwise as a stacked least-squares system. The structure conditions make
/// the system full-rank, hence the frame unique.
inline ReebFrame solve_reeb(const KContactSystem& sys, const Point& x, double tol = 1e-8) {
  sys.check_point(x);
  const int m = sys.dim, k = sys.k;
  Mat a(k + k * m, m);
  a.topRows(k) = sys.eta_matrix(x);
  // i(R) d eta = (d eta)^T R row-contracts the first slot
  for (int al = 0; al < k; ++al)
    a.middleRows(k + al * m, m) = sys.etas[al].dcoeffs(x).transpose();

  if (rank_with_tolerance(a) < m) {
    const StructurePointCheck c = verify_structure_at(sys, x);
    std::ostringstream msg;
    msg << "solve_reeb: rank-deficient system, structure violated";
    if (!c.pass_i) msg << " [condition (i): rank " << c.rank_contact << " != " << k << "]";
    if (!c.pass_ii) msg << " [condition (ii): Reeb rank " << c.dim_reeb << " != " << k << "]";
    if (!c.pass_iii) msg << " [condition (iii): intersection dim " << c.dim_intersection << "]";
    throw std::runtime_error(msg.str());
  }

  ReebFrame frame;
  frame.vectors.resize(m, k);
  for (int b = 0; b < k; ++b) {
    Vec rhs = Vec::Zero(k + k * m);
    rhs(b) = 1.0;
    double res = 0.0;
    frame.vectors.col(b) = lstsq(a, rhs, &res);
    frame.residual = std::max(frame.residual, res);
  }
  if (frame.residual > tol)
    throw std::runtime_error("solve_reeb: residual above tolerance");
  return frame;
}

/// Finite-difference commutators of the solved Reeb fields,
/// max over a<b of |[R_a, R_b](x)|_inf. Near zero on valid structures.
inline double reeb_commutator_norm(const KContactSystem& sys, const Point& x,
                                   double h = kDefaultFdStep) {
  double worst = 0.0;
  for (int a = 0; a < sys.k; ++a)
    for (int b = a + 1; b < sys.k; ++b) {
      VectorFieldExpr ra{[&sys, a](const Point& y) { return Vec(solve_reeb(sys, y).vectors.col(a)); }};
      VectorFieldExpr rb{[&sys, b](const Point& y) { return Vec(solve_reeb(sys, y).vectors.col(b)); }};
      worst = std::max(worst, lie_bracket_fd(ra, rb, x, h).cwiseAbs().maxCoeff());
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Hamilton-De Donder-Weyl residuals

/// Values X_1..X_k of a k-vector field at a point, stored as columns.
struct KVectorAtPoint {
  Mat columns;  // m x k

  static KVectorAtPoint zero(int m, int k) { return {Mat::Zero(m, k)}; }
};

struct HdwResidual {
  Vec form;           // covector residual of the first equation
  double scalar = 0;  // residual of the energy equation sum_a <eta^a, X_a> + H

  double form_norm() const { return form.cwiseAbs().maxCoeff(); }
  double max_norm() const { return std::max(form_norm(), std::abs(scalar)); }
};

/// Residuals of the field equations
///   sum_a i(X_a) d eta^a = dH - sum_a (L_{R_a} H) eta^a,
///   sum_a <eta^a, X_a>   = -H.
inline HdwResidual hdw_residual_kvector(const KContactSystem& sys, const KVectorAtPoint& X,
                                        const Point& x) {
  sys.check_point(x);
  if (X.columns.rows() != sys.dim || X.columns.cols() != sys.k)
    throw std::invalid_argument("hdw_residual_kvector: k-vector shape mismatch");
  const ReebFrame reeb = solve_reeb(sys, x);
  const Vec dh = sys.hamiltonian.gradient_at(x);

  HdwResidual r;
  r.form = -dh;
  r.scalar = sys.hamiltonian(x);
  for (int a = 0; a < sys.k; ++a) {
    const Vec eta = sys.etas[a].coeffs(x);
    r.form += interior_product_2form(sys.etas[a].dcoeffs(x), X.columns.col(a));
    r.form += dh.dot(reeb.vectors.col(a)) * eta;
    r.scalar += eta.dot(X.columns.col(a));
  }
  return r;
}

/// Same residuals with X_a replaced by the central-difference partials of a
/// section stored on a (t,x) grid; the index must be interior.
inline HdwResidual hdw_residual_section(const KContactSystem& sys, const SectionGrid& psi,
                                        int ti, int xi) {
  if (sys.k != 2)
    throw std::invalid_argument("hdw_residual_section: sections are (t,x) grids, need k = 2");
  if (!psi.interior(ti, xi))
    throw std::out_of_range("hdw_residual_section: index not interior");
  KVectorAtPoint X{Mat(sys.dim, 2)};
  X.columns.col(0) = psi.time_derivative(ti, xi);
  X.columns.col(1) = psi.space_derivative(ti, xi);
  return hdw_residual_kvector(sys, X, psi.state(ti, xi));
}

/// Residual of the Lie-derivative form of the field equations,
/// sum_a L_{X_a} eta^a + (L_{R_a} H) eta^a, with X given as vector fields so
/// the Lie derivatives can be taken in a neighborhood.
inline Vec lie_form_residual(const KContactSystem& sys, const std::vector<VectorFieldExpr>& X,
                             const Point& x, double h = kDefaultFdStep) {
  sys.check_point(x);
  if (static_cast<int>(X.size()) != sys.k)
    throw std::invalid_argument("lie_form_residual: need one field per form");
  const ReebFrame reeb = solve_reeb(sys, x);
  const Vec dh = sys.hamiltonian.gradient_at(x);
  Vec r = Vec::Zero(sys.dim);
  for (int a = 0; a < sys.k; ++a) {
    r += lie_derivative_oneform(X[a], sys.etas[a], x, h);
    r += dh.dot(reeb.vectors.col(a)) * sys.etas[a].coeffs(x);
  }
  return r;
}

/// The 2-forms Omega^a = -H d eta^a + dH ^ eta^a as antisymmetric matrices.
inline std::vector<Mat> omega_forms(const KContactSystem& sys, const Point& x) {
  sys.check_point(x);
  const double h = sys.hamiltonian(x);
  const Vec dh = sys.hamiltonian.gradient_at(x);
  std::vector<Mat> out;
  out.reserve(sys.k);
  for (int a = 0; a < sys.k; ++a)
    out.push_back(-h * sys.etas[a].dcoeffs(x) + wedge_1forms(dh, sys.etas[a].coeffs(x)));
  return out;
}

inline constexpr double kHamiltonianZeroThreshold = 1e-12;

/// Residuals of the Reeb-free formulation sum_a i(X_a) Omega^a = 0 together
/// with the energy equation. Only defined on the open set where H != 0.
inline HdwResidual residual_no_reeb(const KContactSystem& sys, const KVectorAtPoint& X,
                                    const Point& x) {
  sys.check_point(x);
  const double h = sys.hamiltonian(x);
  if (std::abs(h) <= kHamiltonianZeroThreshold)
    throw std::runtime_error("residual_no_reeb: outside open set O (H = 0)");
  const std::vector<Mat> omegas = omega_forms(sys, x);
  HdwResidual r;
  r.form = Vec::Zero(sys.dim);
  r.scalar = h;
  for (int a = 0; a < sys.k; ++a) {
    r.form += interior_product_2form(omegas[a], X.columns.col(a));
    r.scalar += sys.etas[a].coeffs(x).dot(X.columns.col(a));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Darboux-coordinate equations

/// The right-hand sides of the field equations in Darboux coordinates:
/// q-rates dq^i/dt^a = dH/dp_i^a, the summed p-divergence
/// -(dH/dq^i + p_i^a dH/ds^a), and the summed s-divergence
/// p_i^a dH/dp_i^a - H. Momentum slots that are not chart coordinates leave
/// their q-rate NaN and the divergences undefined (complete = false).
struct DarbouxRates {
  Mat q_rates;       // n x k, entry (i,a) = dq^i/dt^a
  Vec p_divergence;  // n
  double s_divergence = 0.0;
  bool complete = false;
};

inline DarbouxRates darboux_hdw_rhs(const KContactSystem& sys, const Point& x) {
  sys.check_point(x);
  if (!sys.darboux) throw std::invalid_argument("darboux_hdw_rhs: missing Darboux layout");
  const DarbouxLayout& lay = *sys.darboux;
  const int n = lay.n(), k = lay.k();
  const Vec dh = sys.hamiltonian.gradient_at(x);

  DarbouxRates out;
  out.q_rates = Mat::Constant(n, k, std::numeric_limits<double>::quiet_NaN());
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i)
      if (lay.p[a][i] >= 0) out.q_rates(i, a) = dh(lay.p[a][i]);

  out.complete = lay.complete();
  if (out.complete) {
    out.p_divergence.resize(n);
    for (int i = 0; i < n; ++i) {
      double acc = dh(lay.q[i]);
      for (int a = 0; a < k; ++a) acc += x(lay.p[a][i]) * dh(lay.s[a]);
      out.p_divergence(i) = -acc;
    }
    out.s_divergence = -sys.hamiltonian(x);
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < n; ++i) out.s_divergence += x(lay.p[a][i]) * dh(lay.p[a][i]);
  } else {
    out.p_divergence = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
    out.s_divergence = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

/// Contact Hamiltonian vector field for k = 1 in Darboux coordinates,
/// X = H_p d_q - (H_q + p H_s) d_p + (p H_p - H) d_s.
inline Vec contact_hamiltonian_vector_field(const KContactSystem& sys, const Point& x) {
  sys.check_point(x);
  if (sys.k != 1) throw std::invalid_argument("contact_hamiltonian_vector_field: needs k = 1");
  if (!sys.darboux || !sys.darboux->complete())
    throw std::invalid_argument("contact_hamiltonian_vector_field: missing Darboux layout");
  const DarbouxLayout& lay = *sys.darboux;
  const int n = lay.n();
  const Vec dh = sys.hamiltonian.gradient_at(x);

  Vec X = Vec::Zero(sys.dim);
  double srate = -sys.hamiltonian(x);
  for (int i = 0; i < n; ++i) {
    X(lay.q[i]) = dh(lay.p[0][i]);
    X(lay.p[0][i]) = -(dh(lay.q[i]) + x(lay.p[0][i]) * dh(lay.s[0]));
    srate += x(lay.p[0][i]) * dh(lay.p[0][i]);
  }
  X(lay.s[0]) = srate;
  return X;
}

/// A k-vector field value built from the Darboux-coordinate equations: the
/// q-slots are determined, the p- and s-slots only through their traces.
/// The default completion distributes the traces evenly over the diagonal
/// slots and then applies the minimal correction that also enforces
/// X_a(H) = -H L_{R_a} H per alpha, so that the same k-vector satisfies the
/// Reeb-free formulation on {H != 0}. Pass energy_consistent = false for the
/// plain even split.
inline KVectorAtPoint darboux_hdw_kvector(const KContactSystem& sys, const Point& x,
                                          bool energy_consistent = true) {
  sys.check_point(x);
  if (!sys.darboux || !sys.darboux->complete())
    throw std::invalid_argument("darboux_hdw_kvector: missing Darboux layout");
  const DarbouxLayout& lay = *sys.darboux;
  const int n = lay.n(), k = lay.k();
  const double hval = sys.hamiltonian(x);
  const Vec dh = sys.hamiltonian.gradient_at(x);

  auto hp = [&](int a, int i) { return dh(lay.p[a][i]); };
  auto hs = [&](int a) { return dh(lay.s[a]); };
  auto hq = [&](int i) { return dh(lay.q[i]); };
  auto pval = [&](int a, int i) { return x(lay.p[a][i]); };

  // trace targets
  Vec pdiv(n);
  for (int i = 0; i < n; ++i) {
    double acc = hq(i);
    for (int a = 0; a < k; ++a) acc += pval(a, i) * hs(a);
    pdiv(i) = -acc;
  }
  double sdiv = -hval;
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < n; ++i) sdiv += pval(a, i) * hp(a, i);

  // even split of the traces over the diagonal slots
  const int np = k * n * k, ns = k * k;  // unknowns P(a,i,b), S(a,b)
  auto pidx = [&](int a, int i, int b) { return (a * n + i) * k + b; };
  auto sidx = [&](int a, int b) { return np + a * k + b; };
  Vec y0 = Vec::Zero(np + ns);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) y0(pidx(a, i, a)) = pdiv(i) / k;
    y0(sidx(a, a)) = sdiv / k;
  }

  Vec y = y0;
  if (energy_consistent) {
    // constraints: n p-traces, 1 s-trace, k energy rows
    Mat c = Mat::Zero(n + 1 + k, np + ns);
    Vec b(n + 1 + k);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < k; ++a) c(i, pidx(a, i, a)) = 1.0;
      b(i) = pdiv(i);
    }
    for (int a = 0; a < k; ++a) c(n, sidx(a, a)) = 1.0;
    b(n) = sdiv;
    for (int a = 0; a < k; ++a) {
      const int row = n + 1 + a;
      for (int i = 0; i < n; ++i)
        for (int bb = 0; bb < k; ++bb) c(row, pidx(a, i, bb)) = hp(bb, i);
      for (int bb = 0; bb < k; ++bb) c(row, sidx(a, bb)) = hs(bb);
      double fixed = 0.0;
      for (int i = 0; i < n; ++i) fixed += hq(i) * hp(a, i);
      b(row) = -hval * hs(a) - fixed;
    }
    // minimal deviation from the even split subject to the constraints
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(c);
    y = y0 + cod.solve(Vec(b - c * y0));
  }

  KVectorAtPoint X = KVectorAtPoint::zero(sys.dim, k);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) {
      X.columns(lay.q[i], a) = hp(a, i);
      for (int bb = 0; bb < k; ++bb) X.columns(lay.p[bb][i], a) += y(pidx(a, i, bb));
    }
    for (int bb = 0; bb < k; ++bb) X.columns(lay.s[bb], a) += y(sidx(a, bb));
  }
  return X;
}

/// The same construction as smooth vector fields, one per alpha.
inline std::vector<VectorFieldExpr> darboux_hdw_fields(const KContactSystem& sys,
                                                       bool energy_consistent = true) {
  std::vector<VectorFieldExpr> fields;
  for (int a = 0; a < sys.k; ++a)
    fields.push_back(VectorFieldExpr{[sys, a, energy_consistent](const Point& y) {
      return Vec(darboux_hdw_kvector(sys, y, energy_consistent).columns.col(a));
    }});
  return fields;
}

}  // namespace kcontact
