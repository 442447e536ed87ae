#pragma once

// Discretized sections psi: (t,x) -> M on a rectangular grid, plus the
// 1-d space grid they live on. Frames are stored at uniformly spaced times
// so that central differences in t are available.

#include "kcontact/chart_calculus.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace kcontact {

enum class Boundary { DirichletZero, Periodic };

struct SpaceGrid {
  double x0 = 0.0;
  double x1 = 1.0;
  int n = 0;  // node count, endpoints included (periodic: last node repeats the first)
  Boundary boundary = Boundary::DirichletZero;

  SpaceGrid() = default;
  SpaceGrid(double a, double b, int nodes, Boundary bc)
      : x0(a), x1(b), n(nodes), boundary(bc) {
    if (n < 8) throw std::invalid_argument("SpaceGrid: need at least 8 nodes");
    if (!(x1 > x0)) throw std::invalid_argument("SpaceGrid: x1 must exceed x0");
  }

  double dx() const { return (x1 - x0) / (n - 1); }
  double node(int j) const { return x0 + j * dx(); }
  /// Number of independent nodes (periodic grids identify the endpoints).
  int unique_nodes() const { return boundary == Boundary::Periodic ? n - 1 : n; }
};

/// Round-trip-safe float formatting used by every CSV writer.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SectionGrid {
  SpaceGrid grid;
  std::vector<double> times;   // uniformly spaced
  std::vector<Mat> frames;     // one m x n matrix per stored time
  std::vector<std::string> field_names;
  std::string model;
  std::string gauge;

  int n_times() const { return static_cast<int>(times.size()); }
  int n_nodes() const { return grid.n; }
  int n_fields() const { return frames.empty() ? 0 : static_cast<int>(frames.front().rows()); }

  double frame_dt() const {
    if (times.size() < 2) throw std::logic_error("SectionGrid: need at least two frames");
    return times[1] - times[0];
  }

  Vec state(int ti, int xi) const { return frames[ti].col(xi); }

  bool interior_time(int ti) const { return ti >= 1 && ti + 1 < n_times(); }
  bool interior_space(int xi) const {
    if (grid.boundary == Boundary::Periodic) return xi >= 0 && xi < grid.unique_nodes();
    return xi >= 1 && xi + 1 < grid.n;
  }
  bool interior(int ti, int xi) const { return interior_time(ti) && interior_space(xi); }

  /// Central difference of the whole state in t.
  Vec time_derivative(int ti, int xi) const {
    if (!interior_time(ti)) throw std::out_of_range("SectionGrid: boundary time index");
    return (frames[ti + 1].col(xi) - frames[ti - 1].col(xi)) / (2.0 * frame_dt());
  }

  /// Central difference of the whole state in x (wraps on periodic grids).
  Vec space_derivative(int ti, int xi) const {
    if (!interior_space(xi)) throw std::out_of_range("SectionGrid: boundary space index");
    int jm = xi - 1, jp = xi + 1;
    if (grid.boundary == Boundary::Periodic) {
      const int m = grid.unique_nodes();
      jm = (xi - 1 + m) % m;
      jp = (xi + 1) % m;
    }
    return (frames[ti].col(jp) - frames[ti].col(jm)) / (2.0 * grid.dx());
  }

  bool finite() const {
    for (const Mat& f : frames)
      if (!f.allFinite()) return false;
    return true;
  }

  /// CSV layout: header "t,x,<field names>", one row per (t,x) node, t-major.
  void write_csv(std::ostream& os) const {
    os << "t,x";
    for (const auto& name : field_names) os << ',' << name;
    os << '\n';
    for (int ti = 0; ti < n_times(); ++ti)
      for (int xi = 0; xi < grid.n; ++xi) {
        os << format_full(times[ti]) << ',' << format_full(grid.node(xi));
        for (int f = 0; f < n_fields(); ++f) os << ',' << format_full(frames[ti](f, xi));
        os << '\n';
      }
  }
};

}  // namespace kcontact
