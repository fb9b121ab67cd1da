#pragma once

// Cross-section geometry: shape descriptions, strict interior tests, the
// rasterized uniform-grid domain used by all transverse operators, and the
// rotational-asymmetry test about the coordinate origin (the axis the tube is
// built around, not the shape's own center).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab {

struct ShapeSpec {
  enum class Kind { rectangle, disk, ellipse, polygon };
  Kind kind = Kind::rectangle;
  double width = 0.0, height = 0.0;  // rectangle
  double radius = 0.0;               // disk
  double rx = 0.0, ry = 0.0;         // ellipse
  Eigen::Vector2d center{0.0, 0.0};
  std::vector<Eigen::Vector2d> vertices;  // polygon, either orientation

  static ShapeSpec rectangle(double w, double h, Eigen::Vector2d c = {0, 0}) {
    ShapeSpec s;
    s.kind = Kind::rectangle;
    s.width = w;
    s.height = h;
    s.center = c;
    return s;
  }
  static ShapeSpec disk(double r, Eigen::Vector2d c = {0, 0}) {
    ShapeSpec s;
    s.kind = Kind::disk;
    s.radius = r;
    s.center = c;
    return s;
  }
  static ShapeSpec ellipse(double rx, double ry, Eigen::Vector2d c = {0, 0}) {
    ShapeSpec s;
    s.kind = Kind::ellipse;
    s.rx = rx;
    s.ry = ry;
    s.center = c;
    return s;
  }
  static ShapeSpec polygon(std::vector<Eigen::Vector2d> v) {
    ShapeSpec s;
    s.kind = Kind::polygon;
    s.vertices = std::move(v);
    return s;
  }
};

inline void validate(const ShapeSpec& s) {
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle:
      if (!(s.width > 0.0 && s.height > 0.0)) throw ConfigError("rectangle: width/height must be positive");
      break;
    case ShapeSpec::Kind::disk:
      if (!(s.radius > 0.0)) throw ConfigError("disk: radius must be positive");
      break;
    case ShapeSpec::Kind::ellipse:
      if (!(s.rx > 0.0 && s.ry > 0.0)) throw ConfigError("ellipse: semi-axes must be positive");
      break;
    case ShapeSpec::Kind::polygon:
      if (s.vertices.size() < 3) throw ConfigError("polygon: needs at least 3 vertices");
      break;
  }
}

namespace detail {

// Distance from p to segment [a, b].
inline double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                               const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

inline bool polygon_contains_strict(const std::vector<Eigen::Vector2d>& poly,
                                    const Eigen::Vector2d& p) {
  const std::size_t n = poly.size();
  // Points on (or numerically at) an edge count as outside: strict interior.
  double scale = 0.0;
  for (const auto& v : poly) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double on_tol = 1e-12 * std::max(1.0, scale);
  for (std::size_t i = 0; i < n; ++i)
    if (segment_distance(p, poly[i], poly[(i + 1) % n]) <= on_tol) return false;
  // Crossing test.
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

inline bool contains_strict(const ShapeSpec& s, const Eigen::Vector2d& t) {
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle: {
      const Eigen::Vector2d d = t - s.center;
      return std::abs(d.x()) < 0.5 * s.width && std::abs(d.y()) < 0.5 * s.height;
    }
    case ShapeSpec::Kind::disk:
      return (t - s.center).squaredNorm() < s.radius * s.radius;
    case ShapeSpec::Kind::ellipse: {
      const Eigen::Vector2d d = t - s.center;
      const double u = d.x() / s.rx, v = d.y() / s.ry;
      return u * u + v * v < 1.0;
    }
    case ShapeSpec::Kind::polygon:
      return detail::polygon_contains_strict(s.vertices, t);
  }
  return false;
}

// sup |t| over the closed shape: the largest distance from the coordinate
// origin to any point of the cross-section.
inline double sup_point_norm(const ShapeSpec& s) {
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle: {
      double m = 0.0;
      for (double sx : {-0.5, 0.5})
        for (double sy : {-0.5, 0.5})
          m = std::max(m, (s.center + Eigen::Vector2d(sx * s.width, sy * s.height)).norm());
      return m;
    }
    case ShapeSpec::Kind::disk:
      return s.center.norm() + s.radius;
    case ShapeSpec::Kind::ellipse: {
      // |t| is maximized on the boundary; dense scan with local refinement.
      const double pi = std::numbers::pi;
      auto bd = [&](double phi) {
        return (s.center + Eigen::Vector2d(s.rx * std::cos(phi), s.ry * std::sin(phi))).norm();
      };
      const int n = 4096;
      double best = 0.0, best_phi = 0.0;
      for (int i = 0; i < n; ++i) {
        const double phi = 2.0 * pi * i / n;
        const double v = bd(phi);
        if (v > best) {
          best = v;
          best_phi = phi;
        }
      }
      double lo = best_phi - 2.0 * pi / n, hi = best_phi + 2.0 * pi / n;
      for (int it = 0; it < 80; ++it) {  // ternary refinement
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (bd(m1) < bd(m2))
          lo = m1;
        else
          hi = m2;
      }
      return std::max(best, bd(0.5 * (lo + hi)));
    }
    case ShapeSpec::Kind::polygon: {
      double m = 0.0;
      for (const auto& v : s.vertices) m = std::max(m, v.norm());
      return m;
    }
  }
  return 0.0;
}

inline double area(const ShapeSpec& s) {
  const double pi = std::numbers::pi;
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle:
      return s.width * s.height;
    case ShapeSpec::Kind::disk:
      return pi * s.radius * s.radius;
    case ShapeSpec::Kind::ellipse:
      return pi * s.rx * s.ry;
    case ShapeSpec::Kind::polygon: {
      double acc = 0.0;
      const std::size_t n = s.vertices.size();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = s.vertices[i];
        const auto& b = s.vertices[(i + 1) % n];
        acc += a.x() * b.y() - b.x() * a.y();
      }
      return 0.5 * std::abs(acc);
    }
  }
  return 0.0;
}

inline Eigen::Vector2d shape_center(const ShapeSpec& s) {
  if (s.kind != ShapeSpec::Kind::polygon) return s.center;
  Eigen::Vector2d c{0, 0};
  for (const auto& v : s.vertices) c += v;
  return c / double(s.vertices.size());
}

// Uniform-lattice rasterization.  Nodes are lattice points strictly inside the
// shape; the Dirichlet condition lives on the true boundary via per-direction
// cut distances (fraction rho in (0,1] of delta to the first boundary
// crossing), which keeps the five-point operator symmetric while avoiding the
// O(delta) eigenvalue bias of a plain staircase.
struct CrossSectionDomain {
  ShapeSpec shape;
  double delta = 0.0;
  double a = 0.0;  // sup |t| over the closure
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<std::int64_t, 2>> lattice_index;
  // neighbor[m][d]: node id or -1; directions 0:+t2 1:-t2 2:+t3 3:-t3
  std::vector<std::array<int, 4>> neighbor;
  // cut_rho[m][d]: for missing neighbors, boundary distance / delta in (0,1]
  std::vector<std::array<double, 4>> cut_rho;

  int size() const { return int(nodes.size()); }
  double rasterized_area() const { return double(nodes.size()) * delta * delta; }
};

namespace detail {

// Fraction in (0,1] of the way from inside point p to p + delta*dir at which
// the boundary is crossed, located by bisection on the strict interior test.
inline double boundary_fraction(const ShapeSpec& s, const Eigen::Vector2d& p,
                                const Eigen::Vector2d& dir, double delta) {
  double lo = 0.0, hi = 1.0;  // p + lo*delta*dir inside, hi outside-or-boundary
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains_strict(s, p + mid * delta * dir))
      lo = mid;
    else
      hi = mid;
  }
  const double rho = 0.5 * (lo + hi);
  return std::clamp(rho, 1e-6, 1.0);
}

struct LatticeKeyHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
    return std::hash<std::int64_t>()(k.first * 0x9e3779b97f4a7c15LL + k.second);
  }
};

}  // namespace detail

inline CrossSectionDomain build_domain(const ShapeSpec& shape, double delta) {
  validate(shape);
  if (!(delta > 0.0)) throw ConfigError("build_domain: delta must be positive");

  CrossSectionDomain dom;
  dom.shape = shape;
  dom.delta = delta;
  dom.a = sup_point_norm(shape);

  // Bounding box in lattice indices.
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  switch (shape.kind) {
    case ShapeSpec::Kind::rectangle:
      xlo = shape.center.x() - 0.5 * shape.width;
      xhi = shape.center.x() + 0.5 * shape.width;
      ylo = shape.center.y() - 0.5 * shape.height;
      yhi = shape.center.y() + 0.5 * shape.height;
      break;
    case ShapeSpec::Kind::disk:
      xlo = shape.center.x() - shape.radius;
      xhi = shape.center.x() + shape.radius;
      ylo = shape.center.y() - shape.radius;
      yhi = shape.center.y() + shape.radius;
      break;
    case ShapeSpec::Kind::ellipse:
      xlo = shape.center.x() - shape.rx;
      xhi = shape.center.x() + shape.rx;
      ylo = shape.center.y() - shape.ry;
      yhi = shape.center.y() + shape.ry;
      break;
    case ShapeSpec::Kind::polygon:
      xlo = ylo = std::numeric_limits<double>::infinity();
      xhi = yhi = -std::numeric_limits<double>::infinity();
      for (const auto& v : shape.vertices) {
        xlo = std::min(xlo, v.x());
        xhi = std::max(xhi, v.x());
        ylo = std::min(ylo, v.y());
        yhi = std::max(yhi, v.y());
      }
      break;
  }
  const auto ilo = std::int64_t(std::floor(xlo / delta)) - 1;
  const auto ihi = std::int64_t(std::ceil(xhi / delta)) + 1;
  const auto jlo = std::int64_t(std::floor(ylo / delta)) - 1;
  const auto jhi = std::int64_t(std::ceil(yhi / delta)) + 1;

  std::unordered_map<std::pair<std::int64_t, std::int64_t>, int, detail::LatticeKeyHash> id;
  for (std::int64_t i = ilo; i <= ihi; ++i) {
    for (std::int64_t j = jlo; j <= jhi; ++j) {
      const Eigen::Vector2d p(double(i) * delta, double(j) * delta);
      if (contains_strict(shape, p)) {
        id.emplace(std::make_pair(i, j), int(dom.nodes.size()));
        dom.nodes.push_back(p);
        dom.lattice_index.push_back({i, j});
      }
    }
  }
  if (dom.nodes.empty())
    throw DiscretizationError("build_domain: no interior lattice nodes at delta=" + std::to_string(delta));

  const std::array<Eigen::Vector2d, 4> dirs = {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0),
                                               Eigen::Vector2d(0, 1), Eigen::Vector2d(0, -1)};
  const std::array<std::array<std::int64_t, 2>, 4> steps = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  dom.neighbor.assign(dom.nodes.size(), {-1, -1, -1, -1});
  dom.cut_rho.assign(dom.nodes.size(), {1.0, 1.0, 1.0, 1.0});
  for (int m = 0; m < dom.size(); ++m) {
    const auto [i, j] = std::make_pair(dom.lattice_index[m][0], dom.lattice_index[m][1]);
    for (int d = 0; d < 4; ++d) {
      const auto it = id.find(std::make_pair(i + steps[d][0], j + steps[d][1]));
      if (it != id.end()) {
        dom.neighbor[m][d] = it->second;
      } else {
        dom.cut_rho[m][d] = detail::boundary_fraction(shape, dom.nodes[m], dirs[d], delta);
      }
    }
  }

  // Connectivity: the ground state of a disconnected graph is not strictly
  // positive, so refuse such rasterizations outright.
  std::vector<int> mark(dom.nodes.size(), 0);
  std::vector<int> stack{0};
  mark[0] = 1;
  std::size_t seen = 1;
  while (!stack.empty()) {
    const int m = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) {
      const int nb = dom.neighbor[m][d];
      if (nb >= 0 && !mark[nb]) {
        mark[nb] = 1;
        ++seen;
        stack.push_back(nb);
      }
    }
  }
  if (seen != dom.nodes.size())
    throw DiscretizationError("build_domain: rasterized domain is disconnected at this delta");
  return dom;
}

// Rotational-symmetry probe about the origin.  Rasterizes the indicator of the
// shape and of its rotation by alpha on a fine lattice and measures the area
// of the symmetric difference.  "Asymmetric at alpha" means the difference
// exceeds tol_fraction * area(shape).
struct SymmetryReport {
  std::vector<double> alphas;
  std::vector<double> sym_difference_area;  // per alpha
  std::vector<bool> asymmetric;             // per alpha
  double area = 0.0;
  double tolerance = 0.0;
  bool any_asymmetric = false;
  double witness_alpha = 0.0;  // first alpha exceeding tolerance, if any
};

inline SymmetryReport check_rotational_symmetry(const ShapeSpec& shape,
                                                const std::vector<double>& alphas,
                                                double raster_delta = 0.0,
                                                double tol_fraction = 1e-3) {
  validate(shape);
  const double a = sup_point_norm(shape);
  double d = raster_delta > 0.0 ? raster_delta : a / 256.0;
  d = std::min(d, a / 64.0);  // keep enough cells to resolve the shape
  SymmetryReport rep;
  rep.area = area(shape);
  rep.tolerance = tol_fraction * rep.area;
  const auto n = std::int64_t(std::ceil(a / d)) + 1;
  for (double alpha : alphas) {
    const Eigen::Rotation2D<double> rot(-alpha);
    double diff = 0.0;
    for (std::int64_t i = -n; i <= n; ++i) {
      for (std::int64_t j = -n; j <= n; ++j) {
        const Eigen::Vector2d p(double(i) * d, double(j) * d);
        const bool in0 = contains_strict(shape, p);
        const bool in1 = contains_strict(shape, rot * p);
        if (in0 != in1) diff += d * d;
      }
    }
    rep.alphas.push_back(alpha);
    rep.sym_difference_area.push_back(diff);
    const bool asym = diff > rep.tolerance;
    rep.asymmetric.push_back(asym);
    if (asym && !rep.any_asymmetric) {
      rep.any_asymmetric = true;
      rep.witness_alpha = alpha;
    }
  }
  return rep;
}

inline std::vector<double> default_symmetry_alphas() {
  std::vector<double> v;
  for (int k = 1; k <= 31; ++k) v.push_back(std::numbers::pi * k / 16.0);
  return v;
}

}  // namespace twistlab
