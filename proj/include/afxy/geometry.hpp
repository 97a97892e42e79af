// geometry.hpp -- planar vectors, convex clipping, and region predicates
#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace afxy {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// counterclockwise rotation by pi/2: nu^perp = (-nu_y, nu_x)
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
// cross convention v x w = -<v, w^perp> = v_x w_y - v_y w_x
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) {
  double n = norm(a);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return {a.x / n, a.y / n};
}

struct BBox {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  void expand(Vec2 p) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  static BBox of(Vec2 p) { return {p.x, p.x, p.y, p.y}; }
  BBox merged(const BBox& o) const {
    return {std::min(xmin, o.xmin), std::max(xmax, o.xmax),
            std::min(ymin, o.ymin), std::max(ymax, o.ymax)};
  }
};

using Polygon = std::vector<Vec2>;

inline double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % p.size()];
    a += cross(u, v);
  }
  return std::abs(a) * 0.5;
}

// Sutherland-Hodgman clip of a convex polygon against <x,n> <= c.
inline Polygon clip_halfplane(const Polygon& poly, Vec2 n, double c) {
  Polygon out;
  size_t m = poly.size();
  if (m == 0) return out;
  for (size_t i = 0; i < m; ++i) {
    Vec2 a = poly[i];
    Vec2 b = poly[(i + 1) % m];
    double da = dot(a, n) - c;
    double db = dot(b, n) - c;
    if (da <= 0) out.push_back(a);
    if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
      double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

struct HalfPlaneConstraint {
  Vec2 n;     // outward normal
  double c;   // set is <x,n> < c (open) or <= c (closed)
};

// Convex set as an intersection of halfplanes.  `closed` selects whether the
// boundary belongs to the set; `scale` feeds the default tolerance.
struct ConvexSet {
  std::vector<HalfPlaneConstraint> planes;
  bool closed = false;
  double scale = 1.0;
  std::optional<BBox> box;

  bool contains(Vec2 p, double tol) const {
    for (const auto& h : planes) {
      double s = dot(p, h.n) - h.c;
      if (closed ? (s > tol) : (s >= -tol)) return false;
    }
    return true;
  }
  Polygon clip(Polygon poly) const {
    for (const auto& h : planes) {
      poly = clip_halfplane(poly, h.n, h.c);
      if (poly.empty()) break;
    }
    return poly;
  }
};

inline ConvexSet convex_rect(Vec2 nu, double len, double height, Vec2 center,
                             bool closed = false) {
  nu = normalized(nu);
  Vec2 np = perp(nu);
  ConvexSet s;
  s.closed = closed;
  s.scale = std::max(std::isfinite(len) ? len : height, height);
  if (std::isfinite(len)) {
    s.planes.push_back({np, dot(center, np) + len / 2});
    s.planes.push_back({-np, -dot(center, np) + len / 2});
  }
  s.planes.push_back({nu, dot(center, nu) + height / 2});
  s.planes.push_back({-nu, -dot(center, nu) + height / 2});
  if (std::isfinite(len)) {
    BBox b = BBox::of(center + (len / 2) * np + (height / 2) * nu);
    b.expand(center + (len / 2) * np - (height / 2) * nu);
    b.expand(center - (len / 2) * np + (height / 2) * nu);
    b.expand(center - (len / 2) * np - (height / 2) * nu);
    s.box = b;
  }
  return s;
}

inline ConvexSet convex_square(Vec2 nu, double rho, Vec2 center,
                               bool closed = false) {
  return convex_rect(nu, rho, rho, center, closed);
}

// H^nu_+ = {<x,nu> >= 0} (closed), H^nu_- = its complement (open).
inline ConvexSet convex_halfplane(Vec2 nu, int sign) {
  nu = normalized(nu);
  ConvexSet s;
  s.closed = (sign > 0);
  s.planes.push_back({(sign > 0) ? -nu : nu, 0.0});
  return s;
}

// Intersection of two convex sets (halfplane concatenation).
inline ConvexSet convex_intersect(const ConvexSet& a, const ConvexSet& b) {
  ConvexSet s = a;
  s.planes.insert(s.planes.end(), b.planes.begin(), b.planes.end());
  s.closed = a.closed && b.closed;
  s.scale = std::max(a.scale, b.scale);
  if (a.box && b.box) {
    s.box = BBox{std::max(a.box->xmin, b.box->xmin), std::min(a.box->xmax, b.box->xmax),
                 std::max(a.box->ymin, b.box->ymin), std::min(a.box->ymax, b.box->ymax)};
  } else if (a.box) {
    s.box = a.box;
  } else {
    s.box = b.box;
  }
  return s;
}

// Region tree.  Leaves are convex; Diff subtracts (typically closed) children;
// Union2 joins exactly two convex leaves.  This covers every set used by the
// constructions: rectangles, squares, halfplanes, strips, and the cross P_delta.
class Region {
 public:
  enum class Kind { Leaf, Diff, Union2 };

  static Region leaf(ConvexSet c) {
    Region r;
    r.kind_ = Kind::Leaf;
    r.leaf_ = std::move(c);
    return r;
  }
  static Region diff(Region a, Region b) {
    Region r;
    r.kind_ = Kind::Diff;
    r.a_ = std::make_shared<Region>(std::move(a));
    r.b_ = std::make_shared<Region>(std::move(b));
    return r;
  }
  static Region union2(Region a, Region b) {
    Region r;
    r.kind_ = Kind::Union2;
    r.a_ = std::make_shared<Region>(std::move(a));
    r.b_ = std::make_shared<Region>(std::move(b));
    return r;
  }

  Kind kind() const { return kind_; }
  const ConvexSet& as_leaf() const { return leaf_; }
  const Region& child_a() const { return *a_; }
  const Region& child_b() const { return *b_; }

  double scale() const {
    switch (kind_) {
      case Kind::Leaf: return leaf_.scale;
      case Kind::Diff: return a_->scale();
      case Kind::Union2: return std::max(a_->scale(), b_->scale());
    }
    return 1.0;
  }

  bool contains(Vec2 p) const { return contains(p, 1e-12 * scale()); }

  bool contains(Vec2 p, double tol) const {
    switch (kind_) {
      case Kind::Leaf: return leaf_.contains(p, tol);
      case Kind::Diff: return a_->contains(p, tol) && !b_->contains(p, tol);
      case Kind::Union2: return a_->contains(p, tol) || b_->contains(p, tol);
    }
    return false;
  }

  // Intersection of two region trees, valid for the shapes used here
  // (leaves, differences with convex bases, unions).
  static Region intersect(const Region& x, const Region& y) {
    if (x.kind_ == Kind::Union2)
      return union2(intersect(*x.a_, y), intersect(*x.b_, y));
    if (y.kind_ == Kind::Union2)
      return union2(intersect(x, *y.a_), intersect(x, *y.b_));
    if (x.kind_ == Kind::Leaf && y.kind_ == Kind::Leaf)
      return leaf(convex_intersect(x.leaf_, y.leaf_));
    if (x.kind_ == Kind::Leaf && y.kind_ == Kind::Diff)
      return diff(intersect(x, *y.a_), *y.b_);
    if (x.kind_ == Kind::Diff && y.kind_ == Kind::Leaf)
      return diff(intersect(*x.a_, y), *x.b_);
    // both differences: (A\B) cap (C\D) = (A cap C) \ (B u D)
    return diff(intersect(*x.a_, *y.a_), union2(*x.b_, *y.b_));
  }

  // Area of polygon cap region; open/closed flags are immaterial for areas.
  double intersection_area(const Polygon& poly) const {
    switch (kind_) {
      case Kind::Leaf:
        return polygon_area(leaf_.clip(poly));
      case Kind::Diff:
        return a_->intersection_area(poly) -
               intersect(*a_, *b_).intersection_area(poly);
      case Kind::Union2:
        return a_->intersection_area(poly) + b_->intersection_area(poly) -
               intersect(*a_, *b_).intersection_area(poly);
    }
    return 0.0;
  }

  // Closed triangle containment, exact up to the linear tolerance for convex
  // leaves and up to an area tolerance across set operations.
  bool tri_contains(const Polygon& tri) const {
    double tol = 1e-12 * scale();
    return tri_contains(tri, tol);
  }

  bool tri_contains(const Polygon& tri, double tol) const {
    switch (kind_) {
      case Kind::Leaf: {
        for (const Vec2& v : tri)
          if (!leaf_.contains(v, tol)) return false;
        return true;
      }
      case Kind::Diff:
        return a_->tri_contains(tri, tol) && !b_->tri_intersects(tri, tol);
      case Kind::Union2: {
        if (a_->tri_contains(tri, tol) || b_->tri_contains(tri, tol)) return true;
        for (const Vec2& v : tri)
          if (!contains(v, tol)) return false;
        double at = polygon_area(tri);
        double atol = 1e-10 * at + tol * tol;
        return intersection_area(tri) >= at - atol;
      }
    }
    return false;
  }

  bool tri_intersects(const Polygon& tri) const {
    return tri_intersects(tri, 1e-12 * scale());
  }

  bool tri_intersects(const Polygon& tri, double tol) const {
    double at = polygon_area(tri);
    double atol = 1e-10 * at + tol * tol;
    return intersection_area(tri) > atol;
  }

  std::optional<BBox> bbox() const {
    switch (kind_) {
      case Kind::Leaf: return leaf_.box;
      case Kind::Diff: return a_->bbox();
      case Kind::Union2: {
        auto ba = a_->bbox();
        auto bb = b_->bbox();
        if (ba && bb) return ba->merged(*bb);
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

 private:
  Kind kind_ = Kind::Leaf;
  ConvexSet leaf_;
  std::shared_ptr<Region> a_, b_;
};

// Shorthand constructors matching the geometric notation of the domain:
// R^nu_{l,h}(x0), Q^nu_rho(x0), H^nu_{+-}, and L^nu is kept implicit.
inline Region rect_region(Vec2 nu, double len, double height, Vec2 center = {},
                          bool closed = false) {
  return Region::leaf(convex_rect(nu, len, height, center, closed));
}
inline Region square_region(Vec2 nu, double rho, Vec2 center = {},
                            bool closed = false) {
  return Region::leaf(convex_square(nu, rho, center, closed));
}
inline Region halfplane_region(Vec2 nu, int sign) {
  return Region::leaf(convex_halfplane(nu, sign));
}

}  // namespace afxy
