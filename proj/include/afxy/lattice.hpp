// lattice.hpp -- integer-exact triangular lattice geometry: sites, sublattices,
// triangles, region enumeration, discrete boundaries, slices and chains
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "afxy/geometry.hpp"

namespace afxy {

inline constexpr double kSqrt3 = 1.7320508075688772935;

// Basis e1 = (1,0), e2 = (1/2, sqrt(3)/2); e3 = e2 - e1 also connects sites.
inline Vec2 basis_e(int alpha) {
  switch (alpha) {
    case 1: return {1.0, 0.0};
    case 2: return {0.5, kSqrt3 / 2};
    case 3: return {-0.5, kSqrt3 / 2};
  }
  throw std::invalid_argument("basis_e: alpha must be 1, 2 or 3");
}

struct LatticeIndex {
  std::int64_t z1 = 0;
  std::int64_t z2 = 0;
  friend bool operator==(LatticeIndex a, LatticeIndex b) {
    return a.z1 == b.z1 && a.z2 == b.z2;
  }
  friend bool operator!=(LatticeIndex a, LatticeIndex b) { return !(a == b); }
  friend bool operator<(LatticeIndex a, LatticeIndex b) {
    return a.z1 != b.z1 ? a.z1 < b.z1 : a.z2 < b.z2;
  }
  friend LatticeIndex operator+(LatticeIndex a, LatticeIndex b) {
    return {a.z1 + b.z1, a.z2 + b.z2};
  }
  friend LatticeIndex operator-(LatticeIndex a, LatticeIndex b) {
    return {a.z1 - b.z1, a.z2 - b.z2};
  }
};

struct LatticeIndexHash {
  size_t operator()(LatticeIndex p) const {
    std::uint64_t h = static_cast<std::uint64_t>(p.z1) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(p.z2) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<size_t>(h);
  }
};

inline Vec2 position(LatticeIndex p, double eps = 1.0) {
  if (!(eps > 0)) throw std::invalid_argument("position: eps must be positive");
  return {eps * (p.z1 + 0.5 * p.z2), eps * (kSqrt3 / 2) * p.z2};
}

// Sublattice label in {1,2,3}: (z1 - z2) mod 3 -> 0,1,2 maps to 1,2,3.
inline int sublattice_of(LatticeIndex p) {
  std::int64_t m = (p.z1 - p.z2) % 3;
  if (m < 0) m += 3;
  return static_cast<int>(m) + 1;
}

// Nearest lattice index to a point (componentwise rounding in basis coords).
inline LatticeIndex nearest_index(Vec2 x, double eps = 1.0) {
  double z2 = x.y * 2.0 / (kSqrt3 * eps);
  double z1 = x.x / eps - 0.5 * z2;
  LatticeIndex best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::int64_t a = static_cast<std::int64_t>(std::floor(z1)) - 1;
       a <= static_cast<std::int64_t>(std::ceil(z1)) + 1; ++a)
    for (std::int64_t b = static_cast<std::int64_t>(std::floor(z2)) - 1;
         b <= static_cast<std::int64_t>(std::ceil(z2)) + 1; ++b) {
      LatticeIndex cand{a, b};
      double d = norm(position(cand, eps) - x);
      if (d < best_d - 1e-15 ||
          (d < best_d + 1e-15 && cand < best)) {
        best_d = d;
        best = cand;
      }
    }
  return best;
}

// Exact conversion of a lattice vector given in plane coordinates.
inline LatticeIndex to_lattice_vector(Vec2 v) {
  double z2 = v.y * 2.0 / kSqrt3;
  double z1 = v.x - 0.5 * z2;
  LatticeIndex z{static_cast<std::int64_t>(std::llround(z1)),
                 static_cast<std::int64_t>(std::llround(z2))};
  Vec2 back = position(z, 1.0);
  if (norm(back - v) > 1e-9)
    throw std::invalid_argument("to_lattice_vector: not a lattice vector");
  return z;
}

enum class Orientation { up, down };

// A unit triangle of the lattice; i, j, k are the vertices in sublattices
// 1, 2, 3 respectively.  Up triangles have (i,j,k) counterclockwise.
struct Triangle {
  LatticeIndex i, j, k;
  Orientation orient = Orientation::up;

  std::array<LatticeIndex, 3> vertices() const { return {i, j, k}; }

  std::array<Vec2, 3> positions(double eps) const {
    return {position(i, eps), position(j, eps), position(k, eps)};
  }

  Polygon polygon(double eps) const {
    auto p = positions(eps);
    return {p[0], p[1], p[2]};
  }

  Vec2 barycenter(double eps) const {
    auto p = positions(eps);
    return {(p[0].x + p[1].x + p[2].x) / 3.0, (p[0].y + p[1].y + p[2].y) / 3.0};
  }

  // Anchor: up = {p, p+e1, p+e2}, down = {p, p+e1, p+e1-e2}.
  LatticeIndex anchor() const {
    if (orient == Orientation::up) {
      LatticeIndex mn = std::min(std::min(i, j), k);
      return mn;
    }
    // for the down triangle the anchor is the vertex with both others ahead
    // in the +e1 / +e1-e2 pattern; recover it from the vertex set
    for (LatticeIndex v : vertices()) {
      bool has1 = false, has2 = false;
      for (LatticeIndex w : vertices()) {
        if (w == v + LatticeIndex{1, 0}) has1 = true;
        if (w == v + LatticeIndex{1, -1}) has2 = true;
      }
      if (has1 && has2) return v;
    }
    throw std::logic_error("Triangle::anchor: malformed down triangle");
  }

  friend bool operator==(const Triangle& a, const Triangle& b) {
    return a.i == b.i && a.j == b.j && a.k == b.k && a.orient == b.orient;
  }
};

struct TriangleHash {
  size_t operator()(const Triangle& t) const {
    size_t h = LatticeIndexHash{}(t.i);
    h = h * 1315423911u + LatticeIndexHash{}(t.j);
    h = h * 1315423911u + LatticeIndexHash{}(t.k);
    return h * 2u + (t.orient == Orientation::up ? 0 : 1);
  }
};

inline Triangle triangle_from_vertices(LatticeIndex a, LatticeIndex b,
                                       LatticeIndex c, Orientation o) {
  Triangle t;
  t.orient = o;
  for (LatticeIndex v : {a, b, c}) {
    switch (sublattice_of(v)) {
      case 1: t.i = v; break;
      case 2: t.j = v; break;
      case 3: t.k = v; break;
    }
  }
  return t;
}

inline Triangle make_up(LatticeIndex p) {
  return triangle_from_vertices(p, p + LatticeIndex{1, 0}, p + LatticeIndex{0, 1},
                                Orientation::up);
}

inline Triangle make_down(LatticeIndex p) {
  return triangle_from_vertices(p, p + LatticeIndex{1, 0}, p + LatticeIndex{1, -1},
                                Orientation::down);
}

// The <=3 triangles sharing a side with T; an up triangle has exactly three
// down neighbors and vice versa.
inline std::vector<Triangle> neighbors(const Triangle& t) {
  LatticeIndex p = t.anchor();
  if (t.orient == Orientation::up) {
    return {make_down(p), make_down(p + LatticeIndex{-1, 1}),
            make_down(p + LatticeIndex{0, 1})};
  }
  return {make_up(p), make_up(p + LatticeIndex{1, -1}),
          make_up(p + LatticeIndex{0, -1})};
}

namespace detail {
inline std::array<std::int64_t, 4> index_range_for_bbox(const BBox& b, double eps,
                                                        int pad = 2) {
  // corners -> basis coordinates, padded
  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1;
  double lo2 = lo1, hi2 = -lo1;
  for (double x : {b.xmin, b.xmax})
    for (double y : {b.ymin, b.ymax}) {
      double z2 = y * 2.0 / (kSqrt3 * eps);
      double z1 = x / eps - 0.5 * z2;
      lo1 = std::min(lo1, z1);
      hi1 = std::max(hi1, z1);
      lo2 = std::min(lo2, z2);
      hi2 = std::max(hi2, z2);
    }
  return {static_cast<std::int64_t>(std::floor(lo1)) - pad,
          static_cast<std::int64_t>(std::ceil(hi1)) + pad,
          static_cast<std::int64_t>(std::floor(lo2)) - pad,
          static_cast<std::int64_t>(std::ceil(hi2)) + pad};
}

inline LatticeIndex min_vertex(const Triangle& t) {
  return std::min(std::min(t.i, t.j), t.k);
}
}  // namespace detail

// All lattice triangles with closed hull contained in the region, in a
// deterministic order (lexicographic lowest vertex, then up before down).
inline std::vector<Triangle> triangles_in(const Region& region, double eps) {
  auto box = region.bbox();
  if (!box)
    throw std::invalid_argument("triangles_in: region is unbounded");
  auto [lo1, hi1, lo2, hi2] = detail::index_range_for_bbox(*box, eps);
  std::vector<Triangle> out;
  for (std::int64_t z1 = lo1; z1 <= hi1; ++z1)
    for (std::int64_t z2 = lo2; z2 <= hi2; ++z2) {
      LatticeIndex p{z1, z2};
      for (Triangle t : {make_up(p), make_down(p)}) {
        if (region.tri_contains(t.polygon(eps))) out.push_back(t);
      }
    }
  std::sort(out.begin(), out.end(), [](const Triangle& a, const Triangle& b) {
    LatticeIndex ma = detail::min_vertex(a), mb = detail::min_vertex(b);
    if (ma != mb) return ma < mb;
    return a.orient == Orientation::up && b.orient == Orientation::down;
  });
  return out;
}

// Sites of Lambda_eps in a bounding box (inclusive index range), sorted.
inline std::vector<LatticeIndex> sites_in_bbox(const BBox& b, double eps, int pad = 2) {
  auto [lo1, hi1, lo2, hi2] = detail::index_range_for_bbox(b, eps, pad);
  std::vector<LatticeIndex> out;
  for (std::int64_t z1 = lo1; z1 <= hi1; ++z1)
    for (std::int64_t z2 = lo2; z2 <= hi2; ++z2) out.push_back({z1, z2});
  return out;
}

inline double dist_to_square_boundary(Vec2 x, Vec2 nu, double rho, Vec2 center = {}) {
  Vec2 d = x - center;
  double a = std::abs(dot(d, perp(nu)));
  double b = std::abs(dot(d, nu));
  if (a <= rho / 2 && b <= rho / 2) return rho / 2 - std::max(a, b);
  return std::hypot(std::max(a - rho / 2, 0.0), std::max(b - rho / 2, 0.0));
}

// Discrete boundary of Q^nu_rho: sites within 3*eps of the square's boundary
// and with sign*<nu,x> >= 3*eps.
inline std::vector<LatticeIndex> discrete_boundary(Vec2 nu, double rho, double eps,
                                                   int sign, Vec2 center = {}) {
  if (!(6 * eps < rho))
    throw std::invalid_argument("discrete_boundary: requires 6*eps < rho");
  nu = normalized(nu);
  double tol = 1e-12 * rho;
  BBox b = BBox::of(center + Vec2{rho, rho});
  b.expand(center - Vec2{rho, rho});
  std::vector<LatticeIndex> out;
  for (LatticeIndex p : sites_in_bbox(b, eps)) {
    Vec2 x = position(p, eps);
    if (sign * dot(nu, x - center) < 3 * eps - tol) continue;
    if (dist_to_square_boundary(x, nu, rho, center) > 3 * eps + tol) continue;
    out.push_back(p);
  }
  if (out.empty())
    throw std::runtime_error("discrete_boundary: empty set (eps too large for rho)");
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Slices Sigma^{alpha,z} and the in-slice recursion.

struct SliceId {
  int alpha = 1;
  std::int64_t z = 0;
};

// Integer band coordinate: <p, e_alpha^perp> = (sqrt(3)/2) * band_coord(p).
inline std::int64_t band_coord(LatticeIndex p, int alpha) {
  switch (alpha) {
    case 1: return p.z2;
    case 2: return -p.z1;
    case 3: return -(p.z1 + p.z2);
  }
  throw std::invalid_argument("band_coord: alpha must be 1, 2 or 3");
}

// Slice band containing a triangle: all vertices have coordinate z or z+1.
inline std::int64_t slice_of(const Triangle& t, int alpha) {
  std::int64_t lo = band_coord(t.i, alpha);
  std::int64_t hi = lo;
  for (LatticeIndex v : {t.j, t.k}) {
    lo = std::min(lo, band_coord(v, alpha));
    hi = std::max(hi, band_coord(v, alpha));
  }
  if (hi != lo + 1)
    throw std::logic_error("slice_of: malformed triangle");
  return lo;
}

namespace detail {
// Lattice move (3/2) d + sigma (sqrt(3)/2) e_alpha^perp for d = dir_sign*e_alpha.
inline LatticeIndex slice_move(int alpha, int dir_sign, int sigma) {
  Vec2 d = static_cast<double>(dir_sign) * basis_e(alpha);
  Vec2 m = 1.5 * d + (sigma * kSqrt3 / 2) * perp(basis_e(alpha));
  return to_lattice_vector(m);
}
}  // namespace detail

// Triangles T_0,...,T_count of the half-slice recursion: each vertex advances
// by (3/2) e_alpha +- (sqrt(3)/2) e_alpha^perp, flipping between the two band
// lines at every step; T_{2h} = T_0 + 3h e_alpha.
inline std::vector<Triangle> half_slice(const Triangle& t0, int alpha, int count,
                                        int dir_sign = +1) {
  std::int64_t z = slice_of(t0, alpha);
  LatticeIndex up_move = detail::slice_move(alpha, dir_sign, +1);
  LatticeIndex down_move = detail::slice_move(alpha, dir_sign, -1);
  std::vector<Triangle> out;
  out.reserve(count + 1);
  Triangle t = t0;
  out.push_back(t);
  for (int h = 0; h < count; ++h) {
    Triangle n = t;
    for (LatticeIndex* v : {&n.i, &n.j, &n.k}) {
      *v = *v + ((band_coord(*v, alpha) == z) ? up_move : down_move);
    }
    n.orient = (t.orient == Orientation::up) ? Orientation::down : Orientation::up;
    out.push_back(n);
    t = n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chain of triangles along a line L = {<x,nu> = offset}.

struct Chain {
  std::vector<Triangle> triangles;  // one per slice, consecutive z
  Vec2 nu;
  double line_offset = 0.0;
  int alpha = 1;
  std::int64_t z_lo = 0;
  double eps = 1.0;
};

namespace detail {
inline bool closed_tri_meets_line(const Triangle& t, Vec2 nu, double offset,
                                  double eps, double tol) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Vec2 p : t.positions(eps)) {
    double s = dot(p, nu) - offset;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return lo <= tol && hi >= -tol;
}
}  // namespace detail

// Build the chain T_z for z in [z_lo, z_hi]: upward triangles, one per slice,
// each meeting L and its successor.  Candidates at each step are the shifts by
// eps*tau_beta*e_beta and eps*tau_gamma*e_gamma; the sign test of the chain
// lemma guarantees one of them meets L.
inline Chain build_chain(Vec2 nu, double line_offset, int alpha,
                         std::int64_t z_lo, std::int64_t z_hi, double eps) {
  nu = normalized(nu);
  Vec2 ea = basis_e(alpha);
  if (std::abs(dot(ea, perp(nu))) > 0.5 + 1e-12)
    throw std::invalid_argument(
        "build_chain: requires |<e_alpha, nu_perp>| <= 1/2");
  if (z_hi < z_lo) throw std::invalid_argument("build_chain: empty z range");
  double tol = 1e-12 * std::max(1.0, std::abs(line_offset));

  // seed: first up triangle in slice z_lo meeting L, scanning outward from the
  // point where L crosses the middle of the band
  Vec2 eap = perp(ea);
  // solve <x,nu> = offset, <x,eap> = eps*sqrt(3)/2*(z_lo + 1/2)
  double rhs2 = eps * (kSqrt3 / 2) * (static_cast<double>(z_lo) + 0.5);
  double det = nu.x * eap.y - nu.y * eap.x;
  if (std::abs(det) < 1e-9) det = (det < 0 ? -1.0 : 1.0) * 1e-9;
  Vec2 xmid{(line_offset * eap.y - rhs2 * nu.y) / det,
            (nu.x * rhs2 - eap.x * line_offset) / det};
  LatticeIndex c = nearest_index(xmid, eps);
  Triangle seed;
  bool found = false;
  for (int radius = 0; radius <= 8 && !found; ++radius) {
    std::vector<LatticeIndex> ring;
    for (std::int64_t a = -radius; a <= radius; ++a)
      for (std::int64_t b = -radius; b <= radius; ++b)
        if (std::max(std::abs(a), std::abs(b)) == radius)
          ring.push_back(c + LatticeIndex{a, b});
    std::sort(ring.begin(), ring.end());
    for (LatticeIndex p : ring) {
      Triangle t = make_up(p);
      if (slice_of(t, alpha) != z_lo) continue;
      if (detail::closed_tri_meets_line(t, nu, line_offset, eps, tol)) {
        seed = t;
        found = true;
        break;
      }
    }
  }
  if (!found)
    throw std::runtime_error("build_chain: no seed triangle found near line");

  // signed unit shifts tau_beta e_beta, tau_gamma e_gamma toward the next band
  std::array<int, 2> others{};
  int oi = 0;
  for (int a = 1; a <= 3; ++a)
    if (a != alpha) others[oi++] = a;
  auto signed_shift = [&](int beta) {
    double s = dot(basis_e(beta), perp(ea));
    int tau = (s > 0) ? +1 : -1;
    Vec2 e = basis_e(beta);
    LatticeIndex v = to_lattice_vector(e);
    return (tau > 0) ? v : LatticeIndex{-v.z1, -v.z2};
  };
  LatticeIndex shift_b = signed_shift(others[0]);
  LatticeIndex shift_g = signed_shift(others[1]);

  Chain chain;
  chain.nu = nu;
  chain.line_offset = line_offset;
  chain.alpha = alpha;
  chain.z_lo = z_lo;
  chain.eps = eps;
  chain.triangles.push_back(seed);
  Triangle t = seed;
  for (std::int64_t z = z_lo; z < z_hi; ++z) {
    // shifting by a unit vector permutes the sublattice labels
    Triangle tb = triangle_from_vertices(t.i + shift_b, t.j + shift_b,
                                         t.k + shift_b, Orientation::up);
    Triangle tg = triangle_from_vertices(t.i + shift_g, t.j + shift_g,
                                         t.k + shift_g, Orientation::up);
    Triangle next;
    if (detail::closed_tri_meets_line(tb, nu, line_offset, eps, tol)) {
      next = tb;
    } else if (detail::closed_tri_meets_line(tg, nu, line_offset, eps, tol)) {
      next = tg;
    } else {
      throw std::runtime_error("build_chain: no candidate meets the line");
    }
    chain.triangles.push_back(next);
    t = next;
  }
  return chain;
}

// Line-oriented debug dump: `z1_i z2_i z1_j z2_j z1_k z2_k orient`.
inline std::string dump_triangles(const std::vector<Triangle>& ts) {
  std::string out;
  char buf[160];
  for (const Triangle& t : ts) {
    std::snprintf(buf, sizeof buf, "%lld %lld %lld %lld %lld %lld %s\n",
                  static_cast<long long>(t.i.z1), static_cast<long long>(t.i.z2),
                  static_cast<long long>(t.j.z1), static_cast<long long>(t.j.z2),
                  static_cast<long long>(t.k.z1), static_cast<long long>(t.k.z2),
                  t.orient == Orientation::up ? "up" : "down");
    out += buf;
  }
  return out;
}

}  // namespace afxy
