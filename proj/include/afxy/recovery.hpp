// recovery.hpp -- constructive side of the limit analysis: paving a polygonal
// chirality interface with shifted cell minimizers, and enforcing the
// ground-state boundary data on a low-energy field via strip, chain,
// winding control, and half-slice interpolation
#pragma once

#include <map>
#include <optional>

#include "afxy/optimize.hpp"

namespace afxy {

// ---------------------------------------------------------------------------
// Polygonal interface.

struct InterfaceSegment {
  Vec2 a, b;    // endpoints, b = a + len * perp(nu)
  Vec2 nu;      // unit normal, points into the chi = +1 phase
  double len = 0.0;
};

struct PolygonalInterface {
  std::vector<Vec2> vertices;
  std::vector<int> normal_signs;  // orientation sign per segment
  std::vector<InterfaceSegment> segments;

  static PolygonalInterface build(std::vector<Vec2> verts, std::vector<int> signs) {
    if (verts.size() < 2) throw std::invalid_argument("interface: need >= 2 vertices");
    if (signs.size() != verts.size() - 1)
      throw std::invalid_argument("interface: one normal sign per segment");
    PolygonalInterface pi;
    pi.vertices = std::move(verts);
    pi.normal_signs = std::move(signs);
    for (size_t n = 0; n + 1 < pi.vertices.size(); ++n) {
      InterfaceSegment s;
      s.a = pi.vertices[n];
      s.b = pi.vertices[n + 1];
      Vec2 d = s.b - s.a;
      s.len = norm(d);
      if (s.len <= 0) throw std::invalid_argument("interface: degenerate segment");
      Vec2 t = (1.0 / s.len) * d;
      double sg = pi.normal_signs[n] >= 0 ? 1.0 : -1.0;
      s.nu = sg * Vec2{t.y, -t.x};  // perp(nu) = t for sg = +1
      pi.segments.push_back(s);
    }
    return pi;
  }

  double total_length() const {
    double l = 0;
    for (const auto& s : segments) l += s.len;
    return l;
  }

  // target chirality: the side of the nearest segment, +1 on the segment.
  double target_chi(Vec2 x) const {
    double best_d = std::numeric_limits<double>::infinity();
    double side = 1.0;
    for (const auto& s : segments) {
      Vec2 t = (1.0 / s.len) * (s.b - s.a);
      double u = std::clamp(dot(x - s.a, t), 0.0, s.len);
      Vec2 proj = s.a + u * t;
      double d = norm(x - proj);
      if (d < best_d) {
        best_d = d;
        side = dot(x - s.a, s.nu) >= 0 ? 1.0 : -1.0;
      }
    }
    return side;
  }
};

// ---------------------------------------------------------------------------
// Paving plan.

struct PavingPlan {
  double rho = 0, eps = 0;
  double clearance = 0;  // c(nu1,nu2), rounded up to 2 decimals
  struct Cube {
    int segment = 0;
    int m = 0;
    LatticeIndex center;  // in Lambda^1
  };
  std::vector<Cube> cubes;
  std::vector<int> counts;  // M^n per segment
};

namespace detail {

inline LatticeIndex nearest_sublattice1(Vec2 x, double eps) {
  LatticeIndex c = nearest_index(x, eps);
  LatticeIndex best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::int64_t a = -2; a <= 2; ++a)
    for (std::int64_t b = -2; b <= 2; ++b) {
      LatticeIndex cand = c + LatticeIndex{a, b};
      if (sublattice_of(cand) != 1) continue;
      double d = norm(position(cand, eps) - x);
      if (d < best_d - 1e-15 || (d < best_d + 1e-15 && cand < best)) {
        best_d = d;
        best = cand;
      }
    }
  return best;
}

inline bool squares_overlap(Vec2 nu1, Vec2 c1, Vec2 nu2, Vec2 c2, double rho) {
  Polygon p;
  Vec2 t1 = perp(nu1);
  p.push_back(c1 + (rho / 2) * t1 + (rho / 2) * nu1);
  p.push_back(c1 - (rho / 2) * t1 + (rho / 2) * nu1);
  p.push_back(c1 - (rho / 2) * t1 - (rho / 2) * nu1);
  p.push_back(c1 + (rho / 2) * t1 - (rho / 2) * nu1);
  double a = polygon_area(convex_square(nu2, rho, c2).clip(p));
  return a > 1e-12 * rho * rho;
}

}  // namespace detail

inline PavingPlan plan_paving(const PolygonalInterface& interface, double rho,
                              double eps) {
  if (!(rho > 0 && eps > 0 && 6 * eps < rho))
    throw std::invalid_argument("plan_paving: requires 0 < 6*eps < rho");
  PavingPlan plan;
  plan.rho = rho;
  plan.eps = eps;
  // corner clearance c >= 1/2 + cot(theta/2)/2, rounded up to 2 decimals
  double c = 0.5;
  const auto& segs = interface.segments;
  for (size_t n = 0; n + 1 < segs.size(); ++n) {
    Vec2 in = (1.0 / segs[n].len) * (segs[n].b - segs[n].a);
    Vec2 outd = (1.0 / segs[n + 1].len) * (segs[n + 1].b - segs[n + 1].a);
    double cosang = std::clamp(dot(-in, outd), -1.0, 1.0);
    double theta = std::acos(cosang);  // corner opening angle in (0, pi]
    if (theta < 1e-9)
      throw std::invalid_argument("plan_paving: degenerate corner angle");
    c = std::max(c, 0.5 + 0.5 / std::tan(theta / 2));
  }
  plan.clearance = std::ceil(c * 100.0) / 100.0;

  for (size_t n = 0; n < segs.size(); ++n) {
    const InterfaceSegment& s = segs[n];
    Vec2 t = (1.0 / s.len) * (s.b - s.a);
    bool corner_at_start = n > 0;
    bool corner_at_end = n + 1 < segs.size();
    double start_off = corner_at_start ? plan.clearance * rho : 0.0;
    double reserved = (corner_at_start ? plan.clearance * rho : 0.0) +
                      (corner_at_end ? plan.clearance * rho : 0.0);
    int M = static_cast<int>(std::floor((s.len - reserved) / (rho + 5 * eps)));
    if (M < 0)
      throw std::invalid_argument("plan_paving: segment too short for rho");
    plan.counts.push_back(M);
    for (int m = 0; m <= M; ++m) {
      Vec2 nominal = s.a + (start_off + m * (rho + 5 * eps)) * t;
      LatticeIndex center = detail::nearest_sublattice1(nominal, eps);
      if (norm(position(center, eps) - nominal) > 2 * eps + 1e-12)
        throw std::runtime_error("plan_paving: no Lambda^1 center within 2*eps");
      plan.cubes.push_back({static_cast<int>(n), m, center});
    }
  }
  // pairwise disjointness
  for (size_t i = 0; i < plan.cubes.size(); ++i)
    for (size_t j = i + 1; j < plan.cubes.size(); ++j) {
      const auto& ci = plan.cubes[i];
      const auto& cj = plan.cubes[j];
      if (detail::squares_overlap(segs[ci.segment].nu, position(ci.center, eps),
                                  segs[cj.segment].nu, position(cj.center, eps),
                                  rho))
        throw std::runtime_error("plan_paving: overlapping cubes");
    }
  return plan;
}

// ---------------------------------------------------------------------------
// Paving a chirality interface with shifted cell minimizers.

// cell_fields[n] must be a solved cell field for normal nu_n at (rho, eps).
// The pasted field equals the shifted cell field inside each cube and the
// matching ground state outside; centers in Lambda^1 keep the sublattice
// labels aligned, so the pinned data glue exactly.
inline SpinField pave_interface(const PolygonalInterface& interface, double rho,
                                double eps, const std::vector<SpinField>& cell_fields,
                                const Region& omega,
                                const PavingPlan* plan_in = nullptr) {
  if (cell_fields.size() != interface.segments.size())
    throw std::invalid_argument("pave_interface: one cell field per segment");
  PavingPlan plan = plan_in ? *plan_in : plan_paving(interface, rho, eps);

  auto box = omega.bbox();
  if (!box) throw std::invalid_argument("pave_interface: omega must be bounded");
  SpinField out;
  out.eps = eps;
  for (LatticeIndex s : sites_in_bbox(*box, eps)) {
    Vec2 x = position(s, eps);
    bool assigned = false;
    for (const auto& cube : plan.cubes) {
      Vec2 c = position(cube.center, eps);
      const Vec2 nu = interface.segments[cube.segment].nu;
      if (!convex_square(nu, rho, c).contains(x, 1e-12 * rho)) continue;
      LatticeIndex shifted = s - cube.center;
      const SpinField& cf = cell_fields[cube.segment];
      if (cf.has(shifted)) {
        out.angles[s] = cf.angle(shifted);
      } else {
        // cube sites the cell problem dropped: ground data by the cube side
        GroundStateKind k = dot(x - c, nu) >= 0 ? GroundStateKind::pos
                                                : GroundStateKind::neg;
        out.angles[s] = ground_angle(k, s);
      }
      assigned = true;
      break;
    }
    if (!assigned) {
      GroundStateKind k = interface.target_chi(x) > 0 ? GroundStateKind::pos
                                                      : GroundStateKind::neg;
      out.angles[s] = ground_angle(k, s);
    }
  }
  return out;
}

struct PavingReport {
  struct CubeEnergy {
    int segment, m;
    double energy;
  };
  std::vector<CubeEnergy> per_cube;
  double total = 0, leftover = 0, l1_error = 0;
  double leftover_coeff = 0;  // leftover / (rho + eps/rho)
  double l1_coeff = 0;        // l1_error / (rho * interface length)
  double bound_rhs = 0;       // sum (M_n + 1) * cell_min_n + leftover
  bool cube_energies_match = true;
};

inline PavingReport evaluate_paving(const SpinField& field,
                                    const PolygonalInterface& interface,
                                    const PavingPlan& plan,
                                    const std::vector<double>& cell_minima,
                                    const Region& omega) {
  PavingReport rep;
  double rho = plan.rho, eps = plan.eps;
  std::vector<Region> cube_regions;
  for (const auto& cube : plan.cubes)
    cube_regions.push_back(square_region(interface.segments[cube.segment].nu, rho,
                                         position(cube.center, eps)));
  std::vector<double> cube_e(plan.cubes.size(), 0.0);
  double area = kSqrt3 / 4 * eps * eps;
  for (const Triangle& t : triangles_in(omega, eps)) {
    double e = energy_triangle(field, t);
    rep.total += e;
    bool in_cube = false;
    for (size_t i = 0; i < cube_regions.size(); ++i) {
      if (cube_regions[i].tri_contains(t.polygon(eps))) {
        cube_e[i] += e;
        in_cube = true;
        break;
      }
    }
    if (!in_cube) rep.leftover += e;
    rep.l1_error += area * std::abs(chirality_triangle(field, t) -
                                    interface.target_chi(t.barycenter(eps)));
  }
  for (size_t i = 0; i < plan.cubes.size(); ++i) {
    rep.per_cube.push_back({plan.cubes[i].segment, plan.cubes[i].m, cube_e[i]});
    double want = cell_minima.at(plan.cubes[i].segment);
    if (std::abs(cube_e[i] - want) > 1e-9 * (1 + std::abs(want)))
      rep.cube_energies_match = false;
  }
  rep.leftover_coeff = rep.leftover / (rho + eps / rho);
  rep.l1_coeff = rep.l1_error / (rho * interface.total_length());
  rep.bound_rhs = rep.leftover;
  for (size_t n = 0; n < interface.segments.size(); ++n)
    rep.bound_rhs += (plan.counts[n] + 1) * cell_minima.at(n);
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary enforcement (the lower-bound modification).

struct EnforceDiagnostics {
  StripChoice strip;
  double sigma_eps = 0;
  double input_energy = 0, output_energy = 0;
  struct PieceInfo {
    std::string name;
    int m_winding = 0;
    int n_steps = 0;
    int slices = 0;
  };
  std::vector<PieceInfo> pieces;
  std::size_t boundary_layer_triangles = 0;  // count of T meeting dP_delta
};

namespace detail {

struct EnforcePiece {
  std::string name;
  Vec2 w;              // outward axis
  Vec2 chain_nu;       // chain line normal (w up to sign)
  double line_offset;  // chain line {<x, chain_nu> = line_offset}
  int alpha;           // slice direction index
  int dir_sign;        // growth along dir_sign * e_alpha
  Region start;        // chain triangles must lie here
  int target;          // +1 -> u^pos, -1 -> u^neg
  // vertex filter for applying interpolated values
  Vec2 trans_axis;     // transverse coordinate axis
  double trans_max;    // |<x, trans_axis>| <= trans_max
  double trans_min;    // |<x, trans_axis>| >= trans_min (0 if unused)
  int side_sign;       // 0: none; else require side_sign*<x,nu_global> > 0
  Vec2 nu_global;
};

inline int best_alpha(Vec2 v) {
  int alpha = 1;
  double best = -1;
  for (int a = 1; a <= 3; ++a) {
    double s = std::abs(dot(basis_e(a), v));
    if (s > best + 1e-12) {
      best = s;
      alpha = a;
    }
  }
  return alpha;
}

}  // namespace detail

// Modifies u on Q^nu so that it equals u^pos on the upper discrete boundary
// and u^neg on the lower one, following the strip / chain / winding /
// interpolation construction.  Throws when a hypothesis fails, naming the
// step.
inline SpinField enforce_boundary(const SpinField& u, Vec2 nu, double delta,
                                  double eps, EnforceDiagnostics* diag = nullptr) {
  nu = normalized(nu);
  if (!(delta > 0 && delta < 0.125))
    throw std::invalid_argument("enforce_boundary: delta must be in (0, 1/8)");
  // step 1: low-energy strip
  StripChoice sc = select_strip(u, nu, delta, eps);
  const double r = sc.r;
  double sigma_eps = sc.g_value / eps;
  if (diag) {
    diag->strip = sc;
    diag->sigma_eps = sigma_eps;
  }

  Vec2 nup = perp(nu);
  double line_level = r / 2 + 3 * eps;

  std::vector<detail::EnforcePiece> pieces;
  {
    int alpha = detail::best_alpha(nu);
    int beta = detail::best_alpha(nup);
    double bar_half = (1 - 5 * delta) / 2;
    double inner_half = 3 * delta / 2;
    // top / bottom
    for (int sgn : {+1, -1}) {
      detail::EnforcePiece p;
      p.name = sgn > 0 ? "top" : "bottom";
      p.w = static_cast<double>(sgn) * nu;
      p.chain_nu = nu;
      p.line_offset = sgn * line_level;
      p.alpha = alpha;
      p.dir_sign = dot(basis_e(alpha), p.w) > 0 ? +1 : -1;
      p.start = rect_region(nu, r, 6 * eps, line_level * p.w);
      p.target = sgn;
      p.trans_axis = nup;
      p.trans_max = bar_half + 1.5 * eps;
      p.trans_min = 0;
      p.side_sign = 0;
      p.nu_global = nu;
      pieces.push_back(p);
    }
    // left / right, split into the two chirality sides
    for (int sgn : {+1, -1}) {
      for (int side : {+1, -1}) {
        detail::EnforcePiece p;
        p.name = std::string(sgn > 0 ? "left" : "right") +
                 (side > 0 ? "-pos" : "-neg");
        p.w = static_cast<double>(sgn) * nup;
        p.chain_nu = nup;
        p.line_offset = sgn * line_level;
        p.alpha = beta;
        p.dir_sign = dot(basis_e(beta), p.w) > 0 ? +1 : -1;
        ConvexSet wall = convex_rect(nup, r, 6 * eps, line_level * p.w);
        ConvexSet halfsp = convex_halfplane(static_cast<double>(side) * nu, +1);
        Region base = Region::leaf(convex_intersect(wall, halfsp));
        p.start = Region::diff(std::move(base),
                               rect_region(nu, 1.0, delta, {}, true));
        p.target = side;
        p.trans_axis = nu;
        p.trans_max = bar_half + 1.5 * eps;
        p.trans_min = inner_half - 1.5 * eps;
        p.side_sign = side;
        p.nu_global = nu;
        pieces.push_back(p);
      }
    }
  }

  // interpolated assignments, filtered by each piece's application zone
  std::unordered_map<LatticeIndex, double, LatticeIndexHash> interp;
  for (const auto& piece : pieces) {
    // chain across the bands meeting the start region
    auto sbox = piece.start.bbox();
    if (!sbox) throw std::logic_error("enforce_boundary: unbounded start region");
    std::int64_t z_lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t z_hi = std::numeric_limits<std::int64_t>::min();
    for (double cx : {sbox->xmin, sbox->xmax})
      for (double cy : {sbox->ymin, sbox->ymax}) {
        Vec2 corner{cx, cy};
        double band = dot(corner, perp(basis_e(piece.alpha))) / (kSqrt3 / 2 * eps);
        z_lo = std::min(z_lo, static_cast<std::int64_t>(std::floor(band)) - 2);
        z_hi = std::max(z_hi, static_cast<std::int64_t>(std::ceil(band)) + 2);
      }
    Chain chain = build_chain(piece.chain_nu, piece.line_offset, piece.alpha,
                              z_lo, z_hi, eps);
    std::vector<int> in_start;
    for (size_t idx = 0; idx < chain.triangles.size(); ++idx) {
      if (piece.start.tri_contains(chain.triangles[idx].polygon(eps)))
        in_start.push_back(static_cast<int>(idx));
    }
    if (in_start.empty())
      throw std::runtime_error("enforce_boundary: no chain triangle inside strip piece " +
                               piece.name);
    int z0 = in_start.front();

    // step 3: recursive lifts and the winding bound
    Chain sub;
    sub.eps = eps;
    sub.triangles.assign(chain.triangles.begin() + z0, chain.triangles.end());
    ChainLifts lifts = chain_lifts(u, sub);
    double drift = 0;
    for (int idx : in_start) {
      int k = idx - z0;
      drift = std::max({drift, std::abs(lifts.theta_i[k] - lifts.theta_i[0]),
                        std::abs(lifts.theta_j[k] - lifts.theta_j[0]),
                        std::abs(lifts.theta_k[k] - lifts.theta_k[0])});
    }
    int m_eps = static_cast<int>(std::ceil(drift / kTwoPi)) + 8;

    // step 4: number of interpolation steps from the landing window
    double lo = (1 - 7 * delta / 4) / 2, hi = (1 - 5 * delta / 4) / 2;
    const Triangle& t_seed = chain.triangles[in_start.front()];
    LatticeIndex step3 = to_lattice_vector(3.0 * piece.dir_sign * basis_e(piece.alpha));
    int n_eps = 0;
    int h_max = static_cast<int>(std::ceil(1.0 / (3 * eps * (kSqrt3 / 2)))) + 4;
    for (int h = 1; h <= h_max; ++h) {
      LatticeIndex shift{step3.z1 * h, step3.z2 * h};
      double vmin = 1e300, vmax = -1e300;
      for (LatticeIndex v : t_seed.vertices()) {
        double s = dot(position(v + shift, eps), piece.w);
        vmin = std::min(vmin, s);
        vmax = std::max(vmax, s);
      }
      if (vmin > lo && vmax < hi) {
        n_eps = 2 * h;
        break;
      }
    }
    if (n_eps == 0)
      throw std::runtime_error(
          "enforce_boundary: interpolation cannot land in the window (eps too "
          "large for delta) in piece " + piece.name);
    if (diag)
      diag->pieces.push_back({piece.name, m_eps, n_eps,
                              static_cast<int>(in_start.size())});

    // interpolate on every other slice
    for (int idx : in_start) {
      if ((idx - z0) % 2 != 0) continue;
      int k = idx - z0;
      InterpolationPlan plan;
      plan.t0 = chain.triangles[idx];
      plan.alpha = piece.alpha;
      plan.dir_sign = piece.dir_sign;
      plan.N = n_eps;
      plan.m = m_eps;
      plan.target_sign = piece.target;
      plan.lift = {lifts.theta_i[k], lifts.theta_j[k], lifts.theta_k[k]};
      SpinField slice;
      try {
        // extend beyond the square so the boundary ring is covered
        double span = 0.5 + 4 * eps - dot(position(plan.t0.i, eps), piece.w);
        int extra = std::max(
            2, static_cast<int>(std::ceil(span / (1.5 * eps * (kSqrt3 / 2)))) -
                   n_eps + 2);
        slice = interpolate_1d(plan, eps, extra);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error("enforce_boundary: hypothesis failed in piece " +
                                 piece.name + " at slice " +
                                 std::to_string(idx + z_lo) + ": " + e.what());
      }
      for (const auto& kv : slice.angles) {
        Vec2 x = position(kv.first, eps);
        double tr = std::abs(dot(x, piece.trans_axis));
        if (tr > piece.trans_max) continue;
        if (piece.trans_min > 0 && tr < piece.trans_min) continue;
        if (piece.side_sign != 0 && piece.side_sign * dot(x, piece.nu_global) <= 0)
          continue;
        if (dot(x, piece.w) < r / 2 - 2 * eps) continue;
        auto it = interp.find(kv.first);
        if (it != interp.end()) {
          Vec2 va{std::cos(it->second), std::sin(it->second)};
          Vec2 vb{std::cos(kv.second), std::sin(kv.second)};
          if (norm(va - vb) > 1e-9)
            throw std::logic_error(
                "enforce_boundary: conflicting interpolated values at a site");
        } else {
          interp.emplace(kv.first, kv.second);
        }
      }
    }
  }

  // step 5: assemble.  Keep u on P_delta cap Q_{r+6eps} and on the strip,
  // then the interpolations, then ground states by the side of L^nu.
  Region pdelta = Region::union2(
      rect_region(nu, 1 - 5 * delta, 1.0),
      Region::diff(rect_region(nu, 1.0, 1 - 5 * delta),
                   rect_region(nu, 1.0, 3 * delta, {}, true)));
  Region inner = square_region(nu, r + 6 * eps);
  SpinField out;
  out.eps = eps;
  for (const Triangle& t : triangles_in(inner, eps)) {
    if (!pdelta.tri_contains(t.polygon(eps))) continue;
    for (LatticeIndex v : t.vertices()) out.angles[v] = u.angle(v);
  }
  for (const Triangle& t : triangles_in(sc.strip, eps))
    for (LatticeIndex v : t.vertices())
      if (!out.angles.count(v)) out.angles[v] = u.angle(v);
  for (const auto& kv : interp)
    if (!out.angles.count(kv.first)) out.angles[kv.first] = kv.second;
  Region cell = square_region(nu, 1.0);
  std::size_t boundary_layer = 0;
  for (const Triangle& t : triangles_in(cell, eps)) {
    bool meets_dp = !pdelta.tri_contains(t.polygon(eps)) &&
                    pdelta.tri_intersects(t.polygon(eps));
    if (meets_dp) ++boundary_layer;
    for (LatticeIndex v : t.vertices()) {
      if (out.angles.count(v)) continue;
      GroundStateKind k = dot(position(v, eps), nu) >= 0 ? GroundStateKind::pos
                                                         : GroundStateKind::neg;
      out.angles[v] = ground_angle(k, v);
    }
  }
  for (int sgn : {+1, -1}) {
    for (LatticeIndex s : discrete_boundary(nu, 1.0, eps, sgn)) {
      if (out.angles.count(s)) continue;
      out.angles[s] =
          ground_angle(sgn > 0 ? GroundStateKind::pos : GroundStateKind::neg, s);
    }
  }
  if (diag) {
    diag->boundary_layer_triangles = boundary_layer;
    diag->input_energy = energy_region(u, cell);
    diag->output_energy = energy_region(out, cell);
  }
  return out;
}

}  // namespace afxy
