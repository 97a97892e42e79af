// spin.hpp -- spin fields on the triangular lattice, the plaquette energy,
// the chirality order parameter, ground states, and field diagnostics
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "afxy/lattice.hpp"

namespace afxy {

// Lifted angle per site; the spin is the unit vector exp(i*theta).  Angles
// are stored as lifts and never reduced mod 2*pi.
struct SpinField {
  double eps = 1.0;
  std::unordered_map<LatticeIndex, double, LatticeIndexHash> angles;

  bool has(LatticeIndex p) const { return angles.count(p) != 0; }
  double angle(LatticeIndex p) const {
    auto it = angles.find(p);
    if (it == angles.end())
      throw std::out_of_range("SpinField: site not in domain");
    return it->second;
  }
  Vec2 spin(LatticeIndex p) const {
    double t = angle(p);
    return {std::cos(t), std::sin(t)};
  }
  std::vector<LatticeIndex> sorted_sites() const {
    std::vector<LatticeIndex> s;
    s.reserve(angles.size());
    for (const auto& kv : angles) s.push_back(kv.first);
    std::sort(s.begin(), s.end());
    return s;
  }
};

enum class GroundStateKind { pos, neg };

// u^pos: angles (0, 2pi/3, 4pi/3) on sublattices (1,2,3); u^neg swaps 2 and 3.
inline double ground_angle(GroundStateKind kind, int label) {
  static const double pos[3] = {0.0, kTwoPi / 3, 2 * kTwoPi / 3};
  static const double neg[3] = {0.0, 2 * kTwoPi / 3, kTwoPi / 3};
  return kind == GroundStateKind::pos ? pos[label - 1] : neg[label - 1];
}

inline double ground_angle(GroundStateKind kind, LatticeIndex p) {
  return ground_angle(kind, sublattice_of(p));
}

inline SpinField ground_state(GroundStateKind kind, double eps,
                              const std::vector<LatticeIndex>& domain) {
  SpinField u;
  u.eps = eps;
  for (LatticeIndex p : domain) u.angles[p] = ground_angle(kind, p);
  return u;
}

// F_eps(u,T) = eps |u(i)+u(j)+u(k)|^2, vector form.
inline double energy_triangle(const SpinField& u, const Triangle& t) {
  Vec2 s{0, 0};
  for (LatticeIndex v : t.vertices()) s = s + u.spin(v);
  return u.eps * dot(s, s);
}

// Angular-lift form 3*eps + 2*eps*(cos(tj-ti)+cos(tk-tj)+cos(ti-tk)).
inline double energy_triangle_lift(const SpinField& u, const Triangle& t) {
  double ti = u.angle(t.i), tj = u.angle(t.j), tk = u.angle(t.k);
  return u.eps * (3.0 + 2.0 * (std::cos(tj - ti) + std::cos(tk - tj) +
                               std::cos(ti - tk)));
}

inline double energy_region(const SpinField& u, const Region& region) {
  double total = 0.0;
  for (const Triangle& t : triangles_in(region, u.eps))
    total += energy_triangle(u, t);
  return total;
}

// chi(u,T) = 2/(3 sqrt 3) (u_i x u_j + u_j x u_k + u_k x u_i), in [-1,1].
inline double chirality_triangle(const SpinField& u, const Triangle& t) {
  Vec2 ui = u.spin(t.i), uj = u.spin(t.j), uk = u.spin(t.k);
  return (2.0 / (3.0 * kSqrt3)) * (cross(ui, uj) + cross(uj, uk) + cross(uk, ui));
}

// Sine form 2/(3 sqrt 3) (sin(tj-ti)+sin(tk-tj)+sin(ti-tk)).
inline double chirality_triangle_lift(const SpinField& u, const Triangle& t) {
  double ti = u.angle(t.i), tj = u.angle(t.j), tk = u.angle(t.k);
  return (2.0 / (3.0 * kSqrt3)) *
         (std::sin(tj - ti) + std::sin(tk - tj) + std::sin(ti - tk));
}

struct ChiralityField {
  double eps = 1.0;
  std::vector<std::pair<Triangle, double>> values;  // enumeration order
};

inline ChiralityField chirality_field(const SpinField& u, const Region& region) {
  ChiralityField chi;
  chi.eps = u.eps;
  for (const Triangle& t : triangles_in(region, u.eps))
    chi.values.emplace_back(t, chirality_triangle(u, t));
  return chi;
}

// Thresholded chirality: +1 where chi > 0, -1 otherwise (ties at 0 go to -1).
inline std::vector<std::pair<Triangle, int>> sign_threshold(const ChiralityField& chi) {
  std::vector<std::pair<Triangle, int>> out;
  out.reserve(chi.values.size());
  for (const auto& [t, v] : chi.values) out.emplace_back(t, v > 0.0 ? +1 : -1);
  return out;
}

struct InterfaceDiagnostics {
  std::size_t count_pos_boundary = 0;  // #T_eps^pos
  double perimeter_bound = 0.0;        // 3*eps*count
  double pair_energy_min = std::numeric_limits<double>::infinity();
};

// Triangles with chi > 0 adjacent to a triangle with chi <= 0, the perimeter
// estimate 3*eps*#, and the minimal opposite-pair energy F(T u T').
inline InterfaceDiagnostics interface_diagnostics(const SpinField& u,
                                                  const Region& region) {
  auto tris = triangles_in(region, u.eps);
  std::unordered_map<Triangle, double, TriangleHash> chi;
  for (const Triangle& t : tris) chi[t] = chirality_triangle(u, t);
  InterfaceDiagnostics d;
  for (const Triangle& t : tris) {
    if (!(chi[t] > 0.0)) continue;
    bool boundary = false;
    for (const Triangle& n : neighbors(t)) {
      auto it = chi.find(n);
      if (it == chi.end() || !(it->second <= 0.0)) continue;
      boundary = true;
      double pair = energy_triangle(u, t) + energy_triangle(u, n);
      d.pair_energy_min = std::min(d.pair_energy_min, pair);
    }
    if (boundary) ++d.count_pos_boundary;
  }
  d.perimeter_bound = 3.0 * u.eps * static_cast<double>(d.count_pos_boundary);
  return d;
}

// Sum over triangles of (sqrt(3)/4) eps^2 |chi(T) - target(barycenter)|,
// restricted to triangles contained in the region.
inline double l1_chirality_distance(const ChiralityField& chi,
                                    const std::function<double(Vec2)>& target,
                                    const Region& region) {
  double area = kSqrt3 / 4 * chi.eps * chi.eps;
  double total = 0.0;
  for (const auto& [t, v] : chi.values) {
    if (!region.tri_contains(t.polygon(chi.eps))) continue;
    total += area * std::abs(v - target(t.barycenter(chi.eps)));
  }
  return total;
}

// chi_nu: +1 if <x,nu> >= 0, -1 otherwise.
inline std::function<double(Vec2)> chi_nu_target(Vec2 nu) {
  Vec2 n = normalized(nu);
  return [n](Vec2 x) { return dot(x, n) >= 0.0 ? 1.0 : -1.0; };
}

// ---------------------------------------------------------------------------
// Field I/O: line-oriented text `z1 z2 theta`, with a comment header carrying
// the lattice spacing.

inline void save_field(const SpinField& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_field: cannot open " + path);
  char buf[96];
  std::snprintf(buf, sizeof buf, "# eps %.17g\n", u.eps);
  out << buf;
  for (LatticeIndex p : u.sorted_sites()) {
    std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n",
                  static_cast<long long>(p.z1), static_cast<long long>(p.z2),
                  u.angles.at(p));
    out << buf;
  }
}

inline SpinField load_field(const std::string& path, double eps_override = 0.0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_field: cannot open " + path);
  SpinField u;
  u.eps = eps_override > 0 ? eps_override : 1.0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      double val;
      if (hs >> key >> val && key == "eps" && eps_override <= 0) u.eps = val;
      continue;
    }
    std::istringstream ls(line);
    long long z1, z2;
    double theta;
    if (!(ls >> z1 >> z2 >> theta))
      throw std::runtime_error("load_field: malformed line: " + line);
    u.angles[LatticeIndex{z1, z2}] = theta;
  }
  return u;
}

// ---------------------------------------------------------------------------
// Chirality raster exports.

// Character grid sampled on cell centers: '+' chi>0.5, '-' chi<-0.5,
// '.' in between, ' ' where no triangle covers the sample point.
inline std::string chirality_text_raster(const ChiralityField& chi, int cols = 72) {
  if (chi.values.empty()) return "";
  BBox b = BBox::of(chi.values.front().first.barycenter(chi.eps));
  for (const auto& [t, v] : chi.values)
    for (Vec2 p : t.positions(chi.eps)) b.expand(p);
  double w = b.xmax - b.xmin, h = b.ymax - b.ymin;
  int rows = std::max(1, static_cast<int>(std::lround(cols * (h / std::max(w, 1e-12)) * 0.5)));
  std::vector<std::string> grid(rows, std::string(cols, ' '));
  for (const auto& [t, v] : chi.values) {
    Vec2 c = t.barycenter(chi.eps);
    int ci = std::min(cols - 1, std::max(0, static_cast<int>((c.x - b.xmin) / w * cols)));
    int ri = std::min(rows - 1, std::max(0, static_cast<int>((b.ymax - c.y) / h * rows)));
    grid[ri][ci] = v > 0.5 ? '+' : (v < -0.5 ? '-' : '.');
  }
  std::string out;
  for (const auto& r : grid) out += r + "\n";
  return out;
}

// SVG with one polygon per triangle on a fixed blue-white-red diverging palette.
inline void chirality_svg(const ChiralityField& chi, const std::string& path,
                          double px_per_unit = 400.0) {
  if (chi.values.empty()) throw std::runtime_error("chirality_svg: empty field");
  BBox b = BBox::of(chi.values.front().first.barycenter(chi.eps));
  for (const auto& [t, v] : chi.values)
    for (Vec2 p : t.positions(chi.eps)) b.expand(p);
  double w = (b.xmax - b.xmin) * px_per_unit;
  double h = (b.ymax - b.ymin) * px_per_unit;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("chirality_svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  auto lerp = [](double a, double bb, double t) { return a + (bb - a) * t; };
  for (const auto& [t, v] : chi.values) {
    // chi=-1 -> (33,102,172), 0 -> (247,247,247), +1 -> (178,24,43)
    double s = std::clamp(v, -1.0, 1.0);
    int r, g, bl;
    if (s < 0) {
      r = static_cast<int>(lerp(247, 33, -s));
      g = static_cast<int>(lerp(247, 102, -s));
      bl = static_cast<int>(lerp(247, 172, -s));
    } else {
      r = static_cast<int>(lerp(247, 178, s));
      g = static_cast<int>(lerp(247, 24, s));
      bl = static_cast<int>(lerp(247, 43, s));
    }
    out << "<polygon points=\"";
    for (Vec2 p : t.positions(chi.eps))
      out << (p.x - b.xmin) * px_per_unit << "," << (b.ymax - p.y) * px_per_unit << " ";
    out << "\" fill=\"rgb(" << r << "," << g << "," << bl << ")\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace afxy
