#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>
#include <unordered_set>

#include "afxy/lattice.hpp"

using namespace afxy;

namespace {

// Brute-force sublattice membership through the generator span:
// Lambda^1 = { a(e1+e2) + b(e2+e3) } = { a(1,1) + b(-1,2) } in index coords.
int sublattice_bruteforce(LatticeIndex p, int range = 45) {
  for (int shift = 0; shift < 3; ++shift) {
    // shift 0 -> Lambda^1, 1 -> +e1, 2 -> +e2
    std::int64_t s1 = (shift == 1) ? 1 : 0;
    std::int64_t s2 = (shift == 2) ? 1 : 0;
    for (int a = -range; a <= range; ++a)
      for (int b = -range; b <= range; ++b)
        if (p.z1 == a - b + s1 && p.z2 == a + 2 * b + s2) return shift + 1;
  }
  return 0;
}

// Independent direct enumeration of triangles strictly inside an axis-aligned
// square of side rho centered at the origin (nu = (0,1)).
int count_triangles_in_square_oracle(double rho, double eps) {
  double tol = 1e-12 * rho;
  int zmax = static_cast<int>(4 * rho / eps) + 4;
  int count = 0;
  for (int z1 = -zmax; z1 <= zmax; ++z1)
    for (int z2 = -zmax; z2 <= zmax; ++z2) {
      const std::array<std::array<LatticeIndex, 3>, 2> cands = {
          std::array<LatticeIndex, 3>{LatticeIndex{z1, z2}, LatticeIndex{z1 + 1, z2},
                                      LatticeIndex{z1, z2 + 1}},
          std::array<LatticeIndex, 3>{LatticeIndex{z1, z2}, LatticeIndex{z1 + 1, z2},
                                      LatticeIndex{z1 + 1, z2 - 1}}};
      for (const auto& verts : cands) {
        bool in = true;
        for (LatticeIndex v : verts) {
          Vec2 p = position(v, eps);
          if (!(std::abs(p.x) < rho / 2 - tol && std::abs(p.y) < rho / 2 - tol))
            in = false;
        }
        if (in) ++count;
      }
    }
  return count;
}

}  // namespace

TEST_CASE("position of basis indices", "[lattice]") {
  CHECK(position({0, 0}, 1.0).x == 0.0);
  CHECK(position({0, 0}, 1.0).y == 0.0);
  CHECK(position({1, 0}, 1.0).x == Catch::Approx(1.0));
  CHECK(position({1, 0}, 1.0).y == Catch::Approx(0.0));
  // e2 = (1/2, sqrt(3)/2)
  CHECK(position({0, 1}, 1.0).x == Catch::Approx(0.5));
  CHECK(position({0, 1}, 1.0).y == Catch::Approx(std::sqrt(3.0) / 2));
  CHECK(position({2, 3}, 0.25).x == Catch::Approx(0.25 * 3.5));
}

TEST_CASE("sublattice labels", "[lattice]") {
  CHECK(sublattice_of({0, 0}) == 1);
  CHECK(sublattice_of({1, 0}) == 2);   // Lambda^2 = Lambda^1 + e1
  CHECK(sublattice_of({0, 1}) == 3);   // Lambda^3 = Lambda^1 + e2
  CHECK(sublattice_of({2, 1}) == 2);   // (2,1) = (1,1) + e1
}

TEST_CASE("sublattice agrees with generator-span brute force", "[lattice]") {
  for (std::int64_t z1 = -30; z1 <= 30; z1 += 3)
    for (std::int64_t z2 = -30; z2 <= 30; z2 += 3) {
      LatticeIndex p{z1, z2};
      CHECK(sublattice_of(p) == sublattice_bruteforce(p));
    }
  // and densely on a smaller window
  for (std::int64_t z1 = -6; z1 <= 6; ++z1)
    for (std::int64_t z2 = -6; z2 <= 6; ++z2) {
      LatticeIndex p{z1, z2};
      CHECK(sublattice_of(p) == sublattice_bruteforce(p, 20));
    }
}

TEST_CASE("each triangle has one vertex per sublattice and unit sides", "[lattice]") {
  for (std::int64_t z1 = -5; z1 <= 5; ++z1)
    for (std::int64_t z2 = -5; z2 <= 5; ++z2) {
      for (Triangle t : {make_up({z1, z2}), make_down({z1, z2})}) {
        CHECK(sublattice_of(t.i) == 1);
        CHECK(sublattice_of(t.j) == 2);
        CHECK(sublattice_of(t.k) == 3);
        auto p = t.positions(1.0);
        CHECK(norm(p[0] - p[1]) == Catch::Approx(1.0));
        CHECK(norm(p[1] - p[2]) == Catch::Approx(1.0));
        CHECK(norm(p[2] - p[0]) == Catch::Approx(1.0));
        // up iff (i,j,k) counterclockwise
        double cr = cross(p[1] - p[0], p[2] - p[1]);
        if (t.orient == Orientation::up)
          CHECK(cr > 0);
        else
          CHECK(cr < 0);
      }
    }
}

TEST_CASE("rotation by 2pi/3 preserves sublattice labels", "[lattice]") {
  // the rotation acts on indices as (z1,z2) -> (-z1-z2, z1)
  for (std::int64_t z1 = -12; z1 <= 12; ++z1)
    for (std::int64_t z2 = -12; z2 <= 12; ++z2) {
      LatticeIndex p{z1, z2};
      LatticeIndex q{-z1 - z2, z1};
      // verify the index map actually is the plane rotation
      Vec2 x = position(p, 1.0);
      Vec2 rx{-0.5 * x.x - kSqrt3 / 2 * x.y, kSqrt3 / 2 * x.x - 0.5 * x.y};
      CHECK(norm(position(q, 1.0) - rx) < 1e-12);
      CHECK(sublattice_of(q) == sublattice_of(p));
    }
}

TEST_CASE("point reflection swaps labels 2 and 3 and flips orientation", "[lattice]") {
  for (std::int64_t z1 = -8; z1 <= 8; ++z1)
    for (std::int64_t z2 = -8; z2 <= 8; ++z2) {
      LatticeIndex p{z1, z2};
      LatticeIndex q{-z1, -z2};
      int lp = sublattice_of(p), lq = sublattice_of(q);
      if (lp == 1) CHECK(lq == 1);
      if (lp == 2) CHECK(lq == 3);
      if (lp == 3) CHECK(lq == 2);
    }
  // reflected up triangle is a down triangle
  Triangle t = make_up({2, 1});
  std::set<std::pair<std::int64_t, std::int64_t>> reflected;
  for (LatticeIndex v : t.vertices()) reflected.insert({-v.z1, -v.z2});
  bool found = false;
  for (std::int64_t z1 = -6; z1 <= 6 && !found; ++z1)
    for (std::int64_t z2 = -6; z2 <= 6 && !found; ++z2) {
      Triangle d = make_down({z1, z2});
      std::set<std::pair<std::int64_t, std::int64_t>> vs;
      for (LatticeIndex v : d.vertices()) vs.insert({v.z1, v.z2});
      if (vs == reflected) found = true;
    }
  CHECK(found);
}

TEST_CASE("triangles_in on tiny regions", "[lattice]") {
  // square of side eps/2: no triangle of diameter eps fits
  Region q = square_region({0, 1}, 0.5, {}, false);
  CHECK(triangles_in(q, 1.0).empty());

  // the closed triangle conv{(0,0),(1,0),(1/2,sqrt3/2)} contains exactly one
  // up triangle at eps = 1
  ConvexSet hull;
  hull.closed = true;
  hull.scale = 1.0;
  hull.planes = {{{0.0, -1.0}, 0.0},
                 {{kSqrt3 / 2, 0.5}, kSqrt3 / 2},
                 {{-kSqrt3 / 2, 0.5}, 0.0}};
  BBox hb = BBox::of({0, 0});
  hb.expand({1, 0});
  hb.expand({0.5, kSqrt3 / 2});
  hull.box = hb;
  auto ts = triangles_in(Region::leaf(hull), 1.0);
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].orient == Orientation::up);
  CHECK(ts[0].i == LatticeIndex{0, 0});
}

TEST_CASE("triangles_in count matches direct enumeration oracle", "[lattice]") {
  int oracle = count_triangles_in_square_oracle(1.0, 0.25);
  CHECK(oracle == 20);  // frozen from the oracle
  Region q = square_region({0, 1}, 1.0);
  CHECK(triangles_in(q, 0.25).size() == static_cast<size_t>(oracle));

  // rotated square: same count by symmetry of the lattice under 2pi/3
  Vec2 nur{-std::sin(kTwoPi / 3), std::cos(kTwoPi / 3)};
  Region qr = square_region(nur, 1.0);
  CHECK(triangles_in(qr, 0.25).size() == static_cast<size_t>(oracle));
}

TEST_CASE("triangle tiling covers bounded regions up to a boundary layer", "[lattice]") {
  Region q = square_region({0, 1}, 1.0);
  double eps = 0.125;
  auto ts = triangles_in(q, eps);
  double tri_area = kSqrt3 / 4 * eps * eps;
  double covered = tri_area * static_cast<double>(ts.size());
  CHECK(covered <= 1.0);
  // the uncovered part is a boundary layer of width <= 2*eps
  CHECK(covered >= (1.0 - 4 * 2 * eps));
}

TEST_CASE("neighbors share a side of length eps", "[lattice]") {
  Triangle t = make_up({0, 0});
  auto ns = neighbors(t);
  REQUIRE(ns.size() == 3);
  for (const Triangle& n : ns) {
    CHECK(n.orient == Orientation::down);
    // shared vertices: exactly two
    int shared = 0;
    for (LatticeIndex a : t.vertices())
      for (LatticeIndex b : n.vertices())
        if (a == b) ++shared;
    CHECK(shared == 2);
  }
  // neighbor across side [0; e1] has third vertex e1 - e2
  bool has = false;
  for (const Triangle& n : ns)
    for (LatticeIndex v : n.vertices())
      if (v == LatticeIndex{1, -1}) has = true;
  CHECK(has);
  // down triangle has 3 up neighbors
  for (const Triangle& n : neighbors(make_down({3, -2})))
    CHECK(n.orient == Orientation::up);
}

TEST_CASE("discrete boundary membership rules", "[lattice]") {
  double eps = 0.125;
  auto bplus = discrete_boundary({0, 1}, 1.0, eps, +1);
  auto bminus = discrete_boundary({0, 1}, 1.0, eps, -1);
  // frozen cardinalities from the exhaustive site-scan oracle
  CHECK(bplus.size() == 63);
  CHECK(bminus.size() == 63);
  for (LatticeIndex p : bplus) {
    Vec2 x = position(p, eps);
    CHECK(x.y >= 3 * eps - 1e-9);
    CHECK(dist_to_square_boundary(x, {0, 1}, 1.0) <= 3 * eps + 1e-9);
  }
  // a site with <nu,x> = 2*eps is excluded from the + set
  for (LatticeIndex p : bplus) CHECK(position(p, eps).y > 2 * eps);
  // a site with dist = 4*eps is excluded: check none violates
  for (LatticeIndex p : bminus)
    CHECK(dist_to_square_boundary(position(p, eps), {0, 1}, 1.0) < 4 * eps);
  CHECK_THROWS(discrete_boundary({0, 1}, 1.0, 0.2, +1));
}

TEST_CASE("half-slice recursion", "[lattice]") {
  Triangle t0 = make_up({0, 0});
  for (int alpha : {1, 2, 3}) {
    auto hs = half_slice(t0, alpha, 8);
    REQUIRE(hs.size() == 9);
    std::int64_t z = slice_of(t0, alpha);
    LatticeIndex three_e = to_lattice_vector(3.0 * basis_e(alpha));
    for (size_t h = 0; h < hs.size(); ++h) {
      // stays in the slice band
      CHECK(slice_of(hs[h], alpha) == z);
      // T_{2h} = T_0 + 3h e_alpha
      if (h % 2 == 0) {
        LatticeIndex shift{three_e.z1 * static_cast<std::int64_t>(h / 2),
                           three_e.z2 * static_cast<std::int64_t>(h / 2)};
        CHECK(hs[h].i == t0.i + shift);
        CHECK(hs[h].j == t0.j + shift);
        CHECK(hs[h].k == t0.k + shift);
      }
      // tau flips at every step: band coordinate alternates
      if (h > 0) {
        CHECK(band_coord(hs[h].i, alpha) != band_coord(hs[h - 1].i, alpha));
        CHECK(band_coord(hs[h].j, alpha) != band_coord(hs[h - 1].j, alpha));
        CHECK(band_coord(hs[h].k, alpha) != band_coord(hs[h - 1].k, alpha));
      }
    }
  }
}

TEST_CASE("chain predicates on a simple line", "[lattice]") {
  // nu = (0,1), alpha = 2 is admissible: |<e2, nu_perp>| = 1/2
  Chain ch = build_chain({0, 1}, 0.0, 2, -50, 49, 1.0);
  REQUIRE(ch.triangles.size() == 100);
  for (size_t m = 0; m < ch.triangles.size(); ++m) {
    const Triangle& t = ch.triangles[m];
    CHECK(t.orient == Orientation::up);
    CHECK(slice_of(t, 2) == ch.z_lo + static_cast<std::int64_t>(m));
    double lo = 1e300, hi = -1e300;
    for (Vec2 p : t.positions(1.0)) {
      lo = std::min(lo, p.y);
      hi = std::max(hi, p.y);
    }
    CHECK(lo <= 1e-9);
    CHECK(hi >= -1e-9);
    if (m > 0) {
      int shared = 0;
      for (LatticeIndex a : ch.triangles[m - 1].vertices())
        for (LatticeIndex b : t.vertices())
          if (a == b) ++shared;
      CHECK(shared >= 1);
    }
  }
}

TEST_CASE("chain precondition rejected", "[lattice]") {
  // alpha = 1 with nu = (0,1): |<e1, nu_perp>| = 1
  CHECK_THROWS(build_chain({0, 1}, 0.0, 1, 0, 10, 1.0));
}

TEST_CASE("chain predicates hold on randomized instances", "[lattice]") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double phi = angle(rng);
    Vec2 nu{std::cos(phi), std::sin(phi)};
    // admissible alpha: maximize |<e_alpha, nu>|, ties to smaller index
    int alpha = 1;
    double best = -1;
    for (int a = 1; a <= 3; ++a) {
      double v = std::abs(dot(basis_e(a), nu));
      if (v > best + 1e-12) {
        best = v;
        alpha = a;
      }
    }
    double offset = off(rng);
    double eps = 0.25;
    Chain ch = build_chain(nu, offset, alpha, 0, 99, eps);
    REQUIRE(ch.triangles.size() == 100);
    for (size_t m = 0; m < ch.triangles.size(); ++m) {
      const Triangle& t = ch.triangles[m];
      REQUIRE(t.orient == Orientation::up);
      REQUIRE(slice_of(t, alpha) == static_cast<std::int64_t>(m));
      double lo = 1e300, hi = -1e300;
      for (Vec2 p : t.positions(eps)) {
        double s = dot(p, nu) - offset;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      REQUIRE(lo <= 1e-9);
      REQUIRE(hi >= -1e-9);
      if (m > 0) {
        int shared = 0;
        for (LatticeIndex a : ch.triangles[m - 1].vertices())
          for (LatticeIndex b : t.vertices())
            if (a == b) ++shared;
        REQUIRE(shared >= 1);
      }
    }
  }
}

TEST_CASE("triangle dump format", "[lattice]") {
  std::string d = dump_triangles({make_up({0, 0})});
  CHECK(d == "0 0 1 0 0 1 up\n");
}
