// analysis.hpp -- numerical certification of the closed-form lemmas and the
// proof-level constructions: f/g extrema, the 5/3 opposite-pair bound, the
// C_delta implication, 1-d interpolation, strip selection, winding drift
#pragma once

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "afxy/spin.hpp"

namespace afxy {

// f(t1,t2) = sin t1 + sin(t2-t1) - sin t2 : chirality profile with theta_i = 0
// g(t1,t2) = cos t1 + cos(t2-t1) + cos t2 : energy profile, F_1 = 3 + 2g
inline double fg_f(double t1, double t2) {
  return std::sin(t1) + std::sin(t2 - t1) - std::sin(t2);
}
inline double fg_g(double t1, double t2) {
  return std::cos(t1) + std::cos(t2 - t1) + std::cos(t2);
}

inline constexpr double kMaxF = 3.0 * 1.7320508075688772935 / 2.0;  // 3 sqrt3 / 2

namespace detail {

template <typename F>
inline std::array<double, 3> grid_extremum(F&& fn, bool maximize, int n,
                                           double lo1, double hi1, double lo2,
                                           double hi2) {
  double best = maximize ? -1e300 : 1e300;
  double b1 = lo1, b2 = lo2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double t1 = lo1 + (hi1 - lo1) * i / (n - 1);
      double t2 = lo2 + (hi2 - lo2) * j / (n - 1);
      double v = fn(t1, t2);
      if (maximize ? (v > best) : (v < best)) {
        best = v;
        b1 = t1;
        b2 = t2;
      }
    }
  return {best, b1, b2};
}

// coarse grid followed by window-shrinking local refinement
template <typename F>
inline std::array<double, 3> grid_refine(F&& fn, bool maximize, int n) {
  auto cur = grid_extremum(fn, maximize, n, 0.0, kTwoPi * (1.0 - 1e-12), 0.0,
                           kTwoPi * (1.0 - 1e-12));
  double w = kTwoPi / (n - 1) * 2.0;
  for (int round = 0; round < 10; ++round) {
    cur = grid_extremum(fn, maximize, 25, cur[1] - w, cur[1] + w, cur[2] - w,
                        cur[2] + w);
    w *= 0.12;
  }
  return cur;
}

}  // namespace detail

struct FgReport {
  double max_f = 0, min_f = 0, min_g = 0;
  Vec2 argmax_f, argmin_f, argmin_g;
  double g_at_max_f = 0, g_at_min_f = 0, abs_f_at_min_g = 0;
  bool extrema_ok = false;
  bool equivalence_ok = false;
  bool sign_structure_ok = false;
  bool pass = false;
  std::string detail;
};

// Certifies: max f = 3 sqrt3/2 at (2pi/3, 4pi/3), min f = -3 sqrt3/2 at the
// swapped point, min g = -3/2, the equivalence |f| extremal <=> g = -3/2, and
// the sign structure f(.,t2) > 0 on (0,t2), < 0 on (t2,2pi).
inline FgReport verify_fg_extrema(int grid_n = 1000) {
  if (grid_n < 100) throw std::invalid_argument("verify_fg_extrema: grid_n >= 100");
  FgReport r;
  auto mx = detail::grid_refine([](double a, double b) { return fg_f(a, b); }, true, grid_n);
  auto mn = detail::grid_refine([](double a, double b) { return fg_f(a, b); }, false, grid_n);
  auto mg = detail::grid_refine([](double a, double b) { return fg_g(a, b); }, false, grid_n);
  r.max_f = mx[0];
  r.argmax_f = {mx[1], mx[2]};
  r.min_f = mn[0];
  r.argmin_f = {mn[1], mn[2]};
  r.min_g = mg[0];
  r.argmin_g = {mg[1], mg[2]};
  r.g_at_max_f = fg_g(mx[1], mx[2]);
  r.g_at_min_f = fg_g(mn[1], mn[2]);
  r.abs_f_at_min_g = std::abs(fg_f(mg[1], mg[2]));

  const double w1 = kTwoPi / 3, w2 = 2 * kTwoPi / 3;
  r.extrema_ok = std::abs(r.max_f - kMaxF) <= 1e-9 &&
                 std::abs(r.min_f + kMaxF) <= 1e-9 &&
                 std::abs(r.min_g + 1.5) <= 1e-9 &&
                 std::hypot(mx[1] - w1, mx[2] - w2) <= 1e-6 &&
                 std::hypot(mn[1] - w2, mn[2] - w1) <= 1e-6;
  r.equivalence_ok = std::abs(r.g_at_max_f + 1.5) <= 1e-9 &&
                     std::abs(r.g_at_min_f + 1.5) <= 1e-9 &&
                     std::abs(r.abs_f_at_min_g - kMaxF) <= 1e-9 &&
                     std::abs(fg_g(w1, w2) + 1.5) <= 1e-12 &&
                     std::abs(fg_g(w2, w1) + 1.5) <= 1e-12;

  r.sign_structure_ok = true;
  for (int s = 1; s <= 16 && r.sign_structure_ok; ++s) {
    double t2 = 0.25 + (kTwoPi - 0.5) * (s - 1) / 15.0;
    for (int i = 1; i < 64; ++i) {
      double t1 = t2 * i / 64.0;
      if (t1 < 1e-2 || t2 - t1 < 1e-2) continue;
      if (!(fg_f(t1, t2) > 0)) {
        r.sign_structure_ok = false;
        r.detail = "f(.,t2) not positive on (0,t2)";
        break;
      }
    }
    for (int i = 1; i < 64; ++i) {
      double t1 = t2 + (kTwoPi - t2) * i / 64.0;
      if (t1 - t2 < 1e-2 || kTwoPi - t1 < 1e-2) continue;
      if (!(fg_f(t1, t2) < 0)) {
        r.sign_structure_ok = false;
        r.detail = "f(.,t2) not negative on (t2,2pi)";
        break;
      }
    }
  }
  // f vanishes on the diagonal and the axes
  for (int i = 0; i < 32 && r.sign_structure_ok; ++i) {
    double t = kTwoPi * i / 32.0;
    if (std::abs(fg_f(t, t)) > 1e-12 || std::abs(fg_f(t, 0.0)) > 1e-12 ||
        std::abs(fg_f(0.0, t)) > 1e-12) {
      r.sign_structure_ok = false;
      r.detail = "f does not vanish on the boundary lines";
    }
  }
  r.pass = r.extrema_ok && r.equivalence_ok && r.sign_structure_ok;
  return r;
}

struct OppositePairMin {
  double value = 0.0;
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
};

namespace detail {

// min of g(.,t2) over [0,t2] and over [t2,2pi]; interior critical points are
// t2/2 and t2/2 + pi
inline double inner_min_low(double t2) {
  double best = std::min(fg_g(0.0, t2), fg_g(t2, t2));
  for (double c : {t2 / 2, t2 / 2 + kPi})
    if (c > 0 && c < t2) best = std::min(best, fg_g(c, t2));
  return best;
}
inline double inner_min_high(double t2) {
  double best = std::min(fg_g(t2, t2), fg_g(kTwoPi, t2));
  for (double c : {t2 / 2, t2 / 2 + kPi})
    if (c > t2 && c < kTwoPi) best = std::min(best, fg_g(c, t2));
  return best;
}
inline double pair_objective(double t2) {
  return 6.0 + 2.0 * (inner_min_low(t2) + inner_min_high(t2));
}

inline double golden_min(double lo, double hi, int iters = 200) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = pair_objective(x1), f2 = pair_objective(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = pair_objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = pair_objective(x2);
    }
  }
  return (a + b) / 2;
}

}  // namespace detail

// Constrained minimum of 6 + 2(g(t1,t2) + g(t3,t2)) over ordered triples
// 0 <= t1 <= t2 <= t3 < 2pi.  The argmin set has two mirror branches; the
// canonical representative with t2 > pi is reported.
inline OppositePairMin min_opposite_pair() {
  int n = 40000;
  double best_lo = 1e300, best_hi = 1e300, arg_lo = 0, arg_hi = kPi + 0.1;
  for (int i = 1; i < n; ++i) {
    double t2 = kTwoPi * i / n;
    double v = detail::pair_objective(t2);
    if (t2 < kPi && v < best_lo) {
      best_lo = v;
      arg_lo = t2;
    }
    if (t2 >= kPi && v < best_hi) {
      best_hi = v;
      arg_hi = t2;
    }
  }
  double w = kTwoPi / n * 2;
  double t2_hi = detail::golden_min(arg_hi - w, arg_hi + w);
  double t2_lo = detail::golden_min(arg_lo - w, arg_lo + w);
  double v_hi = detail::pair_objective(t2_hi);
  double v_lo = detail::pair_objective(t2_lo);
  if (v_lo < v_hi - 1e-9)
    throw std::logic_error("min_opposite_pair: mirror branch mismatch");

  OppositePairMin out;
  out.value = v_hi;
  out.theta2 = t2_hi;
  // recover argmins of the inner problems
  double best = 1e300;
  for (double c : {0.0, t2_hi / 2, t2_hi / 2 + kPi, t2_hi}) {
    if (c < 0 || c > t2_hi) continue;
    double v = fg_g(c, t2_hi);
    if (v < best - 1e-15) {
      best = v;
      out.theta1 = c;
    }
  }
  best = 1e300;
  for (double c : {t2_hi, t2_hi / 2 + kPi}) {
    if (c < t2_hi || c >= kTwoPi) continue;
    double v = fg_g(c, t2_hi);
    if (v < best - 1e-15) {
      best = v;
      out.theta3 = c;
    }
  }
  return out;
}

// Smallest triangle energy compatible with chirality in (-1+delta, 1-delta):
// min of 3 + 2 g over the open feasibility band of f (theta_i = 0 gauge).
inline double estimate_c_delta(double delta, int grid_n = 2000) {
  if (!(delta > 0 && delta < 1))
    throw std::invalid_argument("estimate_c_delta: delta must be in (0,1)");
  double lim = (1.0 - delta) * kMaxF;
  auto feasible = [lim](double t1, double t2) {
    return std::abs(fg_f(t1, t2)) < lim - 1e-12;
  };
  // coarse scan, keeping several well-separated candidate cells
  struct Cand {
    double e, t1, t2;
  };
  std::vector<Cand> cands;
  double cell = kTwoPi / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      double t1 = cell * i, t2 = cell * j;
      if (!feasible(t1, t2)) continue;
      double e = 3.0 + 2.0 * fg_g(t1, t2);
      bool merged = false;
      for (Cand& c : cands) {
        if (std::abs(c.t1 - t1) < 0.4 && std::abs(c.t2 - t2) < 0.4) {
          if (e < c.e) c = {e, t1, t2};
          merged = true;
          break;
        }
      }
      if (!merged) cands.push_back({e, t1, t2});
    }
  if (cands.empty())
    throw std::runtime_error("estimate_c_delta: empty feasible set");
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.e < b.e; });
  if (cands.size() > 8) cands.resize(8);

  // window-shrinking refinement from each candidate basin
  double best = 1e300;
  for (const Cand& c0 : cands) {
    double b1 = c0.t1, b2 = c0.t2, e = c0.e;
    double w = cell * 8;
    for (int round = 0; round < 8; ++round) {
      const int n = 160;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double t1 = b1 - w + 2 * w * i / (n - 1);
          double t2 = b2 - w + 2 * w * j / (n - 1);
          if (!feasible(t1, t2)) continue;
          double v = 3.0 + 2.0 * fg_g(t1, t2);
          if (v < e) {
            e = v;
            b1 = t1;
            b2 = t2;
          }
        }
      w *= 0.25;
    }
    best = std::min(best, e);
  }
  return best;
}

// ---------------------------------------------------------------------------
// 1-d interpolation on a half-slice.

// Lift of the starting triple: theta_j in [theta_i - pi, theta_i + pi),
// theta_k in [theta_j - pi, theta_j + pi).
struct LiftedTriple {
  double theta_i = 0, theta_j = 0, theta_k = 0;
};

inline void validate_lift_windows(const LiftedTriple& l) {
  if (!(l.theta_j >= l.theta_i - kPi && l.theta_j < l.theta_i + kPi))
    throw std::invalid_argument("lift window violated: theta_j not in [theta_i-pi, theta_i+pi)");
  if (!(l.theta_k >= l.theta_j - kPi && l.theta_k < l.theta_j + kPi))
    throw std::invalid_argument("lift window violated: theta_k not in [theta_j-pi, theta_j+pi)");
}

struct InterpolationPlan {
  Triangle t0;
  int alpha = 1;
  int dir_sign = +1;      // slice grows along dir_sign * e_alpha
  int N = 1;              // interpolation steps
  int m = 1;              // winding number
  LiftedTriple lift;
  int target_sign = +1;   // +1 interpolates to u^pos, -1 to u^neg
};

inline void validate_plan(const InterpolationPlan& plan) {
  validate_lift_windows(plan.lift);
  if (plan.N < 1) throw std::invalid_argument("interpolation: N must be >= 1");
  if (plan.m < 1) throw std::invalid_argument("interpolation: m must be >= 1");
  double s = plan.target_sign >= 0 ? 1.0 : -1.0;
  double dj = plan.lift.theta_j - plan.lift.theta_i - s * kTwoPi / 3;
  double dk = plan.lift.theta_k - plan.lift.theta_j - s * kTwoPi / 3;
  if (std::abs(dj) > 0.25 + 1e-12)
    throw std::invalid_argument(
        "interpolation assumption violated: |theta_j0 - theta_i0 - 2pi/3| > 1/4");
  if (std::abs(dk) > 0.25 + 1e-12)
    throw std::invalid_argument(
        "interpolation assumption violated: |theta_k0 - theta_j0 - 2pi/3| > 1/4");
  if (!(kTwoPi * plan.m >= std::abs(plan.lift.theta_i) + kTwoPi - 1e-12))
    throw std::invalid_argument(
        "interpolation assumption violated: 2pi*m < |theta_i0| + 2pi");
}

// Interpolated angles: theta(x_h) = (1 - h/N) theta(x_0) + (h/N)(2pi m + c_x)
// for h <= N, the target constants beyond; c = (0, 2pi/3, 4pi/3) per
// sublattice for a positive target, conjugated for a negative one.
inline SpinField interpolate_1d(const InterpolationPlan& plan, double eps,
                                int extra_steps = 2) {
  validate_plan(plan);
  double s = plan.target_sign >= 0 ? 1.0 : -1.0;
  double ci = 0.0, cj = s * kTwoPi / 3, ck = s * 2 * kTwoPi / 3;
  auto hs = half_slice(plan.t0, plan.alpha, plan.N + extra_steps, plan.dir_sign);
  SpinField u;
  u.eps = eps;
  double N = plan.N;
  double off = kTwoPi * plan.m;
  for (size_t h = 0; h < hs.size(); ++h) {
    double lam = (h <= static_cast<size_t>(plan.N)) ? static_cast<double>(h) / N : 1.0;
    u.angles[hs[h].i] = (1 - lam) * plan.lift.theta_i + lam * (off + ci);
    u.angles[hs[h].j] = (1 - lam) * plan.lift.theta_j + lam * (off + cj);
    u.angles[hs[h].k] = (1 - lam) * plan.lift.theta_k + lam * (off + ck);
  }
  return u;
}

// Energy of all lattice triangles whose three vertices carry values.
inline double field_closure_energy(const SpinField& u) {
  double total = 0.0;
  for (LatticeIndex p : u.sorted_sites()) {
    Triangle up = make_up(p), down = make_down(p);
    if (u.has(up.i) && u.has(up.j) && u.has(up.k)) total += energy_triangle(u, up);
    if (u.has(down.i) && u.has(down.j) && u.has(down.k))
      total += energy_triangle(u, down);
  }
  return total;
}

inline double starting_triangle_energy(const InterpolationPlan& plan, double eps) {
  Vec2 sum = Vec2{std::cos(plan.lift.theta_i), std::sin(plan.lift.theta_i)} +
             Vec2{std::cos(plan.lift.theta_j), std::sin(plan.lift.theta_j)} +
             Vec2{std::cos(plan.lift.theta_k), std::sin(plan.lift.theta_k)};
  return eps * dot(sum, sum);
}

// Smallest C with F_eps(u^{N,m}, half-slice) <= C (N F_eps(u,T0) + eps m^2/N)
// over the sample set.
inline double fit_interpolation_constant(const std::vector<InterpolationPlan>& samples,
                                         double eps) {
  double c = 0.0;
  for (const InterpolationPlan& plan : samples) {
    SpinField u = interpolate_1d(plan, eps);
    double lhs = field_closure_energy(u);
    double rhs = plan.N * starting_triangle_energy(plan, eps) +
                 eps * static_cast<double>(plan.m) * plan.m / plan.N;
    c = std::max(c, lhs / rhs);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Strip selection.

struct StripChoice {
  double delta = 0.0;
  double r = 0.0;
  int m_index = 0;
  Region strip = square_region({0, 1}, 1.0);
  double g_value = 0.0;  // F_eps(u,S) + ||chi(u)-chi_nu||_L1(S)
};

inline Region strip_region(Vec2 nu, double r, double delta, double eps) {
  Region outer = square_region(nu, r + 12 * eps);
  Region inner = square_region(nu, r, {}, true);
  Region bar = rect_region(nu, 1.0, delta, {}, true);
  return Region::diff(std::move(outer), Region::union2(std::move(inner), std::move(bar)));
}

inline double strip_g_value(const SpinField& u, Vec2 nu, const Region& strip) {
  double area = kSqrt3 / 4 * u.eps * u.eps;
  auto target = chi_nu_target(nu);
  double total = 0.0;
  for (const Triangle& t : triangles_in(strip, u.eps)) {
    total += energy_triangle(u, t);
    total += area * std::abs(chirality_triangle(u, t) - target(t.barycenter(u.eps)));
  }
  return total;
}

// Among the strips S_{eps, 1-3delta+12 m eps}, m = 0..floor(delta/12eps)-1,
// returns the one minimizing F_eps(u,S) + ||chi(u) - chi_nu||_{L1(S)}.
inline StripChoice select_strip(const SpinField& u, Vec2 nu, double delta,
                                double eps) {
  if (!(delta > 0 && delta < 1.0 / 3))
    throw std::invalid_argument("select_strip: delta must be in (0,1/3)");
  int M = static_cast<int>(std::floor(delta / (12 * eps)));
  if (M < 1)
    throw std::invalid_argument(
        "select_strip: no admissible strip, requires floor(delta/(12 eps)) >= 1");
  nu = normalized(nu);
  StripChoice best;
  bool have = false;
  for (int m = 0; m < M; ++m) {
    double r = 1.0 - 3 * delta + 12 * m * eps;
    Region strip = strip_region(nu, r, delta, eps);
    double g = strip_g_value(u, nu, strip);
    if (!have || g < best.g_value) {
      best = StripChoice{delta, r, m, strip, g};
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Winding drift along a chain.

struct WindingDrift {
  double max_drift_i = 0, max_drift_j = 0, max_drift_k = 0;
};

struct ChainLifts {
  std::vector<double> theta_i, theta_j, theta_k;  // one entry per chain triangle
  WindingDrift drift;
};

namespace detail {
// wrap to [-pi, pi)
inline double wrap_pm_pi(double x) {
  return x - kTwoPi * std::floor((x + kPi) / kTwoPi);
}
inline double mod_two_pi(double x) {
  double y = std::fmod(x, kTwoPi);
  return y < 0 ? y + kTwoPi : y;
}
}  // namespace detail

// Recursive lifts of u along the chain: the first triple is lifted with
// theta_i in [0,2pi) and windowed j,k; each successive vertex angle is lifted
// into the centered 2pi window of its predecessor.
inline ChainLifts chain_lifts(const SpinField& u, const Chain& chain) {
  if (chain.triangles.empty()) throw std::invalid_argument("chain_lifts: empty chain");
  ChainLifts out;
  const Triangle& t0 = chain.triangles.front();
  double ti = detail::mod_two_pi(u.angle(t0.i));
  double tj = ti + detail::wrap_pm_pi(u.angle(t0.j) - ti);
  double tk = tj + detail::wrap_pm_pi(u.angle(t0.k) - tj);
  out.theta_i.push_back(ti);
  out.theta_j.push_back(tj);
  out.theta_k.push_back(tk);
  for (size_t z = 1; z < chain.triangles.size(); ++z) {
    const Triangle& t = chain.triangles[z];
    ti += detail::wrap_pm_pi(u.angle(t.i) - ti);
    tj += detail::wrap_pm_pi(u.angle(t.j) - tj);
    tk += detail::wrap_pm_pi(u.angle(t.k) - tk);
    out.theta_i.push_back(ti);
    out.theta_j.push_back(tj);
    out.theta_k.push_back(tk);
  }
  for (size_t z = 0; z < out.theta_i.size(); ++z) {
    out.drift.max_drift_i =
        std::max(out.drift.max_drift_i, std::abs(out.theta_i[z] - out.theta_i[0]));
    out.drift.max_drift_j =
        std::max(out.drift.max_drift_j, std::abs(out.theta_j[z] - out.theta_j[0]));
    out.drift.max_drift_k =
        std::max(out.drift.max_drift_k, std::abs(out.theta_k[z] - out.theta_k[0]));
  }
  return out;
}

inline WindingDrift winding_drift(const SpinField& u, const Chain& chain) {
  return chain_lifts(u, chain).drift;
}

}  // namespace afxy
