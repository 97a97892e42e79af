// optimize.hpp -- the cell problem for the surface tension phi(nu): assembly
// with pinned ground-state boundary data, L-BFGS multistart minimization,
// the eps ladder, anisotropy sweeps, and wall diagnostics
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "afxy/analysis.hpp"
#include "afxy/parallel.hpp"

namespace afxy {

struct SolverConfig {
  int max_iterations = 200000;
  double grad_tolerance = 0.0;  // <= 0 selects 1e-10 * eps * n_free
  int restarts = 8;
  double perturbation_sigma = 0.3;  // radians
  std::uint64_t rng_seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

// Minimization instance over the free angles of Q^nu_rho with u^pos pinned on
// the upper discrete boundary and u^neg on the lower one.
struct CellProblem {
  Vec2 nu{0, 1};
  double rho = 1.0;
  double eps = 0.125;
  Region cell = square_region({0, 1}, 1.0);
  std::vector<Triangle> triangles;
  std::vector<LatticeIndex> free_sites;  // sorted
  std::unordered_map<LatticeIndex, double, LatticeIndexHash> pinned;
  std::size_t n_pinned_plus = 0, n_pinned_minus = 0;

  // per-triangle vertex slots: free index, or -1 with a pinned angle
  struct Slot {
    int free_idx = -1;
    double pinned_angle = 0.0;
  };
  std::vector<std::array<Slot, 3>> slots;
  std::unordered_map<LatticeIndex, int, LatticeIndexHash> free_index;

  void build_slots() {
    free_index.clear();
    for (size_t i = 0; i < free_sites.size(); ++i)
      free_index[free_sites[i]] = static_cast<int>(i);
    slots.clear();
    slots.reserve(triangles.size());
    for (const Triangle& t : triangles) {
      std::array<Slot, 3> s;
      auto vs = t.vertices();
      for (int v = 0; v < 3; ++v) {
        auto itf = free_index.find(vs[v]);
        if (itf != free_index.end()) {
          s[v].free_idx = itf->second;
        } else {
          s[v].pinned_angle = pinned.at(vs[v]);
        }
      }
      slots.push_back(s);
    }
  }
};

inline CellProblem assemble_cell(Vec2 nu, double rho, double eps) {
  if (!(6 * eps < rho))
    throw std::invalid_argument("assemble_cell: requires 6*eps < rho; pick a smaller eps");
  nu = normalized(nu);
  CellProblem p;
  p.nu = nu;
  p.rho = rho;
  p.eps = eps;
  p.cell = square_region(nu, rho);
  p.triangles = triangles_in(p.cell, eps);
  if (p.triangles.empty())
    throw std::runtime_error("assemble_cell: no triangle fits in the cell");

  std::unordered_set<LatticeIndex, LatticeIndexHash> verts;
  for (const Triangle& t : p.triangles)
    for (LatticeIndex v : t.vertices()) verts.insert(v);

  // sites carrying no contained triangle are dropped entirely
  auto bplus = discrete_boundary(nu, rho, eps, +1);
  auto bminus = discrete_boundary(nu, rho, eps, -1);
  for (LatticeIndex s : bplus)
    if (verts.count(s)) {
      p.pinned[s] = ground_angle(GroundStateKind::pos, s);
      ++p.n_pinned_plus;
    }
  for (LatticeIndex s : bminus)
    if (verts.count(s)) {
      p.pinned[s] = ground_angle(GroundStateKind::neg, s);
      ++p.n_pinned_minus;
    }
  if (p.n_pinned_plus == 0 || p.n_pinned_minus == 0)
    throw std::runtime_error("assemble_cell: a pinned boundary set is empty");

  for (LatticeIndex v : verts)
    if (!p.pinned.count(v)) p.free_sites.push_back(v);
  std::sort(p.free_sites.begin(), p.free_sites.end());
  p.build_slots();
  return p;
}

// Energy in the cosine form and its gradient over the free angles:
// dF/dtheta_x = -2 eps sum_{T in Q, T ni x} sum_{y in T, y != x} sin(theta_x - theta_y).
inline double energy_and_gradient(const CellProblem& p, const std::vector<double>& x,
                                  std::vector<double>* grad) {
  if (grad) {
    grad->assign(x.size(), 0.0);
  }
  double total = 0.0;
  const double eps = p.eps;
  for (const auto& s : p.slots) {
    double th[3];
    for (int v = 0; v < 3; ++v)
      th[v] = s[v].free_idx >= 0 ? x[s[v].free_idx] : s[v].pinned_angle;
    double d01 = th[1] - th[0], d12 = th[2] - th[1], d20 = th[0] - th[2];
    total += eps * (3.0 + 2.0 * (std::cos(d01) + std::cos(d12) + std::cos(d20)));
    if (grad) {
      double s01 = std::sin(d01), s12 = std::sin(d12), s20 = std::sin(d20);
      // pairwise contributions -2 eps sin(theta_a - theta_b) at a
      if (s[0].free_idx >= 0) (*grad)[s[0].free_idx] += -2 * eps * (-s01 + s20);
      if (s[1].free_idx >= 0) (*grad)[s[1].free_idx] += -2 * eps * (s01 - s12);
      if (s[2].free_idx >= 0) (*grad)[s[2].free_idx] += -2 * eps * (s12 - s20);
    }
  }
  return total;
}

struct SolveResult {
  double min_energy = 0.0;
  SpinField field;
  double grad_norm = 0.0;
  int iterations = 0;
  int restart_index = 0;
  bool converged = false;
  std::vector<double> restart_energies;
  CellProblem problem;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// uniform in [0,1); explicit generator keeps runs bit-reproducible
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  double uniform() {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
};

inline double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

struct LbfgsOutcome {
  std::vector<double> x;
  double energy = 0;
  double grad_norm = 0;
  int iterations = 0;
  bool converged = false;
};

// Newton-CG polish for the last digits: near the minimum the energy is flat
// to double precision while the analytic gradient is still far above the
// requested tolerance, so steps are validated by gradient decrease.  Hessian
// action via central differences of the analytic gradient.
inline void newton_cg_polish(const CellProblem& p, std::vector<double>& x,
                             double gtol, int max_outer, int* iters) {
  const size_t n = x.size();
  std::vector<double> g(n), gp(n), gm(n), xt(n), d(n), r(n), q(n), hq(n);
  auto hessvec = [&](const std::vector<double>& v, std::vector<double>& out) {
    double vn = norm2(v);
    double sigma = 1e-6 / std::max(vn, 1e-300);
    for (size_t k = 0; k < n; ++k) xt[k] = x[k] + sigma * v[k];
    energy_and_gradient(p, xt, &gp);
    for (size_t k = 0; k < n; ++k) xt[k] = x[k] - sigma * v[k];
    energy_and_gradient(p, xt, &gm);
    for (size_t k = 0; k < n; ++k) out[k] = (gp[k] - gm[k]) / (2 * sigma);
  };
  double f = energy_and_gradient(p, x, &g);
  double stall_ref = norm2(g);
  int stall_age = 0;
  for (int outer = 0; outer < max_outer; ++outer) {
    double gn = norm2(g);
    if (gn <= gtol) break;
    // CG on H d = -g
    std::fill(d.begin(), d.end(), 0.0);
    for (size_t k = 0; k < n; ++k) r[k] = -g[k];
    q = r;
    double rr = 0;
    for (size_t k = 0; k < n; ++k) rr += r[k] * r[k];
    double rr0 = rr;
    for (int cg = 0; cg < 200 && rr > 1e-6 * rr0; ++cg) {
      hessvec(q, hq);
      double qhq = 0, qq = 0;
      for (size_t k = 0; k < n; ++k) {
        qhq += q[k] * hq[k];
        qq += q[k] * q[k];
      }
      if (!(qhq > 1e-12 * qq)) break;  // negative/zero curvature
      double alpha = rr / qhq;
      for (size_t k = 0; k < n; ++k) {
        d[k] += alpha * q[k];
        r[k] -= alpha * hq[k];
      }
      double rr_new = 0;
      for (size_t k = 0; k < n; ++k) rr_new += r[k] * r[k];
      double beta = rr_new / rr;
      rr = rr_new;
      for (size_t k = 0; k < n; ++k) q[k] = r[k] + beta * q[k];
    }
    if (norm2(d) == 0.0) break;
    // accept the longest step in {1, 1/2, ...} that lowers the gradient norm
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls) {
      for (size_t k = 0; k < n; ++k) xt[k] = x[k] + t * d[k];
      double ft = energy_and_gradient(p, xt, &gp);
      if (norm2(gp) < gn && ft <= f + 8e-16 * std::max(1.0, std::abs(f))) {
        x = xt;
        g = gp;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (iters) ++(*iters);
    if (!accepted) break;
    double gn_new = norm2(g);
    if (gn_new > 0.7 * stall_ref) {
      if (++stall_age > 5) break;
    } else {
      stall_ref = gn_new;
      stall_age = 0;
    }
  }
}

inline LbfgsOutcome lbfgs_minimize(const CellProblem& p, std::vector<double> x,
                                   int max_iter, double gtol) {
  const int mem = 10;
  const size_t n = x.size();
  std::vector<std::vector<double>> S, Y;
  std::vector<double> rho_hist;
  std::vector<double> g(n), g_new(n), d(n), x_new(n);
  double f = energy_and_gradient(p, x, &g);
  LbfgsOutcome out;
  int it = 0;
  int stale = 0;
  for (; it < max_iter; ++it) {
    double gn = norm2(g);
    if (gn <= gtol) {
      out.converged = true;
      break;
    }
    if (stale > 40) break;  // no measurable progress, keep best iterate
    // two-loop recursion
    d = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      double a = 0;
      for (size_t k = 0; k < n; ++k) a += S[i][k] * d[k];
      a *= rho_hist[i];
      alpha[i] = a;
      for (size_t k = 0; k < n; ++k) d[k] -= a * Y[i][k];
    }
    if (!S.empty()) {
      double yy = 0, sy = 0;
      const auto& s = S.back();
      const auto& y = Y.back();
      for (size_t k = 0; k < n; ++k) {
        yy += y[k] * y[k];
        sy += s[k] * y[k];
      }
      double gamma = sy / std::max(yy, 1e-300);
      for (size_t k = 0; k < n; ++k) d[k] *= gamma;
    }
    for (size_t i = 0; i < S.size(); ++i) {
      double b = 0;
      for (size_t k = 0; k < n; ++k) b += Y[i][k] * d[k];
      b *= rho_hist[i];
      for (size_t k = 0; k < n; ++k) d[k] += (alpha[i] - b) * S[i][k];
    }
    for (size_t k = 0; k < n; ++k) d[k] = -d[k];
    double dg = 0;
    for (size_t k = 0; k < n; ++k) dg += d[k] * g[k];
    if (!(dg < 0)) {  // not a descent direction: reset to steepest descent
      S.clear();
      Y.clear();
      rho_hist.clear();
      for (size_t k = 0; k < n; ++k) d[k] = -g[k];
      dg = -gn * gn;
    }
    // Armijo backtracking; once the predicted decrease falls below the
    // floating-point resolution of f, accept on gradient-norm decrease
    double t = (S.empty() && it == 0) ? std::min(1.0, 1.0 / std::max(gn, 1e-12)) : 1.0;
    double f_new = 0;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (size_t k = 0; k < n; ++k) x_new[k] = x[k] + t * d[k];
      f_new = energy_and_gradient(p, x_new, &g_new);
      double want = 1e-4 * t * dg;
      bool below_resolution = std::abs(want) < 8e-16 * std::max(1.0, std::abs(f));
      if (f_new <= f + want ||
          (below_resolution && f_new <= f + 4e-16 * std::max(1.0, std::abs(f)) &&
           norm2(g_new) < 0.999 * gn)) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;  // line search exhausted, keep best iterate
    stale = (f_new < f - 1e-15 * std::abs(f) || norm2(g_new) < gn) ? 0 : stale + 1;
    // curvature update
    double sy = 0, snorm = 0, ynorm = 0;
    std::vector<double> s(n), y(n);
    for (size_t k = 0; k < n; ++k) {
      s[k] = x_new[k] - x[k];
      y[k] = g_new[k] - g[k];
      sy += s[k] * y[k];
      snorm += s[k] * s[k];
      ynorm += y[k] * y[k];
    }
    if (sy > 1e-12 * std::sqrt(snorm * ynorm)) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > mem) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  if (!out.converged && norm2(g) > gtol && it < max_iter) {
    newton_cg_polish(p, x, gtol, 60, &it);
    f = energy_and_gradient(p, x, &g);
    out.converged = norm2(g) <= gtol;
  }
  out.x = std::move(x);
  out.energy = f;
  out.grad_norm = norm2(g);
  out.iterations = it;
  return out;
}

}  // namespace detail

// Sharp-interface ansatz: u^pos angles on <x,nu> >= 0, u^neg below.
inline std::vector<double> sharp_interface_start(const CellProblem& p) {
  std::vector<double> x(p.free_sites.size());
  for (size_t i = 0; i < p.free_sites.size(); ++i) {
    LatticeIndex s = p.free_sites[i];
    GroundStateKind k = dot(position(s, p.eps), p.nu) >= 0 ? GroundStateKind::pos
                                                           : GroundStateKind::neg;
    x[i] = ground_angle(k, s);
  }
  return x;
}

// Multistart descent: restart 0 is the sharp-interface ansatz, the middle
// restarts perturb it with N(0, sigma), the last one is fully random.  The
// best local minimum wins, ties to the lowest restart index.
inline SolveResult minimize(const CellProblem& p, const SolverConfig& cfg) {
  SolveResult res;
  res.problem = p;
  const size_t n = p.free_sites.size();
  double gtol = cfg.grad_tolerance > 0
                    ? cfg.grad_tolerance
                    : 1e-10 * p.eps * std::max<std::size_t>(n, 1);
  if (n == 0) {
    res.min_energy = energy_and_gradient(p, {}, nullptr);
    res.field.eps = p.eps;
    for (const auto& kv : p.pinned) res.field.angles[kv.first] = kv.second;
    res.converged = true;
    res.restart_energies = {res.min_energy};
    return res;
  }
  int R = std::max(1, cfg.restarts);
  std::vector<detail::LbfgsOutcome> outcomes(R);
  auto base = sharp_interface_start(p);
  parallel_for(R, cfg.threads, [&](int r) {
    std::vector<double> x0 = base;
    if (r == R - 1 && R >= 2) {
      detail::Rng rng(cfg.rng_seed * 0x9e3779b9ull + 15ull * R + r);
      for (double& v : x0) v = kTwoPi * rng.uniform();
    } else if (r > 0) {
      detail::Rng rng(cfg.rng_seed * 0x9e3779b9ull + 15ull * R + r);
      for (double& v : x0) v += cfg.perturbation_sigma * rng.normal();
    }
    outcomes[r] = detail::lbfgs_minimize(p, std::move(x0), cfg.max_iterations, gtol);
  });
  int best = 0;
  for (int r = 1; r < R; ++r)
    if (outcomes[r].energy < outcomes[best].energy) best = r;
  const auto& w = outcomes[best];
  res.min_energy = w.energy;
  res.grad_norm = w.grad_norm;
  res.iterations = w.iterations;
  res.restart_index = best;
  res.converged = w.converged;
  for (const auto& o : outcomes) res.restart_energies.push_back(o.energy);
  res.field.eps = p.eps;
  for (const auto& kv : p.pinned) res.field.angles[kv.first] = kv.second;
  for (size_t i = 0; i < n; ++i) res.field.angles[p.free_sites[i]] = w.x[i];
  return res;
}

// ---------------------------------------------------------------------------
// phi(nu) estimation and sweeps.

struct PhiEstimate {
  Vec2 nu;
  std::vector<std::pair<double, double>> entries;  // (eps, min_energy / rho)
  double extrapolated = 0.0;
  std::string method = "last";
  std::vector<SolveResult> solves;
};

inline PhiEstimate phi_estimate(Vec2 nu, std::vector<double> eps_list,
                                const SolverConfig& cfg, double rho = 1.0) {
  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
  PhiEstimate est;
  est.nu = normalized(nu);
  for (double eps : eps_list) {
    CellProblem p = assemble_cell(est.nu, rho, eps);
    SolveResult r = minimize(p, cfg);
    est.entries.emplace_back(eps, r.min_energy / rho);
    est.solves.push_back(std::move(r));
  }
  if (!est.entries.empty()) est.extrapolated = est.entries.back().second;
  return est;
}

struct SweepRow {
  double theta_rad, eps, min_energy, phi_estimate, grad_norm;
  int iterations, restart_index;
  bool converged;
};

inline std::vector<SweepRow> anisotropy_sweep(int n_angles,
                                              const std::vector<double>& eps_list,
                                              const SolverConfig& cfg,
                                              double rho = 1.0) {
  if (n_angles < 4) throw std::invalid_argument("anisotropy_sweep: n_angles >= 4");
  struct Task {
    double theta, eps;
  };
  std::vector<Task> tasks;
  for (int a = 0; a < n_angles; ++a) {
    double theta = kTwoPi * a / n_angles;
    for (double eps : eps_list) tasks.push_back({theta, eps});
  }
  std::vector<SweepRow> rows(tasks.size());
  SolverConfig inner = cfg;
  inner.threads = 1;  // parallelism lives at the task level here
  parallel_for(static_cast<int>(tasks.size()), cfg.threads, [&](int i) {
    const Task& t = tasks[i];
    Vec2 nu{std::cos(t.theta), std::sin(t.theta)};
    CellProblem p = assemble_cell(nu, rho, t.eps);
    SolveResult r = minimize(p, inner);
    rows[i] = SweepRow{t.theta, t.eps, r.min_energy, r.min_energy / rho,
                       r.grad_norm, r.iterations, r.restart_index, r.converged};
  });
  return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  out << "theta_rad,eps,min_energy,phi_estimate,grad_norm,iterations,restart_index,converged\n";
  char buf[256];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%d,%d,%d\n", r.theta_rad,
                  r.eps, r.min_energy, r.phi_estimate, r.grad_norm, r.iterations,
                  r.restart_index, r.converged ? 1 : 0);
    out << buf;
  }
}

// Mean chirality binned by the signed distance <barycenter, nu>.
inline std::vector<std::pair<double, double>> wall_profile(const SolveResult& res,
                                                           Vec2 nu, int bins) {
  if (bins < 1) throw std::invalid_argument("wall_profile: bins >= 1");
  nu = normalized(nu);
  const CellProblem& p = res.problem;
  std::vector<double> sum(bins, 0.0);
  std::vector<int> count(bins, 0);
  for (const Triangle& t : p.triangles) {
    double s = dot(t.barycenter(p.eps), nu);
    int b = static_cast<int>((s / p.rho + 0.5) * bins);
    b = std::clamp(b, 0, bins - 1);
    sum[b] += chirality_triangle(res.field, t);
    count[b] += 1;
  }
  std::vector<std::pair<double, double>> out;
  for (int b = 0; b < bins; ++b) {
    if (count[b] == 0) continue;
    double center = (static_cast<double>(b) + 0.5) / bins - 0.5;
    out.emplace_back(center * p.rho, sum[b] / count[b]);
  }
  return out;
}

// Fraction of the energy inside the horizontal bar R^nu_{rho, delta*rho}.
inline double energy_localization(const SolveResult& res, Vec2 nu, double delta) {
  nu = normalized(nu);
  const CellProblem& p = res.problem;
  Region bar = rect_region(nu, p.rho, delta * p.rho);
  double total = 0.0, inside = 0.0;
  for (const Triangle& t : p.triangles) {
    double e = energy_triangle(res.field, t);
    total += e;
    if (bar.tri_contains(t.polygon(p.eps))) inside += e;
  }
  if (total <= 0.0) return 1.0;
  return inside / total;
}

}  // namespace afxy
