#pragma once

#include "hydroplace/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

namespace hydroplace {

// Relaxed feasible region: { sum z = m, 0 <= z <= 1, z_F = 1, z_E = 0 }.
// Adjacency constraints are deliberately not part of it; they are enforced
// during rounding and swapping, which keeps the linear minimization oracle
// closed-form and every linearization bound valid.
struct FeasibleSet {
  int n = 0;
  int m = 0;
  std::vector<int> fixed;
  std::vector<int> excluded;

  std::vector<char> fixed_mask() const {
    std::vector<char> mk(n, 0);
    for (int i : fixed) mk.at(i) = 1;
    return mk;
  }
  std::vector<char> excluded_mask() const {
    std::vector<char> mk(n, 0);
    for (int i : excluded) mk.at(i) = 1;
    return mk;
  }

  void validate() const {
    if (n <= 0) throw ValidationError("feasible set has no candidates");
    if (m > n)
      throw ValidationError("budget m = " + std::to_string(m) +
                            " exceeds candidate count " + std::to_string(n));
    if (m < 0) throw ValidationError("budget m must be nonnegative");
    auto fm = fixed_mask();
    for (int i : excluded) {
      if (i < 0 || i >= n)
        throw ValidationError("excluded index " + std::to_string(i) + " out of range");
      if (fm[i])
        throw ValidationError("node index " + std::to_string(i) +
                              " is both fixed and excluded");
    }
    if (static_cast<int>(fixed.size()) > m)
      throw ValidationError("fixed sensor set larger than budget m");
    int free_count = n - static_cast<int>(fixed.size()) -
                     static_cast<int>(excluded.size());
    if (m - static_cast<int>(fixed.size()) > free_count)
      throw InfeasibleError("budget m exceeds available candidate nodes");
  }
};

// vertex minimizing g.z: fixed coordinates pinned to 1, then the m - |F|
// smallest-gradient free coordinates, ties broken by index
inline Vec lmo_top_m(const Vec& g, const FeasibleSet& fs) {
  if (fs.m > fs.n)
    throw ValidationError("budget m exceeds candidate count");
  auto fm = fs.fixed_mask();
  auto em = fs.excluded_mask();
  Vec z = Vec::Zero(fs.n);
  int need = fs.m;
  std::vector<int> pool;
  pool.reserve(fs.n);
  for (int i = 0; i < fs.n; ++i) {
    if (fm[i]) {
      z(i) = 1.0;
      --need;
    } else if (!em[i]) {
      pool.push_back(i);
    }
  }
  if (need < 0) throw ValidationError("fixed sensor set larger than budget m");
  if (need > static_cast<int>(pool.size()))
    throw InfeasibleError("budget m exceeds available candidate nodes");
  std::partial_sort(pool.begin(), pool.begin() + need, pool.end(),
                    [&](int a, int b) {
                      if (g(a) != g(b)) return g(a) < g(b);
                      return a < b;
                    });
  for (int t = 0; t < need; ++t) z(pool[t]) = 1.0;
  return z;
}

// Euclidean projection onto the relaxed feasible region via bisection on the
// shift multiplier of the box-clamped simplex
inline Vec project_box_simplex(const Vec& v, const FeasibleSet& fs) {
  auto fm = fs.fixed_mask();
  auto em = fs.excluded_mask();
  Vec z = Vec::Zero(fs.n);
  std::vector<int> free;
  free.reserve(fs.n);
  double target = fs.m;
  for (int i = 0; i < fs.n; ++i) {
    if (fm[i]) {
      z(i) = 1.0;
      target -= 1.0;
    } else if (!em[i]) {
      free.push_back(i);
    }
  }
  if (target < 0.0 || target > static_cast<double>(free.size()))
    throw InfeasibleError("budget m incompatible with fixed/excluded sets");
  if (free.empty()) return z;
  if (target == 0.0) return z;
  if (target == static_cast<double>(free.size())) {
    for (int i : free) z(i) = 1.0;
    return z;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i : free) {
    lo = std::min(lo, v(i) - 1.0);
    hi = std::max(hi, v(i));
  }
  auto mass = [&](double mu) {
    double s = 0.0;
    for (int i : free) s += std::clamp(v(i) - mu, 0.0, 1.0);
    return s;
  };
  for (int it = 0; it < 4096; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted at double precision
    if (mass(mid) >= target)
      lo = mid;
    else
      hi = mid;
    if (std::abs(mass(mid) - target) < 1e-13) break;
  }
  double mu = std::abs(mass(lo) - target) <= std::abs(mass(hi) - target) ? lo : hi;
  for (int i : free) z(i) = std::clamp(v(i) - mu, 0.0, 1.0);
  double err = z.sum() - fs.m;
  if (std::abs(err) > 1e-10)
    throw NumericalError("projection failed to meet the budget constraint");
  return z;
}

inline Vec uniform_start(const FeasibleSet& fs) {
  auto fm = fs.fixed_mask();
  auto em = fs.excluded_mask();
  Vec z = Vec::Zero(fs.n);
  int nfree = 0;
  double target = fs.m;
  for (int i = 0; i < fs.n; ++i) {
    if (fm[i]) {
      z(i) = 1.0;
      target -= 1.0;
    } else if (!em[i]) {
      ++nfree;
    }
  }
  if (nfree == 0) return z;
  double fill = target / nfree;
  for (int i = 0; i < fs.n; ++i)
    if (!fm[i] && !em[i]) z(i) = fill;
  return z;
}

enum class ObjectiveKind { Smooth, Nonsmooth };

struct RelaxOptions {
  int fw_max_iter = 2000;
  int subgrad_max_iter = 5000;
  double fw_gap_tol = 1e-5;    // relative to max(1, |f(z0)|)
  double stop_gap_tol = 1e-9;  // early exit when bound meets best value
  bool record_trace = true;
};

struct TracePoint {
  int iter;
  double value;
  double bound;
};

struct RelaxationResult {
  Vec z;               // best feasible iterate
  double value = 0.0;  // f at that iterate
  double bound = 0.0;  // best certified lower bound over the relaxed set
  int iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

using ObjectiveFn = std::function<double(const Vec&, Vec&)>;

// First-order solver over the relaxed feasible region. Frank-Wolfe for the
// smooth objective, projected subgradient with c/sqrt(t) steps otherwise.
// Both harvest the linearization bound f(z_t) + g_t.(x_t - z_t) at the LMO
// vertex x_t; its running maximum is a certified lower bound on the relaxed
// optimum (hence on every feasible binary placement).
inline RelaxationResult solve_relaxation(const ObjectiveFn& fn, ObjectiveKind kind,
                                         const FeasibleSet& fs,
                                         const RelaxOptions& opts = {}) {
  fs.validate();
  RelaxationResult res;
  Vec z = uniform_start(fs);
  Vec g(fs.n);

  double f = fn(z, g);
  if (!std::isfinite(f))
    throw NumericalError("objective is non-finite at the relaxation start");
  const double gap_scale = std::max(1.0, std::abs(f));
  res.z = z;
  res.value = f;
  res.bound = -std::numeric_limits<double>::infinity();

  const int budget = kind == ObjectiveKind::Smooth ? opts.fw_max_iter
                                                   : opts.subgrad_max_iter;
  double step_c = 0.0;
  for (int t = 1; t <= budget; ++t) {
    Vec x = lmo_top_m(g, fs);
    double lin = f + g.dot(x - z);
    res.bound = std::max(res.bound, lin);
    if (f < res.value) {
      res.value = f;
      res.z = z;
    }
    if (opts.record_trace) res.trace.push_back({t, f, res.bound});
    res.iterations = t;

    double gap = f - lin;  // nonnegative for convex objectives
    if (kind == ObjectiveKind::Smooth && gap <= opts.fw_gap_tol * gap_scale) {
      res.converged = true;
      break;
    }
    if (res.value - res.bound <= opts.stop_gap_tol * gap_scale) {
      res.converged = true;
      break;
    }

    if (kind == ObjectiveKind::Smooth) {
      double gamma = 2.0 / (t + 2.0);  // keeps iterates strictly interior
      z += gamma * (x - z);
    } else {
      if (t == 1) {
        double gn2 = g.squaredNorm();
        step_c = gn2 > 0.0 ? std::max(gap, 0.0) / gn2 : 0.0;
        if (step_c <= 0.0) {
          res.converged = true;  // zero subgradient: z is optimal
          break;
        }
        // keep the first step no longer than the box scale so the
        // projection bracket stays well conditioned
        double cap = fs.n / std::sqrt(gn2);
        step_c = std::min(step_c, cap);
      }
      z = project_box_simplex(z - (step_c / std::sqrt(static_cast<double>(t))) * g,
                              fs);
    }
    f = fn(z, g);
    if (!std::isfinite(f))
      throw NumericalError("objective became non-finite during relaxation");
  }
  return res;
}

inline void write_trace_csv(const RelaxationResult& res, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write trace file '" + path + "'");
  out << "iterate,value,bound\n";
  for (const auto& tp : res.trace)
    out << tp.iter << ',' << tp.value << ',' << tp.bound << '\n';
}

}  // namespace hydroplace
