#pragma once

#include "hydroplace/relaxation.hpp"

#include <set>

namespace hydroplace {

namespace detail {

inline std::vector<int> selection_of(const Vec& z) {
  std::vector<int> sel;
  for (int i = 0; i < z.size(); ++i)
    if (z(i) == 1.0) sel.push_back(i);
  return sel;
}

inline bool has_selected_neighbor(int j, const Vec& z,
                                  const std::vector<std::vector<int>>& neighbors,
                                  int ignoring = -1) {
  for (int u : neighbors[j])
    if (u != ignoring && z(u) == 1.0) return true;
  return false;
}

}  // namespace detail

// Greedy rounding in descending z* order. Fixed nodes enter first; any node
// adjacent to an already selected one is skipped (Gz <= b).
inline Vec round_placement(const Vec& z_star, const FeasibleSet& fs,
                           const std::vector<std::vector<int>>& neighbors) {
  fs.validate();
  if (z_star.size() != fs.n) throw ValidationError("z* length mismatch");
  Vec z = Vec::Zero(fs.n);
  auto em = fs.excluded_mask();
  int count = 0;
  for (int i : fs.fixed) {
    if (detail::has_selected_neighbor(i, z, neighbors))
      throw InfeasibleError("fixed sensors '" + std::to_string(i) +
                            "' violate the adjacency constraints");
    z(i) = 1.0;
    ++count;
  }
  auto fm = fs.fixed_mask();
  std::vector<int> order;
  order.reserve(fs.n);
  for (int i = 0; i < fs.n; ++i)
    if (!fm[i] && !em[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (z_star(a) != z_star(b)) return z_star(a) > z_star(b);
    return a < b;
  });
  for (int i : order) {
    if (count == fs.m) break;
    if (detail::has_selected_neighbor(i, z, neighbors)) continue;
    z(i) = 1.0;
    ++count;
  }
  if (count < fs.m)
    throw InfeasibleError("rounding cannot reach " + std::to_string(fs.m) +
                          " sensors without violating adjacency constraints");
  return z;
}

struct SwapResult {
  Vec z;
  long evaluations = 0;
  std::vector<double> trace;  // accepted objective values, non-increasing
};

using BinaryObjective = std::function<double(const Vec&)>;

// First-improvement single-swap search restricted to the fractional band
// 0.1 <= z* <= 0.9. Removals scan ascending, additions descending by z*.
// A swap is accepted when adjacency-feasible and f does not increase; the
// pass restarts after each acceptance. A visited-set guard rejects lateral
// moves that return to a previously accepted placement.
inline SwapResult swap_improve(const Vec& zhat, const Vec& z_star,
                               const BinaryObjective& f, const FeasibleSet& fs,
                               const std::vector<std::vector<int>>& neighbors,
                               long max_iter = 100000) {
  fs.validate();
  SwapResult res;
  res.z = zhat;

  auto fm = fs.fixed_mask();
  auto em = fs.excluded_mask();
  auto in_band = [&](int i) {
    return !fm[i] && !em[i] && z_star(i) >= 0.1 && z_star(i) <= 0.9;
  };
  std::vector<int> band;
  for (int i = 0; i < fs.n; ++i)
    if (in_band(i)) band.push_back(i);

  auto removal_order = [&]() {
    std::vector<int> rm;
    for (int i : band)
      if (res.z(i) == 1.0) rm.push_back(i);
    std::sort(rm.begin(), rm.end(), [&](int a, int b) {
      if (z_star(a) != z_star(b)) return z_star(a) < z_star(b);
      return a < b;
    });
    return rm;
  };
  auto addition_order = [&]() {
    std::vector<int> ad;
    for (int i : band)
      if (res.z(i) == 0.0) ad.push_back(i);
    std::sort(ad.begin(), ad.end(), [&](int a, int b) {
      if (z_star(a) != z_star(b)) return z_star(a) > z_star(b);
      return a < b;
    });
    return ad;
  };

  if (removal_order().empty() || addition_order().empty()) return res;

  double f_cur = f(res.z);
  res.evaluations = 1;
  res.trace.push_back(f_cur);
  std::set<std::vector<int>> visited;
  visited.insert(detail::selection_of(res.z));

  bool changed = true;
  while (changed && res.evaluations < max_iter) {
    changed = false;
    auto removals = removal_order();
    auto additions = addition_order();
    for (int i : removals) {
      for (int j : additions) {
        if (res.evaluations >= max_iter) break;
        if (detail::has_selected_neighbor(j, res.z, neighbors, i)) continue;
        Vec z_test = res.z;
        z_test(i) = 0.0;
        z_test(j) = 1.0;
        auto key = detail::selection_of(z_test);
        if (visited.count(key)) continue;
        double f_test = f(z_test);
        ++res.evaluations;
        if (std::isfinite(f_test) && f_test <= f_cur) {
          res.z = std::move(z_test);
          f_cur = f_test;
          res.trace.push_back(f_cur);
          visited.insert(std::move(key));
          changed = true;
          break;
        }
      }
      if (changed) break;
    }
  }
  return res;
}

inline double optimality_gap(double f_hat, double f_star) {
  return (f_hat - f_star) / std::max(std::abs(f_star), 1e-9);
}

}  // namespace hydroplace
