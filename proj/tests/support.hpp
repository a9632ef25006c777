#pragma once

// Independent oracles used to cross-check the library. Each one recomputes a
// quantity through a different algorithm than the implementation under test.

#include "hydroplace/hydroplace.hpp"

#include <random>
#include <vector>

namespace oracle {

using hydroplace::Mat;
using hydroplace::Vec;

// all-pairs shortest paths by Floyd-Warshall over nodes + inlets
inline Mat floyd_warshall_costs(const hydroplace::Network& net) {
  const int nn = net.n_n();
  const int n0 = net.n_0();
  const int total = nn + n0;
  const double inf = std::numeric_limits<double>::infinity();
  Mat d = Mat::Constant(total, total, inf);
  for (int i = 0; i < total; ++i) d(i, i) = 0.0;
  auto vid = [&](const hydroplace::EndRef& e) {
    return e.is_inlet ? nn + e.index : e.index;
  };
  for (const auto& l : net.links) {
    double w = l.kind == hydroplace::LinkKind::Valve ? 0.0 : l.length;
    int a = vid(l.from), b = vid(l.to);
    d(a, b) = std::min(d(a, b), w);
    d(b, a) = std::min(d(b, a), w);
  }
  for (int k = 0; k < total; ++k)
    for (int i = 0; i < total; ++i)
      for (int j = 0; j < total; ++j)
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d.topLeftCorner(nn, nn);
}

// state sensitivities from a dense solve of the full saddle system
// [ G  A12 ] [dq]   [ B_r ]
// [A12'  0 ] [dh] = [  0  ],  Phi(:, r) = -[dq; dh]
inline Mat dense_saddle_sensitivity(const hydroplace::Network& net,
                                    const hydroplace::IncidenceSet& inc,
                                    const std::vector<hydroplace::LinkPhysics>& phys,
                                    const hydroplace::HydraulicState& st) {
  const int np = net.n_p();
  const int nn = net.n_n();
  const int nr = net.n_r();
  Mat J = Mat::Zero(np + nn, np + nn);
  for (int l = 0; l < np; ++l) J(l, l) = phys[l].dheadloss(st.q(l));
  J.topRightCorner(np, nn) = Mat(inc.A12);
  J.bottomLeftCorner(nn, np) = Mat(inc.A12).transpose();
  Mat rhs = Mat::Zero(np + nn, nr);
  for (int l = 0; l < np; ++l) {
    const auto& lk = net.links[l];
    if (lk.group < 0) continue;
    rhs(l, lk.group) = phys[l].drho_dtheta * phys[l].w(st.q(l));
  }
  return -J.fullPivLu().solve(rhs);
}

// hydraulic state sensitivities by central finite differences on theta
inline Mat finite_difference_sensitivity(const hydroplace::Network& net,
                                         const hydroplace::IncidenceSet& inc,
                                         const Vec& theta, int scenario,
                                         const hydroplace::HydraulicOptions& opts) {
  const int np = net.n_p();
  const int nn = net.n_n();
  const int nr = net.n_r();
  Mat fd(np + nn, nr);
  for (int r = 0; r < nr; ++r) {
    double h = 1e-4 * theta(r);
    Vec tp = theta, tm = theta;
    tp(r) += h;
    tm(r) -= h;
    auto sp = hydroplace::solve_hydraulics(net, inc, tp, scenario, opts);
    auto sm = hydroplace::solve_hydraulics(net, inc, tm, scenario, opts);
    fd.col(r).head(np) = (sp.q - sm.q) / (2.0 * h);
    fd.col(r).tail(nn) = (sp.h - sm.h) / (2.0 * h);
  }
  return fd;
}

// per-node transport LP solved through its dual: phi_i(z) maximizes
// t - sum_j z_j max(0, t - C_ij) over breakpoints t in {C_ij}
inline double transport_lp_dual(const Mat& C, const Vec& z, int i) {
  const int n = static_cast<int>(z.size());
  double cover = 0.0;
  for (int j = 0; j < n; ++j)
    if (j != i) cover += z(j);
  if (cover < 1.0 - 1e-12)
    throw hydroplace::InfeasibleError("node cannot be covered");
  double best = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < n; ++b) {
    if (b == i) continue;
    double t = C(i, b);
    double val = t;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      val -= z(j) * std::max(0.0, t - C(i, j));
    }
    best = std::max(best, val);
  }
  return best;
}

inline double pmedian_relaxed_by_lp(const Mat& C, const Vec& z) {
  double total = 0.0;
  for (int i = 0; i < C.rows(); ++i) total += transport_lp_dual(C, z, i);
  return total;
}

// synthetic information bundle: random sensitivity rows with identity prior,
// positive definite at every binary selection
inline hydroplace::SensitivityBundle random_bundle(int n_nodes, int n_r, int n_t,
                                                   std::uint64_t seed,
                                                   double x0_scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  hydroplace::SensitivityBundle b;
  b.n_r = n_r;
  b.n_t = n_t;
  b.sigma = 1.0;
  b.lambda = std::numeric_limits<double>::infinity();
  b.A.resize(n_nodes);
  b.AAT.resize(n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    Mat A(n_r, n_t);
    for (int r = 0; r < n_r; ++r)
      for (int t = 0; t < n_t; ++t) A(r, t) = gauss(rng);
    b.A[j] = A;
    b.AAT[j] = A * A.transpose();
  }
  b.X0 = x0_scale * Mat::Identity(n_r, n_r);
  return b;
}

// every m-subset of {0..n-1}, visited through a simple recursion
inline void for_each_subset(int n, int m,
                            const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(pick.size()) == m) {
      fn(pick);
      return;
    }
    if (n - start < m - static_cast<int>(pick.size())) return;
    for (int i = start; i < n; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
}

inline Vec indicator(int n, const std::vector<int>& sel) {
  Vec z = Vec::Zero(n);
  for (int i : sel) z(i) = 1.0;
  return z;
}

}  // namespace oracle
