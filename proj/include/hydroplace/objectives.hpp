#pragma once

#include "hydroplace/sensitivity.hpp"
#include "hydroplace/shortest_paths.hpp"

namespace hydroplace {

// ---------------------------------------------------------------------------
// D-optimality: f_D(z) = -log det(X0 + sum_j z_j A_j A_j^T). The same formula
// serves binary and fractional z (the natural continuous extension).
// ---------------------------------------------------------------------------

inline Mat information_matrix(const SensitivityBundle& b, const Vec& z) {
  if (z.size() != static_cast<Eigen::Index>(b.A.size()))
    throw ValidationError("placement length does not match candidate count");
  Mat M = b.X0;
  for (int j = 0; j < z.size(); ++j)
    if (z(j) != 0.0) M += z(j) * b.AAT[j];
  return M;
}

inline Eigen::LLT<Mat> information_cholesky(const SensitivityBundle& b, const Vec& z) {
  Eigen::LLT<Mat> llt(information_matrix(b, z));
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "information matrix is singular at this placement: selected sensor "
        "sensitivities plus X0 do not span the parameter space");
  return llt;
}

inline double f_D(const SensitivityBundle& b, const Vec& z) {
  auto llt = information_cholesky(b, z);
  double logdet = 0.0;
  const auto& L = llt.matrixLLT();
  for (int i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  return -logdet;
}

// gradient entries: d f_D / d z_j = -tr(M^{-1} A_j A_j^T) = -||L^{-1} A_j||_F^2
inline double f_D_value_grad(const SensitivityBundle& b, const Vec& z, Vec& grad) {
  auto llt = information_cholesky(b, z);
  const auto& L = llt.matrixLLT();
  double logdet = 0.0;
  for (int i = 0; i < L.rows(); ++i) logdet += 2.0 * std::log(L(i, i));
  grad.resize(z.size());
  Mat Y;
  for (int j = 0; j < z.size(); ++j) {
    Y = llt.matrixL().solve(b.A[j]);
    grad(j) = -Y.squaredNorm();
  }
  return -logdet;
}

inline Vec grad_f_D(const SensitivityBundle& b, const Vec& z) {
  Vec g;
  f_D_value_grad(b, z, g);
  return g;
}

// ---------------------------------------------------------------------------
// p-median coverage: f_T(z) = sum_i min_{j != i, z_j = 1} C_ij for binary z;
// the relaxed version fills each node's unit of assignment greedily along the
// ascending (C_ij, j) order with capacities z_j, which solves the inner LP.
// ---------------------------------------------------------------------------

inline double f_T(const CostMatrix& cost, const Vec& z) {
  const int n = static_cast<int>(cost.C.rows());
  if (z.size() != n) throw ValidationError("placement length mismatch");
  int selected = 0;
  for (int j = 0; j < n; ++j) {
    if (z(j) != 0.0 && z(j) != 1.0)
      throw ValidationError("f_T requires a binary placement");
    selected += z(j) == 1.0 ? 1 : 0;
  }
  if (selected < 2)
    throw ValidationError("p-median objective needs at least 2 selected sensors");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j : cost.row_order[i]) {
      if (j == i || z(j) != 1.0) continue;
      total += cost.C(i, j);
      break;
    }
  }
  return total;
}

struct SubgradValue {
  double value = 0.0;
  Vec subgrad;
};

inline SubgradValue f_T_relaxed(const CostMatrix& cost, const Vec& z) {
  const int n = static_cast<int>(cost.C.rows());
  if (z.size() != n) throw ValidationError("placement length mismatch");
  for (int j = 0; j < n; ++j)
    if (z(j) < -1e-12 || z(j) > 1.0 + 1e-12)
      throw ValidationError("relaxed placement outside [0,1]");

  SubgradValue out;
  out.subgrad = Vec::Zero(n);
  Vec t(n);  // per-node marginal (last filled) cost
  for (int i = 0; i < n; ++i) {
    double remaining = 1.0;
    double ti = 0.0;
    for (int j : cost.row_order[i]) {
      if (j == i) continue;
      double cap = z(j);
      if (cap <= 0.0) continue;
      double take = cap < remaining ? cap : remaining;
      out.value += take * cost.C(i, j);
      ti = cost.C(i, j);
      remaining -= take;
      if (remaining <= 0.0) break;
    }
    if (remaining > 1e-9)
      throw InfeasibleError("node '" + std::to_string(i) +
                            "' cannot fill one unit of assignment: total "
                            "sensor mass below 1");
    t(i) = ti;
  }
  // dual multipliers: g_j = -sum_{i != j} max(0, t_i - C_ij)
  for (int i = 0; i < n; ++i) {
    for (int j : cost.row_order[i]) {
      if (cost.C(i, j) >= t(i)) break;
      if (j != i) out.subgrad(j) -= t(i) - cost.C(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Chebyshev scalarization
// ---------------------------------------------------------------------------

struct ChebyshevWeights {
  double beta = 0.5;
  double w_D = 0.0, w_T = 0.0;
  double f_D_star = 0.0, f_T_star = 0.0;
  double f_D_at_zT = 0.0, f_T_at_zD = 0.0;
};

inline ChebyshevWeights chebyshev_weights(double beta, double f_D_at_zT,
                                          double f_D_star, double f_T_at_zD,
                                          double f_T_star) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw ValidationError("beta must lie strictly inside (0,1)");
  double dD = f_D_at_zT - f_D_star;
  double dT = f_T_at_zD - f_T_star;
  if (!(dD > 0.0) || !(dT > 0.0))
    throw ValidationError(
        "degenerate scalarization: individual optima coincide (non-positive "
        "anchor range)");
  ChebyshevWeights w;
  w.beta = beta;
  w.w_D = beta / dD;
  w.w_T = (1.0 - beta) / dT;
  w.f_D_star = f_D_star;
  w.f_T_star = f_T_star;
  w.f_D_at_zT = f_D_at_zT;
  w.f_T_at_zD = f_T_at_zD;
  return w;
}

// max of the scaled objective gaps; subgradient from the active term, the
// mean of both on an exact tie
inline SubgradValue f_beta(const SensitivityBundle& b, const CostMatrix& cost,
                           const ChebyshevWeights& w, const Vec& z) {
  Vec gD;
  double vD = f_D_value_grad(b, z, gD);
  SubgradValue tr = f_T_relaxed(cost, z);
  double a = w.w_D * (vD - w.f_D_star);
  double t = w.w_T * (tr.value - w.f_T_star);
  SubgradValue out;
  if (a > t) {
    out.value = a;
    out.subgrad = w.w_D * gD;
  } else if (t > a) {
    out.value = t;
    out.subgrad = w.w_T * tr.subgrad;
  } else {
    out.value = a;
    out.subgrad = 0.5 * (w.w_D * gD + w.w_T * tr.subgrad);
  }
  return out;
}

// binary fast path used by swap search (no gradients, binary f_T scan)
inline double f_beta_binary(const SensitivityBundle& b, const CostMatrix& cost,
                            const ChebyshevWeights& w, const Vec& z) {
  double a = w.w_D * (f_D(b, z) - w.f_D_star);
  double t = w.w_T * (f_T(cost, z) - w.f_T_star);
  return a > t ? a : t;
}

}  // namespace hydroplace
