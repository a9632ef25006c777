#pragma once

#include "hydroplace/problem.hpp"

#include <iomanip>
#include <sstream>

namespace hydroplace {

struct CriterionPoint {
  double fD = 0.0;
  double fT = 0.0;
};

struct FrontEntry {
  int k = 0;
  double beta = 0.0;  // 0 = coverage endpoint, 1 = calibration endpoint
  CriterionPoint image;
  std::vector<int> placement;  // selected node indices
  bool scalarized = false;     // false for the two endpoint entries
  double f_beta_hat = 0.0;
  double f_beta_star = 0.0;  // clamped to >= 0
  double gap = 0.0;
  double seconds = 0.0;
};

struct LowerAnchor {
  int k = 0;
  double beta = 0.0;
  CriterionPoint point;
};

struct ParetoArtifacts {
  bool degenerate = false;
  std::vector<std::string> warnings;
  double f_D_star = 0.0, f_T_star = 0.0;
  double f_D_at_zT = 0.0, f_T_at_zD = 0.0;
  std::vector<double> betas;
  std::vector<FrontEntry> P;
  std::vector<LowerAnchor> L;
  SingleResult d_solve, t_solve;
  double total_seconds = 0.0;
};

inline std::vector<int> selected_indices(const Vec& z) {
  std::vector<int> s;
  for (int i = 0; i < z.size(); ++i)
    if (z(i) == 1.0) s.push_back(i);
  return s;
}

// Chebyshev scalarization sweep: solve both individual problems, then one
// scalarized problem per beta_k = k/(N+1). P collects heuristic images
// (endpoints included), L the reconstructed lower-bound anchors.
inline ParetoArtifacts chebyshev_front(const PlacementProblem& p, int N) {
  if (N < 1) throw ValidationError("pareto sweep needs N >= 1");
  auto t0 = std::chrono::steady_clock::now();
  ParetoArtifacts art;

  art.d_solve = single_solve(p, make_fD_objective(p), ObjectiveKind::Smooth,
                             binary_fD(p));
  art.t_solve = single_solve(p, make_fT_objective(p), ObjectiveKind::Nonsmooth,
                             binary_fT(p));
  art.f_D_star = art.d_solve.f_star;
  art.f_T_star = art.t_solve.f_star;
  art.f_D_at_zT = f_D(p.bundle, art.t_solve.z_hat);
  art.f_T_at_zD = f_T(p.cost, art.d_solve.z_hat);

  auto image_of = [&](const Vec& z) {
    return CriterionPoint{f_D(p.bundle, z), f_T(p.cost, z)};
  };

  double dD = art.f_D_at_zT - art.f_D_star;
  double dT = art.f_T_at_zD - art.f_T_star;
  if (!(dD > 0.0) || !(dT > 0.0)) {
    art.degenerate = true;
    art.warnings.push_back(
        "degenerate scalarization: the individual optima coincide within the "
        "certified bounds; returning a single-point front");
    FrontEntry e;
    e.k = 0;
    e.beta = 0.0;
    e.image = image_of(art.d_solve.z_hat);
    e.placement = selected_indices(art.d_solve.z_hat);
    e.gap = art.d_solve.gap;
    art.P.push_back(std::move(e));
    art.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return art;
  }

  FrontEntry t_end;
  t_end.k = 0;
  t_end.beta = 0.0;
  t_end.image = image_of(art.t_solve.z_hat);
  t_end.placement = selected_indices(art.t_solve.z_hat);
  t_end.gap = art.t_solve.gap;
  t_end.seconds = art.t_solve.seconds;
  art.P.push_back(std::move(t_end));

  for (int k = 1; k <= N; ++k) {
    double beta = static_cast<double>(k) / (N + 1);
    art.betas.push_back(beta);
    auto w = chebyshev_weights(beta, art.f_D_at_zT, art.f_D_star, art.f_T_at_zD,
                               art.f_T_star);
    auto sres = single_solve(p, make_fbeta_objective(p, w), ObjectiveKind::Nonsmooth,
                             binary_fbeta(p, w));
    FrontEntry e;
    e.k = k;
    e.beta = beta;
    e.image = image_of(sres.z_hat);
    e.placement = selected_indices(sres.z_hat);
    e.scalarized = true;
    e.f_beta_hat = sres.f_hat;
    e.f_beta_star = std::max(0.0, sres.f_star);
    e.gap = optimality_gap(e.f_beta_hat, e.f_beta_star);
    e.seconds = sres.seconds;
    art.P.push_back(std::move(e));

    LowerAnchor a;
    a.k = k;
    a.beta = beta;
    a.point.fD = art.P.back().f_beta_star / w.w_D + art.f_D_star;
    a.point.fT = art.P.back().f_beta_star / w.w_T + art.f_T_star;
    art.L.push_back(a);
  }

  FrontEntry d_end;
  d_end.k = N + 1;
  d_end.beta = 1.0;
  d_end.image = image_of(art.d_solve.z_hat);
  d_end.placement = selected_indices(art.d_solve.z_hat);
  d_end.gap = art.d_solve.gap;
  d_end.seconds = art.d_solve.seconds;
  art.P.push_back(std::move(d_end));

  art.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return art;
}

// ------------------------- bound-set membership ----------------------------

inline bool in_W(const CriterionPoint& pt, const std::vector<CriterionPoint>& P) {
  for (const auto& q : P)
    if (pt.fD >= q.fD && pt.fT >= q.fT && (pt.fD > q.fD || pt.fT > q.fT))
      return true;
  return false;
}

inline bool in_R(const CriterionPoint& pt, double f_D_star, double f_T_star) {
  return pt.fD < f_D_star || pt.fT < f_T_star;
}

inline bool in_Q(const CriterionPoint& pt, const std::vector<CriterionPoint>& L) {
  for (const auto& l : L)
    if (pt.fD < l.fD && pt.fT < l.fT) return true;
  return false;
}

inline std::vector<CriterionPoint> images_of(const std::vector<FrontEntry>& P) {
  std::vector<CriterionPoint> v;
  v.reserve(P.size());
  for (const auto& e : P) v.push_back(e.image);
  return v;
}

inline std::vector<CriterionPoint> anchors_of(const std::vector<LowerAnchor>& L) {
  std::vector<CriterionPoint> v;
  v.reserve(L.size());
  for (const auto& a : L) v.push_back(a.point);
  return v;
}

// stable filter keeping points not dominated (weak with one strict) by any
// other; exact duplicates are all retained
inline std::vector<int> dominance_filter(const std::vector<CriterionPoint>& pts) {
  std::vector<int> keep;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    bool dominated = false;
    for (int j = 0; j < static_cast<int>(pts.size()) && !dominated; ++j) {
      if (j == i) continue;
      dominated = pts[j].fD <= pts[i].fD && pts[j].fT <= pts[i].fT &&
                  (pts[j].fD < pts[i].fD || pts[j].fT < pts[i].fT);
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

// ------------------------- exhaustive oracles ------------------------------

struct EnumeratedPlacement {
  std::vector<int> selection;
  CriterionPoint image;
};

inline double binomial_approx(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= static_cast<double>(n - k + i) / i;
  return v;
}

// all feasible binary placements (sum z = m, z_F = 1, z_E = 0, Gz <= b)
inline std::vector<EnumeratedPlacement> enumerate_feasible(
    const PlacementProblem& p, double limit = 1e6) {
  p.fs.validate();
  auto fm = p.fs.fixed_mask();
  auto em = p.fs.excluded_mask();
  std::vector<int> free;
  for (int i = 0; i < p.fs.n; ++i)
    if (!fm[i] && !em[i]) free.push_back(i);
  const int need = p.fs.m - static_cast<int>(p.fs.fixed.size());
  if (binomial_approx(static_cast<int>(free.size()), need) > limit)
    throw ValidationError("enumeration limit exceeded: too many placements");

  std::vector<EnumeratedPlacement> out;
  Vec z = Vec::Zero(p.fs.n);
  for (int i : p.fs.fixed) z(i) = 1.0;
  std::vector<int> combo(need);

  auto feasible = [&](const Vec& zz) {
    for (int i = 0; i < p.fs.n; ++i) {
      if (zz(i) != 1.0) continue;
      for (int u : p.neighbors[i])
        if (u > i && zz(u) == 1.0) return false;
    }
    return true;
  };

  auto emit = [&]() {
    if (!feasible(z)) return;
    EnumeratedPlacement e;
    e.selection = selected_indices(z);
    e.image.fD = f_D(p.bundle, z);
    e.image.fT = f_T(p.cost, z);
    out.push_back(std::move(e));
  };

  if (need == 0) {
    emit();
    return out;
  }
  // iterative combination walk over the free pool
  for (int i = 0; i < need; ++i) combo[i] = i;
  const int nf = static_cast<int>(free.size());
  while (true) {
    for (int i = 0; i < need; ++i) z(free[combo[i]]) = 1.0;
    emit();
    for (int i = 0; i < need; ++i) z(free[combo[i]]) = 0.0;
    int i = need - 1;
    while (i >= 0 && combo[i] == nf - need + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < need; ++j) combo[j] = combo[j - 1] + 1;
  }
  return out;
}

inline std::vector<EnumeratedPlacement> brute_force_pareto(
    const PlacementProblem& p, double limit = 1e6) {
  auto all = enumerate_feasible(p, limit);
  std::vector<CriterionPoint> pts;
  pts.reserve(all.size());
  for (const auto& e : all) pts.push_back(e.image);
  std::vector<EnumeratedPlacement> front;
  for (int i : dominance_filter(pts)) front.push_back(all[i]);
  return front;
}

// Balanced-weights beta for a target Pareto point (f_D(z), f_T(z)): the value
// in (0,1) making both scaled gap terms of the scalarization equal, so the
// scalarized optimum can attain that point.
inline double beta_star(double f_D_at_zT, double f_D_star, double f_T_at_zD,
                        double f_T_star, double f_D_at_z, double f_T_at_z) {
  double dD = f_D_at_zT - f_D_star;
  double dT = f_T_at_zD - f_T_star;
  double a = dD * (f_T_at_z - f_T_star);
  double c = dT * (f_D_at_z - f_D_star);
  if (!(a + c > 0.0))
    throw ValidationError("beta* undefined: target coincides with both anchors");
  return a / (a + c);
}

// ------------------------------ artifacts ----------------------------------

inline json pareto_to_json(const ParetoArtifacts& art, const PlacementProblem& p) {
  json j;
  j["degenerate"] = art.degenerate;
  j["warnings"] = art.warnings;
  j["anchors"] = {{"f_D_star", art.f_D_star},
                  {"f_T_star", art.f_T_star},
                  {"f_D_at_zT", art.f_D_at_zT},
                  {"f_T_at_zD", art.f_T_at_zD}};
  j["betas"] = art.betas;
  j["P"] = json::array();
  json per_solve_seconds = json::array();
  for (const auto& e : art.P) {
    json pe = {{"k", e.k},
               {"beta", e.beta},
               {"f_D", e.image.fD},
               {"f_T", e.image.fT},
               {"gap", e.gap}};
    json ids = json::array();
    for (int i : e.placement) ids.push_back(p.net.nodes[i].id);
    pe["placement"] = std::move(ids);
    if (e.scalarized) {
      pe["f_beta_hat"] = e.f_beta_hat;
      pe["f_beta_star"] = e.f_beta_star;
    }
    j["P"].push_back(std::move(pe));
    per_solve_seconds.push_back(e.seconds);
  }
  j["L"] = json::array();
  for (const auto& a : art.L)
    j["L"].push_back({{"k", a.k}, {"beta", a.beta}, {"f_D", a.point.fD},
                      {"f_T", a.point.fT}});
  j["individual"] = {
      {"doptimal",
       {{"f_hat", art.d_solve.f_hat},
        {"f_star", art.d_solve.f_star},
        {"gap", art.d_solve.gap},
        {"relax_iterations", art.d_solve.relax_iterations},
        {"swap_evaluations", art.d_solve.swap_evaluations}}},
      {"pmedian",
       {{"f_hat", art.t_solve.f_hat},
        {"f_star", art.t_solve.f_star},
        {"gap", art.t_solve.gap},
        {"relax_iterations", art.t_solve.relax_iterations},
        {"swap_evaluations", art.t_solve.swap_evaluations}}}};
  j["timings"] = {{"total_seconds", art.total_seconds},
                  {"per_point_seconds", std::move(per_solve_seconds)},
                  {"doptimal_seconds", art.d_solve.seconds},
                  {"pmedian_seconds", art.t_solve.seconds}};
  return j;
}

namespace detail {

inline void csv_row(std::ostream& os, const std::string& series, double x, double y) {
  os << series << ',' << std::setprecision(17) << x << ',' << y << '\n';
}

struct Extent {
  double y_top, x_right;
};

inline Extent plot_extent(const std::vector<CriterionPoint>& pts, double f_D_star,
                          double f_T_star) {
  double xmax = f_D_star, ymax = f_T_star;
  double xmin = f_D_star, ymin = f_T_star;
  for (const auto& q : pts) {
    xmax = std::max(xmax, q.fD);
    ymax = std::max(ymax, q.fT);
    xmin = std::min(xmin, q.fD);
    ymin = std::min(ymin, q.fT);
  }
  double xs = xmax - xmin, ys = ymax - ymin;
  return {ymax + (ys > 0 ? 0.05 * ys : 1.0), xmax + (xs > 0 ? 0.05 * xs : 1.0)};
}

}  // namespace detail

// Plot CSV: raw P and L points plus the two staircase boundaries — the
// lower-left frontier of W (region certified to be dominated) and the
// upper-right frontier of R [union] Q (region certified to contain no
// feasible image).
inline std::string pareto_plot_csv(const ParetoArtifacts& art) {
  std::ostringstream os;
  os << "series,f_D,f_T\n";
  auto P = images_of(art.P);
  auto L = anchors_of(art.L);
  for (const auto& q : P) detail::csv_row(os, "P", q.fD, q.fT);
  for (const auto& q : L) detail::csv_row(os, "L", q.fD, q.fT);

  std::vector<CriterionPoint> all = P;
  all.insert(all.end(), L.begin(), L.end());
  auto ext = detail::plot_extent(all, art.f_D_star, art.f_T_star);

  // W boundary: staircase through the nondominated subset of P
  std::vector<CriterionPoint> pw;
  for (int i : dominance_filter(P)) pw.push_back(P[i]);
  std::sort(pw.begin(), pw.end(), [](const CriterionPoint& a, const CriterionPoint& b) {
    if (a.fD != b.fD) return a.fD < b.fD;
    return a.fT < b.fT;
  });
  pw.erase(std::unique(pw.begin(), pw.end(),
                       [](const CriterionPoint& a, const CriterionPoint& b) {
                         return a.fD == b.fD && a.fT == b.fT;
                       }),
           pw.end());
  if (!pw.empty()) {
    detail::csv_row(os, "W_boundary", pw.front().fD, ext.y_top);
    for (std::size_t i = 0; i < pw.size(); ++i) {
      detail::csv_row(os, "W_boundary", pw[i].fD, pw[i].fT);
      if (i + 1 < pw.size())
        detail::csv_row(os, "W_boundary", pw[i + 1].fD, pw[i].fT);
    }
    detail::csv_row(os, "W_boundary", ext.x_right, pw.back().fT);
  }

  if (!art.degenerate) {
    // R union Q boundary: anchor rails plus the staircase over the maximal
    // L points (those not componentwise below another L point)
    std::vector<CriterionPoint> lm;
    for (const auto& l : L) {
      bool covered = false;
      for (const auto& o : L)
        if ((o.fD > l.fD && o.fT >= l.fT) || (o.fD >= l.fD && o.fT > l.fT)) {
          covered = true;
          break;
        }
      if (!covered) lm.push_back(l);
    }
    std::sort(lm.begin(), lm.end(), [](const CriterionPoint& a, const CriterionPoint& b) {
      if (a.fD != b.fD) return a.fD < b.fD;
      return a.fT > b.fT;
    });
    lm.erase(std::unique(lm.begin(), lm.end(),
                         [](const CriterionPoint& a, const CriterionPoint& b) {
                           return a.fD == b.fD && a.fT == b.fT;
                         }),
             lm.end());
    detail::csv_row(os, "RQ_boundary", art.f_D_star, ext.y_top);
    double prev_x = art.f_D_star;
    for (const auto& l : lm) {
      detail::csv_row(os, "RQ_boundary", prev_x, l.fT);
      detail::csv_row(os, "RQ_boundary", l.fD, l.fT);
      prev_x = l.fD;
    }
    detail::csv_row(os, "RQ_boundary", prev_x, art.f_T_star);
    detail::csv_row(os, "RQ_boundary", ext.x_right, art.f_T_star);
  }
  return os.str();
}

}  // namespace hydroplace
