#pragma once

#include "hydroplace/linalg.hpp"
#include "hydroplace/network.hpp"

#include <cmath>
#include <mutex>

namespace hydroplace {

enum class FrictionModel { HazenWilliams, DarcyWeisbach };

struct HydraulicOptions {
  FrictionModel model = FrictionModel::HazenWilliams;
  double q_smooth = 1e-5;      // m^3/s, blend width around zero flow
  double newton_tol = 1e-9;    // absolute target on the energy residual
  double residual_tol = 1e-8;  // contract on the full residual blocks
  int max_iter = 100;
  int max_backtracks = 20;
  unsigned threads = 1;
};

// Head loss across a link is psi(q) = rho * w(q) with w(q) = |q|^(n-1) q,
// replaced by the odd cubic c1 q + c3 q^3 below |q| < q0 (C^1 match at q0,
// strictly increasing everywhere, so zero-flow loops stay nonsingular).
// Pipe resistance follows the friction model; valves use their fixed loss
// coefficient with n = 2.
struct LinkPhysics {
  double rho = 0.0;
  double n = 2.0;
  double drho_dtheta = 0.0;  // zero for valves
  double c1 = 0.0, c3 = 0.0;
  double q0 = 1e-5;

  double w(double q) const {
    double a = std::abs(q);
    if (a >= q0) return std::pow(a, n - 1.0) * q;
    return c1 * q + c3 * q * q * q;
  }
  double dw(double q) const {
    double a = std::abs(q);
    if (a >= q0) return n * std::pow(a, n - 1.0);
    return c1 + 3.0 * c3 * q * q;
  }
  // psi(q)/q, the A11 diagonal entry; finite and positive at q = 0
  double w_over_q(double q) const {
    double a = std::abs(q);
    if (a >= q0) return std::pow(a, n - 1.0);
    return c1 + c3 * q * q;
  }
  double headloss(double q) const { return rho * w(q); }
  double dheadloss(double q) const { return rho * dw(q); }
};

inline std::pair<double, double> resistance(const Link& link, double theta,
                                            FrictionModel model) {
  if (link.kind == LinkKind::Valve) return {link.loss_coeff, 2.0};
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ValidationError("roughness for pipe '" + link.id +
                          "' must be positive, got " + std::to_string(theta));
  if (model == FrictionModel::HazenWilliams) {
    double rho = 10.67 * link.length /
                 (std::pow(theta, 1.852) * std::pow(link.diameter, 4.871));
    return {rho, 1.852};
  }
  double rho = 0.0826 * theta * link.length / std::pow(link.diameter, 5.0);
  return {rho, 2.0};
}

inline std::vector<LinkPhysics> build_physics(const Network& net, const Vec& theta,
                                              const HydraulicOptions& opts) {
  if (theta.size() != net.n_r())
    throw ValidationError("expected " + std::to_string(net.n_r()) +
                          " roughness values, got " + std::to_string(theta.size()));
  std::vector<LinkPhysics> phys(net.n_p());
  for (int l = 0; l < net.n_p(); ++l) {
    const Link& lk = net.links[l];
    LinkPhysics p;
    if (lk.kind == LinkKind::Pipe) {
      auto [rho, n] = resistance(lk, theta(lk.group), opts.model);
      p.rho = rho;
      p.n = n;
      if (opts.model == FrictionModel::HazenWilliams)
        p.drho_dtheta = -1.852 * rho / theta(lk.group);
      else
        p.drho_dtheta = rho / theta(lk.group);
    } else {
      p.rho = lk.loss_coeff;
      p.n = 2.0;
      p.drho_dtheta = 0.0;
    }
    p.q0 = opts.q_smooth;
    p.c1 = 0.5 * (3.0 - p.n) * std::pow(p.q0, p.n - 1.0);
    p.c3 = 0.5 * (p.n - 1.0) * std::pow(p.q0, p.n - 3.0);
    phys[l] = p;
  }
  return phys;
}

// Integer null-space basis of A12^T from fundamental cycles of a spanning
// tree. All inlet-side endpoints collapse into one super-root so the basis
// width is exactly n_p - n_n for connected networks.
inline SpMat null_space_basis(const SpMat& A12) {
  const int np = static_cast<int>(A12.rows());
  const int nn = static_cast<int>(A12.cols());
  const int root = nn;  // merged inlet vertex

  std::vector<int> vfrom(np, root), vto(np, root);
  for (int c = 0; c < nn; ++c)
    for (SpMat::InnerIterator it(A12, c); it; ++it) {
      if (it.value() < 0)
        vfrom[it.row()] = c;
      else
        vto[it.row()] = c;
    }

  std::vector<std::vector<std::pair<int, int>>> adj(nn + 1);  // (vertex, link)
  for (int l = 0; l < np; ++l) {
    if (vfrom[l] == vto[l]) continue;  // both endpoints are inlets
    adj[vfrom[l]].emplace_back(vto[l], l);
    adj[vto[l]].emplace_back(vfrom[l], l);
  }

  std::vector<int> parent(nn + 1, -2), parent_link(nn + 1, -1), depth(nn + 1, 0);
  std::vector<char> link_in_tree(np, 0);
  std::vector<int> queue{root};
  parent[root] = -1;
  std::size_t qh = 0;
  while (qh < queue.size()) {
    int u = queue[qh++];
    for (auto [v, l] : adj[u])
      if (parent[v] == -2) {
        parent[v] = u;
        parent_link[v] = l;
        depth[v] = depth[u] + 1;
        link_in_tree[l] = 1;
        queue.push_back(v);
      }
  }
  for (int v = 0; v < nn; ++v)
    if (parent[v] == -2)
      throw NumericalError(
          "A12 is rank deficient: a component has no inlet connection");

  std::vector<Triplet> tz;
  int col = 0;
  for (int l = 0; l < np; ++l) {
    if (link_in_tree[l]) continue;
    // unit circulation along l (from -> to), returning through the tree
    tz.emplace_back(l, col, 1.0);
    int a = vto[l], b = vfrom[l];
    if (a == b) {
      ++col;  // inlet-to-inlet link: circulation closes through the super-root
      continue;
    }
    auto step_up = [&](int x, double dir) {
      int lt = parent_link[x];
      // traversing x -> parent(x); +1 when that matches the link orientation
      double coeff = (vfrom[lt] == x) ? 1.0 : -1.0;
      tz.emplace_back(lt, col, dir * coeff);
      return parent[x];
    };
    while (depth[a] > depth[b]) a = step_up(a, 1.0);
    while (depth[b] > depth[a]) b = step_up(b, -1.0);
    while (a != b) {
      a = step_up(a, 1.0);
      b = step_up(b, -1.0);
    }
    ++col;
  }

  SpMat Z(np, col);
  Z.setFromTriplets(tz.begin(), tz.end());
  return Z;
}

struct HydraulicState {
  Vec q;  // n_p flows, m^3/s
  Vec h;  // n_n heads, m
  int scenario = 0;
  double residual_energy = 0.0;
  double residual_mass = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // reduced residual per accepted step
};

// Damped Newton on the cycle-space unknowns. Flows are q = q_part + Z v with
// mass balance exact by construction; heads come from the normal equations of
// the energy block, and the loop targets the full energy residual.
class HydraulicSolver {
 public:
  HydraulicSolver(const Network& net, const IncidenceSet& inc,
                  HydraulicOptions opts = {})
      : net_(net), inc_(inc), opts_(opts) {
    Z_ = null_space_basis(inc.A12);
    Zt_ = SpMat(Z_.transpose());
    A12t_ = SpMat(inc.A12.transpose());
    SpMat AtA = A12t_ * inc.A12;
    ata_.analyze(AtA);
    ata_.factorize(AtA, "A12^T A12");
  }

  const SpMat& Z() const { return Z_; }
  const PosDefSolver& normal_solver() const { return ata_; }
  const HydraulicOptions& options() const { return opts_; }

  HydraulicState solve(const std::vector<LinkPhysics>& phys, int k) const {
    const int np = net_.n_p();
    if (k < 0 || k >= net_.n_t)
      throw ValidationError("scenario index " + std::to_string(k) + " out of range");
    if (static_cast<int>(phys.size()) != np)
      throw ValidationError("link physics size mismatch");

    Vec d(net_.n_n());
    for (int i = 0; i < net_.n_n(); ++i) d(i) = net_.nodes[i].demand[k];
    Vec fixed_part = Vec::Zero(np);  // A10 h0 + A13 eta
    for (int l = 0; l < np; ++l) {
      const Link& lk = net_.links[l];
      if (lk.from.is_inlet) fixed_part(l) -= net_.inlets[lk.from.index].head[k];
      if (lk.to.is_inlet) fixed_part(l) += net_.inlets[lk.to.index].head[k];
      if (lk.kind == LinkKind::Valve) fixed_part(l) += lk.eta[k];
    }

    HydraulicState st;
    st.scenario = k;
    Vec q = inc_.A12 * ata_.solve(d);  // particular solution of A12^T q = d
    Vec u(np), h;

    auto energy_vec = [&](const Vec& qq, Vec& uu) {
      for (int l = 0; l < np; ++l) uu(l) = phys[l].headloss(qq(l));
      uu += fixed_part;
    };
    auto full_energy_residual = [&](const Vec& uu, Vec& hh) {
      hh = ata_.solve(Vec(-(A12t_ * uu)));
      return (uu + inc_.A12 * hh).lpNorm<Eigen::Infinity>();
    };

    const int nz = static_cast<int>(Z_.cols());
    energy_vec(q, u);
    double res_e = full_energy_residual(u, h);

    if (nz > 0) {
      PosDefSolver red;
      bool analyzed = false;
      Vec g(np);
      Vec r = Zt_ * u;
      double rn = r.norm();
      st.residual_trace.push_back(rn);
      int it = 0;
      for (; it < opts_.max_iter && res_e > opts_.newton_tol; ++it) {
        for (int l = 0; l < np; ++l) g(l) = phys[l].dheadloss(q(l));
        SpMat red_mat = Zt_ * g.asDiagonal() * Z_;
        if (!analyzed) {
          red.analyze(red_mat);
          analyzed = true;
        }
        try {
          red.factorize(red_mat, "reduced Newton matrix Z^T G Z");
        } catch (const NumericalError&) {
          throw NumericalError(
              "singular reduced system in hydraulic Newton step; a zero-flow "
              "loop defeated the smoothing regularization");
        }
        Vec dv = red.solve(Vec(-r));
        Vec dq = Z_ * dv;
        double step = 1.0;
        bool accepted = false;
        Vec u_try(np);
        for (int bt = 0; bt <= opts_.max_backtracks; ++bt) {
          Vec q_try = q + step * dq;
          energy_vec(q_try, u_try);
          Vec r_try = Zt_ * u_try;
          double rn_try = r_try.norm();
          if (rn_try < rn) {
            q = q_try;
            u = u_try;
            r = r_try;
            rn = rn_try;
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;  // stalled; final residual check decides
        st.residual_trace.push_back(rn);
        res_e = full_energy_residual(u, h);
      }
      st.iterations = it;
      if (res_e > opts_.newton_tol && res_e >= opts_.residual_tol)
        throw NumericalError("hydraulic solver did not converge: energy residual " +
                             std::to_string(res_e) + " after " +
                             std::to_string(it) + " iterations");
    }

    st.q = q;
    st.h = h;
    st.residual_energy = res_e;
    st.residual_mass = (A12t_ * q - d).lpNorm<Eigen::Infinity>();
    st.converged = st.residual_energy < opts_.residual_tol &&
                   st.residual_mass < opts_.residual_tol;
    if (!st.converged)
      throw NumericalError("hydraulic residuals above tolerance: energy " +
                           std::to_string(st.residual_energy) + ", mass " +
                           std::to_string(st.residual_mass));
    return st;
  }

  std::vector<HydraulicState> solve_all(const std::vector<LinkPhysics>& phys) const {
    std::vector<HydraulicState> states(net_.n_t);
    std::exception_ptr err;
    std::mutex mtx;
    parallel_for(static_cast<std::size_t>(net_.n_t), opts_.threads, [&](std::size_t k) {
      try {
        states[k] = solve(phys, static_cast<int>(k));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!err) err = std::current_exception();
      }
    });
    if (err) std::rethrow_exception(err);
    return states;
  }

 private:
  const Network& net_;
  const IncidenceSet& inc_;
  HydraulicOptions opts_;
  SpMat Z_, Zt_, A12t_;
  PosDefSolver ata_;
};

inline HydraulicState solve_hydraulics(const Network& net, const IncidenceSet& inc,
                                       const Vec& theta, int k,
                                       HydraulicOptions opts = {}) {
  auto phys = build_physics(net, theta, opts);
  HydraulicSolver solver(net, inc, opts);
  return solver.solve(phys, k);
}

}  // namespace hydroplace
