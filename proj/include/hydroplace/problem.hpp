#pragma once

#include "hydroplace/objectives.hpp"
#include "hydroplace/relaxation.hpp"
#include "hydroplace/round_swap.hpp"

#include <chrono>

namespace hydroplace {

struct ProblemOptions {
  HydraulicOptions hydraulic;
  double sigma = 1.0;
  double lambda = std::numeric_limits<double>::infinity();
  Vec theta;  // per-group roughness estimate; empty = parsed group values
  std::vector<std::string> s0_link_ids;     // fixed flow sensors
  std::vector<std::string> fixed_node_ids;  // sensors pinned to 1
  std::vector<std::string> excluded_node_ids;
  int m = 2;
  unsigned threads = 1;
  RelaxOptions relax;
  long swap_max_iter = 100000;
  double adjacency_penalty = 10.0;  // 0 disables the relaxation penalty
  std::string bundle_cache;         // optional path
};

inline ProblemOptions options_from_config(const Config& cfg) {
  ProblemOptions o;
  std::string model = detail::lower(cfg.get_string("model", "hazen-williams"));
  if (model == "hazen-williams" || model == "hw")
    o.hydraulic.model = FrictionModel::HazenWilliams;
  else if (model == "darcy-weisbach" || model == "dw")
    o.hydraulic.model = FrictionModel::DarcyWeisbach;
  else
    throw ParseError("config key 'model': unknown friction model '" + model + "'");
  o.hydraulic.q_smooth = cfg.get_double("q_smooth", o.hydraulic.q_smooth);
  o.hydraulic.newton_tol = cfg.get_double("newton_tol", o.hydraulic.newton_tol);
  o.hydraulic.max_iter = static_cast<int>(cfg.get_int("newton_max_iter", o.hydraulic.max_iter));
  o.sigma = cfg.get_double("sigma", o.sigma);
  o.lambda = cfg.get_double("lambda", o.lambda);
  auto th = cfg.get_double_list("theta");
  if (!th.empty()) o.theta = Eigen::Map<Vec>(th.data(), th.size());
  o.s0_link_ids = cfg.get_string_list("s0");
  o.fixed_node_ids = cfg.get_string_list("fixed");
  o.excluded_node_ids = cfg.get_string_list("excluded");
  o.m = static_cast<int>(cfg.get_int("m", o.m));
  o.threads = static_cast<unsigned>(cfg.get_int("threads", 1));
  o.hydraulic.threads = o.threads;
  o.relax.fw_max_iter = static_cast<int>(cfg.get_int("fw_iters", o.relax.fw_max_iter));
  o.relax.subgrad_max_iter =
      static_cast<int>(cfg.get_int("subgrad_iters", o.relax.subgrad_max_iter));
  o.relax.fw_gap_tol = cfg.get_double("fw_gap_tol", o.relax.fw_gap_tol);
  o.swap_max_iter = cfg.get_int("swap_max_iter", o.swap_max_iter);
  o.adjacency_penalty = cfg.get_double("adjacency_penalty", o.adjacency_penalty);
  o.bundle_cache = cfg.get_string("bundle_cache", "");
  return o;
}

struct PlacementProblem {
  Network net;
  IncidenceSet inc;
  CostMatrix cost;
  SensitivityBundle bundle;
  AdjacencyConstraints adj;
  std::vector<std::vector<int>> neighbors;
  std::vector<std::pair<int, int>> adjacent_pairs;  // deduped node-node links
  FeasibleSet fs;
  ProblemOptions opts;
};

// Full artifact build: hydraulics for every scenario, sensitivity tensor,
// information bundle (optionally cached on disk), shortest-path costs,
// adjacency structures and the feasible set.
inline PlacementProblem assemble_problem(Network net, ProblemOptions opts) {
  PlacementProblem p;
  p.net = std::move(net);
  p.opts = opts;
  p.inc = build_incidence(p.net);
  p.adj = adjacency_constraints(p.net);
  p.neighbors = node_neighbors(p.net);
  for (int u = 0; u < static_cast<int>(p.neighbors.size()); ++u)
    for (int v : p.neighbors[u])
      if (u < v) p.adjacent_pairs.emplace_back(u, v);
  p.cost = shortest_path_costs(p.net, opts.threads);

  Vec theta = opts.theta;
  if (theta.size() == 0) {
    theta.resize(p.net.n_r());
    for (int r = 0; r < p.net.n_r(); ++r) theta(r) = p.net.group_roughness[r];
  }

  std::vector<int> s0;
  for (const auto& id : opts.s0_link_ids) {
    int l = p.net.link_index(id);
    if (l < 0) throw ValidationError("fixed flow sensor on unknown link '" + id + "'");
    s0.push_back(l);
  }

  std::uint64_t key = bundle_cache_key(p.net, theta, opts.sigma, opts.lambda, s0,
                                       opts.hydraulic.model);
  std::optional<SensitivityBundle> cached;
  if (!opts.bundle_cache.empty()) cached = load_bundle(opts.bundle_cache, key);
  if (cached) {
    p.bundle = std::move(*cached);
  } else {
    auto phys = build_physics(p.net, theta, opts.hydraulic);
    HydraulicSolver solver(p.net, p.inc, opts.hydraulic);
    auto states = solver.solve_all(phys);
    auto tensor = compute_sensitivities(p.net, p.inc, solver, phys, states,
                                        opts.threads);
    p.bundle = build_information(tensor, s0, opts.sigma, opts.lambda);
    if (!opts.bundle_cache.empty()) save_bundle(opts.bundle_cache, key, p.bundle);
  }

  p.fs.n = p.net.n_n();
  p.fs.m = opts.m;
  for (const auto& id : opts.fixed_node_ids) {
    int i = p.net.node_index(id);
    if (i < 0) throw ValidationError("fixed sensor at unknown node '" + id + "'");
    p.fs.fixed.push_back(i);
  }
  for (const auto& id : opts.excluded_node_ids) {
    int i = p.net.node_index(id);
    if (i < 0) throw ValidationError("excluded unknown node '" + id + "'");
    p.fs.excluded.push_back(i);
  }
  if (p.fs.m < 2)
    throw ValidationError("budget m must be at least 2 (p-median needs a "
                          "second sensor for every node)");
  p.fs.validate();
  return p;
}

// Smooth squared-hinge penalty keeping the relaxed iterates away from
// adjacency-violating vertices. It vanishes on every placement satisfying
// Gz <= b, so relaxation bounds harvested from the penalized objective remain
// valid lower bounds for the constrained binary problem.
inline double add_adjacency_penalty(const std::vector<std::pair<int, int>>& pairs,
                                    double weight, const Vec& z, Vec& g) {
  if (weight <= 0.0) return 0.0;
  double v = 0.0;
  for (const auto& [a, b] : pairs) {
    double e = z(a) + z(b) - 1.0;
    if (e <= 0.0) continue;
    v += weight * e * e;
    g(a) += 2.0 * weight * e;
    g(b) += 2.0 * weight * e;
  }
  return v;
}

// penalty weight scaled to the objective value at the uniform start
inline double penalty_weight(const PlacementProblem& p,
                             const std::function<double(const Vec&)>& fn) {
  if (p.opts.adjacency_penalty <= 0.0 || p.adjacent_pairs.empty()) return 0.0;
  return p.opts.adjacency_penalty * std::max(1.0, std::abs(fn(uniform_start(p.fs))));
}

// objective adapters over an assembled problem
inline ObjectiveFn make_fD_objective(const PlacementProblem& p) {
  double w = penalty_weight(p, [&p](const Vec& z) { return f_D(p.bundle, z); });
  return [&p, w](const Vec& z, Vec& g) {
    double v = f_D_value_grad(p.bundle, z, g);
    return v + add_adjacency_penalty(p.adjacent_pairs, w, z, g);
  };
}

inline ObjectiveFn make_fT_objective(const PlacementProblem& p) {
  double w = penalty_weight(
      p, [&p](const Vec& z) { return f_T_relaxed(p.cost, z).value; });
  return [&p, w](const Vec& z, Vec& g) {
    auto sv = f_T_relaxed(p.cost, z);
    g = sv.subgrad;
    return sv.value + add_adjacency_penalty(p.adjacent_pairs, w, z, g);
  };
}

inline ObjectiveFn make_fbeta_objective(const PlacementProblem& p,
                                        const ChebyshevWeights& wts) {
  double w = penalty_weight(
      p, [&](const Vec& z) { return f_beta(p.bundle, p.cost, wts, z).value; });
  return [&p, wts, w](const Vec& z, Vec& g) {
    auto sv = f_beta(p.bundle, p.cost, wts, z);
    g = sv.subgrad;
    return sv.value + add_adjacency_penalty(p.adjacent_pairs, w, z, g);
  };
}

inline BinaryObjective binary_fD(const PlacementProblem& p) {
  return [&p](const Vec& z) { return f_D(p.bundle, z); };
}

inline BinaryObjective binary_fT(const PlacementProblem& p) {
  return [&p](const Vec& z) { return f_T(p.cost, z); };
}

inline BinaryObjective binary_fbeta(const PlacementProblem& p,
                                    const ChebyshevWeights& w) {
  return [&p, w](const Vec& z) { return f_beta_binary(p.bundle, p.cost, w, z); };
}

struct SingleResult {
  Vec z_star;
  Vec z_hat;
  double f_hat = 0.0;
  double f_star = 0.0;  // certified lower bound
  double gap = 0.0;
  int relax_iterations = 0;
  bool relax_converged = false;
  long swap_evaluations = 0;
  double seconds = 0.0;
  RelaxationResult relax;
};

// relaxation -> rounding -> swap with the matching binary objective
inline SingleResult single_solve(const PlacementProblem& p, const ObjectiveFn& fn,
                                 ObjectiveKind kind, const BinaryObjective& fb) {
  auto t0 = std::chrono::steady_clock::now();
  SingleResult r;
  r.relax = solve_relaxation(fn, kind, p.fs, p.opts.relax);
  r.z_star = r.relax.z;
  r.f_star = r.relax.bound;
  r.relax_iterations = r.relax.iterations;
  r.relax_converged = r.relax.converged;

  Vec z0 = round_placement(r.z_star, p.fs, p.neighbors);
  auto sw = swap_improve(z0, r.z_star, fb, p.fs, p.neighbors, p.opts.swap_max_iter);
  r.z_hat = sw.z;
  r.swap_evaluations = sw.evaluations;
  r.f_hat = fb(r.z_hat);
  r.gap = optimality_gap(r.f_hat, r.f_star);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::vector<std::string> placement_ids(const Network& net, const Vec& z) {
  std::vector<std::string> ids;
  for (int i = 0; i < z.size(); ++i)
    if (z(i) == 1.0) ids.push_back(net.nodes[i].id);
  return ids;
}

}  // namespace hydroplace
