#pragma once

#include "hydroplace/network.hpp"

#include <random>

namespace hydroplace {

struct SyntheticOptions {
  int n_groups = 2;
  int n_t = 1;
  std::uint64_t seed = 1;
  bool with_valve = false;
  double demand_lo = 0.002, demand_hi = 0.012;  // m^3/s
  double head_base = 50.0, head_jitter = 5.0;   // m
  double length_lo = 60.0, length_hi = 180.0;   // m
};

namespace detail {

inline void finish_synthetic(Network& net, const SyntheticOptions& o,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dem(o.demand_lo, o.demand_hi);
  std::uniform_real_distribution<double> jit(0.0, o.head_jitter);
  net.n_t = o.n_t;
  for (auto& n : net.nodes) {
    n.demand.resize(o.n_t);
    for (double& d : n.demand) d = dem(rng);
  }
  for (auto& i : net.inlets) {
    i.head.resize(o.n_t);
    for (double& h : i.head) h = o.head_base + jit(rng);
  }
  for (auto& l : net.links)
    if (l.kind == LinkKind::Valve) {
      l.eta.resize(o.n_t);
      for (double& e : l.eta) e = 0.2 + 0.1 * jit(rng);
    }
  net.group_roughness.resize(o.n_groups);
  for (int g = 0; g < o.n_groups; ++g) net.group_roughness[g] = 100.0 + 10.0 * g;
  link_endpoints(net);
  validate_network(net);
}

inline Link make_pipe(int idx, const std::string& a, const std::string& b,
                      double length, int group) {
  Link l;
  l.id = "P" + std::to_string(idx);
  l.from_id = a;
  l.to_id = b;
  l.kind = LinkKind::Pipe;
  l.length = length;
  l.diameter = 0.15 + 0.05 * (group % 3);
  l.group = group;
  return l;
}

}  // namespace detail

// rows x cols looped grid with one inlet pipe into the corner node
inline Network make_grid_network(int rows, int cols, const SyntheticOptions& o = {}) {
  if (rows < 2 || cols < 2) throw ValidationError("grid needs rows, cols >= 2");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> len(o.length_lo, o.length_hi);
  std::uniform_int_distribution<int> grp(0, o.n_groups - 1);

  Network net;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      Node n;
      n.id = "J" + std::to_string(r * cols + c + 1);
      n.elevation = 0.0;
      n.demand = {0.0};
      net.nodes.push_back(std::move(n));
    }
  net.inlets.push_back({"R1", {o.head_base}});

  int pid = 1;
  auto nid = [&](int r, int c) { return "J" + std::to_string(r * cols + c + 1); };
  net.links.push_back(detail::make_pipe(pid++, "R1", nid(0, 0), 100.0, 0));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c)
      net.links.push_back(detail::make_pipe(pid++, nid(r, c), nid(r, c + 1),
                                            len(rng), grp(rng)));
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c)
      net.links.push_back(detail::make_pipe(pid++, nid(r, c), nid(r + 1, c),
                                            len(rng), grp(rng)));
  if (o.with_valve) {
    Link v;
    v.id = "V1";
    v.from_id = nid(0, 0);
    v.to_id = nid(1, 1);
    v.kind = LinkKind::Valve;
    v.diameter = 0.15;
    v.loss_coeff = 25.0;
    v.eta = {0.0};
    net.links.push_back(std::move(v));
  }
  detail::finish_synthetic(net, o, rng);
  return net;
}

// random connected network: spanning tree plus extra loop-closing links
inline Network make_random_network(int n_nodes, int extra_links,
                                   const SyntheticOptions& o = {}) {
  if (n_nodes < 2) throw ValidationError("random network needs >= 2 nodes");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> len(o.length_lo, o.length_hi);
  std::uniform_int_distribution<int> grp(0, o.n_groups - 1);

  Network net;
  for (int i = 0; i < n_nodes; ++i) {
    Node n;
    n.id = "J" + std::to_string(i + 1);
    n.elevation = 0.0;
    n.demand = {0.0};
    net.nodes.push_back(std::move(n));
  }
  net.inlets.push_back({"R1", {o.head_base}});

  int pid = 1;
  net.links.push_back(detail::make_pipe(pid++, "R1", "J1", 100.0, 0));
  for (int i = 1; i < n_nodes; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    int j = pick(rng);
    net.links.push_back(detail::make_pipe(pid++, net.nodes[j].id, net.nodes[i].id,
                                          len(rng), grp(rng)));
  }
  std::set<std::pair<int, int>> used;
  std::uniform_int_distribution<int> any(0, n_nodes - 1);
  int added = 0, attempts = 0;
  while (added < extra_links && attempts < 50 * (extra_links + 1)) {
    ++attempts;
    int a = any(rng), b = any(rng);
    if (a == b) continue;
    auto key = std::minmax(a, b);
    if (!used.insert({key.first, key.second}).second) continue;
    net.links.push_back(detail::make_pipe(pid++, net.nodes[a].id, net.nodes[b].id,
                                          len(rng), grp(rng)));
    ++added;
  }
  if (o.with_valve && n_nodes >= 4) {
    Link v;
    v.id = "V1";
    v.from_id = net.nodes[0].id;
    v.to_id = net.nodes[2].id;
    v.kind = LinkKind::Valve;
    v.diameter = 0.15;
    v.loss_coeff = 25.0;
    v.eta = {0.0};
    net.links.push_back(std::move(v));
  }
  detail::finish_synthetic(net, o, rng);
  return net;
}

// simple path 1-2-...-n with the inlet feeding node 1 (tree network)
inline Network make_path_network(int n_nodes, const SyntheticOptions& o = {}) {
  if (n_nodes < 2) throw ValidationError("path needs >= 2 nodes");
  std::mt19937_64 rng(o.seed);
  Network net;
  for (int i = 0; i < n_nodes; ++i) {
    Node n;
    n.id = "J" + std::to_string(i + 1);
    n.elevation = 0.0;
    n.demand = {0.0};
    net.nodes.push_back(std::move(n));
  }
  net.inlets.push_back({"R1", {o.head_base}});
  int pid = 1;
  net.links.push_back(detail::make_pipe(pid++, "R1", "J1", 100.0, 0));
  for (int i = 0; i + 1 < n_nodes; ++i)
    net.links.push_back(detail::make_pipe(pid++, net.nodes[i].id, net.nodes[i + 1].id,
                                          100.0, (o.n_groups > 1 && i % 2) ? 1 : 0));
  detail::finish_synthetic(net, o, rng);
  return net;
}

}  // namespace hydroplace
