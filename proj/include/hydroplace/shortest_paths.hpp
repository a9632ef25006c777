#pragma once

#include "hydroplace/network.hpp"

#include <limits>
#include <numeric>
#include <queue>

namespace hydroplace {

// All-pairs shortest paths over the undirected link graph weighted by length.
// Inlets are traversable vertices but the returned matrix covers nodes only
// (inlets are never sensor sites). Valves contribute zero length.
inline CostMatrix shortest_path_costs(const Network& net, unsigned threads = 1) {
  const int nn = net.n_n();
  const int nv = nn + net.n_0();
  std::vector<std::vector<std::pair<int, double>>> adj(nv);
  auto vid = [&](const EndRef& e) { return e.is_inlet ? nn + e.index : e.index; };
  for (const auto& l : net.links) {
    int u = vid(l.from), v = vid(l.to);
    adj[u].emplace_back(v, l.length);
    adj[v].emplace_back(u, l.length);
  }

  CostMatrix cm;
  cm.C.resize(nn, nn);
  cm.row_order.resize(nn);
  const double inf = std::numeric_limits<double>::infinity();

  parallel_for(static_cast<std::size_t>(nn), threads, [&](std::size_t si) {
    int s = static_cast<int>(si);
    std::vector<double> dist(nv, inf);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[s] = 0.0;
    pq.emplace(0.0, s);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : adj[u]) {
        double nd = d + w;
        if (nd < dist[v]) {
          dist[v] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    for (int j = 0; j < nn; ++j) cm.C(s, j) = dist[j];
  });

  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nn; ++j)
      if (!std::isfinite(cm.C(i, j)))
        throw ValidationError("node '" + net.nodes[j].id +
                              "' unreachable from '" + net.nodes[i].id +
                              "': p-median objective undefined");

  for (int i = 0; i < nn; ++i) {
    auto& ord = cm.row_order[i];
    ord.resize(nn);
    std::iota(ord.begin(), ord.end(), 0);
    const auto row = cm.C.row(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      if (row(a) != row(b)) return row(a) < row(b);
      return a < b;
    });
  }
  return cm;
}

}  // namespace hydroplace
