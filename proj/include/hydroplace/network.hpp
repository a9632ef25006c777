#pragma once

#include "hydroplace/common.hpp"
#include "hydroplace/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace hydroplace {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Network model. Nodes are demand junctions (sensor candidates), inlets are
// fixed-head sources (reservoirs), links are pipes or valves. Pipes belong to
// a roughness group; valves carry a fixed quadratic loss coefficient plus a
// known per-scenario added loss.
// ---------------------------------------------------------------------------

enum class LinkKind { Pipe, Valve };

struct EndRef {
  bool is_inlet = false;
  int index = -1;
  bool operator==(const EndRef&) const = default;
};

struct Node {
  std::string id;
  double elevation = 0.0;
  std::vector<double> demand;  // m^3/s, one entry per scenario
};

struct Inlet {
  std::string id;
  std::vector<double> head;  // m, one entry per scenario
};

struct Link {
  std::string id;
  std::string from_id, to_id;
  EndRef from, to;
  LinkKind kind = LinkKind::Pipe;
  double length = 0.0;    // m (0 for valves)
  double diameter = 0.0;  // m
  int group = -1;         // 0-based pipe group; -1 for valves
  int valve_index = -1;   // 0-based among valves; -1 for pipes
  double loss_coeff = 0.0;    // valve quadratic loss rho_v
  std::vector<double> eta;    // valve known added loss per scenario (m)
};

struct Network {
  std::vector<Node> nodes;
  std::vector<Inlet> inlets;
  std::vector<Link> links;
  std::vector<double> group_roughness;  // roughness value that defines each group
  int n_t = 1;
  std::vector<std::string> warnings;

  int n_n() const { return static_cast<int>(nodes.size()); }
  int n_p() const { return static_cast<int>(links.size()); }
  int n_0() const { return static_cast<int>(inlets.size()); }
  int n_r() const { return static_cast<int>(group_roughness.size()); }
  int n_v() const {
    int c = 0;
    for (const auto& l : links) c += (l.kind == LinkKind::Valve) ? 1 : 0;
    return c;
  }

  int node_index(const std::string& id) const {
    for (int i = 0; i < n_n(); ++i)
      if (nodes[i].id == id) return i;
    return -1;
  }
  int inlet_index(const std::string& id) const {
    for (int i = 0; i < n_0(); ++i)
      if (inlets[i].id == id) return i;
    return -1;
  }
  int link_index(const std::string& id) const {
    for (int i = 0; i < n_p(); ++i)
      if (links[i].id == id) return i;
    return -1;
  }
};

struct IncidenceSet {
  SpMat A12;  // n_p x n_n
  SpMat A10;  // n_p x n_0
  SpMat A13;  // n_p x n_v
};

struct CostMatrix {
  Mat C;  // n_n x n_n shortest-path length
  std::vector<std::vector<int>> row_order;  // per row, node indices by (C_ij, j)
};

struct AdjacencyConstraints {
  SpMat G;  // n_p x n_n, 1 where node is a link endpoint
  Vec b;    // all ones
};

namespace detail {

struct InpLine {
  int number;
  std::vector<std::string> tokens;
};

inline double parse_num(const std::string& tok, int lineno, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(lineno) + ": cannot parse " + what +
                     " '" + tok + "' as a number");
  }
}

}  // namespace detail

// Resolve link endpoint ids against node/inlet tables; throws naming the
// missing id. Also assigns valve indices.
inline void link_endpoints(Network& net) {
  int vi = 0;
  for (auto& l : net.links) {
    auto resolve = [&](const std::string& id) -> EndRef {
      int ni = net.node_index(id);
      if (ni >= 0) return EndRef{false, ni};
      int ii = net.inlet_index(id);
      if (ii >= 0) return EndRef{true, ii};
      throw ValidationError("link '" + l.id + "' references unknown node '" + id + "'");
    };
    l.from = resolve(l.from_id);
    l.to = resolve(l.to_id);
    l.valve_index = (l.kind == LinkKind::Valve) ? vi++ : -1;
  }
}

inline void validate_network(const Network& net) {
  if (net.nodes.empty()) throw ValidationError("network has no nodes");
  if (net.inlets.empty()) throw ValidationError("network has no inlets (fixed heads)");
  if (net.n_t < 1) throw ValidationError("scenario count must be >= 1");

  std::set<std::string> ids;
  for (const auto& n : net.nodes)
    if (!ids.insert(n.id).second)
      throw ValidationError("duplicate node id '" + n.id + "'");
  for (const auto& i : net.inlets)
    if (!ids.insert(i.id).second)
      throw ValidationError("duplicate node id '" + i.id + "'");
  std::set<std::string> lids;
  for (const auto& l : net.links)
    if (!lids.insert(l.id).second)
      throw ValidationError("duplicate link id '" + l.id + "'");

  for (const auto& n : net.nodes)
    if (static_cast<int>(n.demand.size()) != net.n_t)
      throw ValidationError("node '" + n.id + "' has " + std::to_string(n.demand.size()) +
                            " demand values, expected " + std::to_string(net.n_t));
  for (const auto& i : net.inlets)
    if (static_cast<int>(i.head.size()) != net.n_t)
      throw ValidationError("inlet '" + i.id + "' has " + std::to_string(i.head.size()) +
                            " head values, expected " + std::to_string(net.n_t));

  for (const auto& l : net.links) {
    if (l.from.index < 0 || l.to.index < 0)
      throw ValidationError("link '" + l.id + "' has unresolved endpoints");
    if (l.from == l.to)
      throw ValidationError("link '" + l.id + "' is a self-loop");
    if (l.kind == LinkKind::Pipe) {
      if (l.length <= 0.0)
        throw ValidationError("pipe '" + l.id + "' has non-positive length");
      if (l.diameter <= 0.0)
        throw ValidationError("pipe '" + l.id + "' has non-positive diameter");
      if (l.group < 0 || l.group >= net.n_r())
        throw ValidationError("pipe '" + l.id + "' has invalid group index");
    } else {
      if (l.loss_coeff < 0.0)
        throw ValidationError("valve '" + l.id + "' has negative loss coefficient");
      if (static_cast<int>(l.eta.size()) != net.n_t)
        throw ValidationError("valve '" + l.id + "' has " + std::to_string(l.eta.size()) +
                              " loss values, expected " + std::to_string(net.n_t));
    }
  }
  for (double th : net.group_roughness)
    if (!(th > 0.0) || !std::isfinite(th))
      throw ValidationError("pipe group roughness must be positive and finite");

  // connectivity over nodes + inlets
  int nv = net.n_n() + net.n_0();
  std::vector<std::vector<int>> adj(nv);
  auto vid = [&](const EndRef& e) { return e.is_inlet ? net.n_n() + e.index : e.index; };
  for (const auto& l : net.links) {
    adj[vid(l.from)].push_back(vid(l.to));
    adj[vid(l.to)].push_back(vid(l.from));
  }
  std::vector<char> seen(nv, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  for (int v = 0; v < nv; ++v)
    if (!seen[v]) {
      std::string id = v < net.n_n() ? net.nodes[v].id : net.inlets[v - net.n_n()].id;
      throw ValidationError("network is disconnected: '" + id + "' unreachable");
    }
}

// Parse the INP subset. Recognized sections: [JUNCTIONS] id elev demand,
// [RESERVOIRS] id head, [PIPES] id n1 n2 length diameter_mm roughness,
// [VALVES] id n1 n2 diameter_mm type setting, [DEMANDS] id demand (adds a
// demand category to a junction). Demands are m^3/s, lengths/heads m,
// diameters mm. ';' starts a comment. Unknown sections are skipped with a
// warning. Pipe groups are the distinct roughness values in order of first
// appearance.
inline Network parse_inp(const std::string& text) {
  Network net;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::string section;
  std::set<std::string> warned;
  static const std::set<std::string> known = {"JUNCTIONS", "RESERVOIRS", "PIPES",
                                              "VALVES", "DEMANDS", "END"};
  std::vector<std::pair<int, Link>> pending_links;
  std::vector<std::tuple<int, std::string, double>> extra_demands;
  std::map<double, int> group_of;  // roughness value -> group

  while (std::getline(in, raw)) {
    ++lineno;
    auto cmt = raw.find(';');
    if (cmt != std::string::npos) raw = raw.substr(0, cmt);
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos)
        throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
      section = line.substr(1, close - 1);
      for (auto& c : section) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (!known.count(section) && warned.insert(section).second)
        net.warnings.push_back("ignoring unknown section [" + section + "]");
      continue;
    }
    if (section.empty())
      throw ParseError("line " + std::to_string(lineno) + ": data before any section header");
    if (!known.count(section) || section == "END") continue;

    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);

    if (section == "JUNCTIONS") {
      if (tok.size() < 2 || tok.size() > 3)
        throw ParseError("line " + std::to_string(lineno) +
                         ": [JUNCTIONS] expects 'id elevation [demand]'");
      Node n;
      n.id = tok[0];
      n.elevation = detail::parse_num(tok[1], lineno, "elevation");
      double d = tok.size() > 2 ? detail::parse_num(tok[2], lineno, "demand") : 0.0;
      n.demand.assign(1, d);
      net.nodes.push_back(std::move(n));
    } else if (section == "RESERVOIRS") {
      if (tok.size() != 2)
        throw ParseError("line " + std::to_string(lineno) + ": [RESERVOIRS] expects 'id head'");
      Inlet i;
      i.id = tok[0];
      i.head.assign(1, detail::parse_num(tok[1], lineno, "head"));
      net.inlets.push_back(std::move(i));
    } else if (section == "PIPES") {
      if (tok.size() != 6)
        throw ParseError("line " + std::to_string(lineno) +
                         ": [PIPES] expects 'id node1 node2 length diameter roughness'");
      Link l;
      l.id = tok[0];
      l.from_id = tok[1];
      l.to_id = tok[2];
      l.kind = LinkKind::Pipe;
      l.length = detail::parse_num(tok[3], lineno, "length");
      l.diameter = detail::parse_num(tok[4], lineno, "diameter") / 1000.0;  // mm -> m
      double rough = detail::parse_num(tok[5], lineno, "roughness");
      auto it = group_of.find(rough);
      if (it == group_of.end()) {
        it = group_of.emplace(rough, static_cast<int>(net.group_roughness.size())).first;
        net.group_roughness.push_back(rough);
      }
      l.group = it->second;
      pending_links.emplace_back(lineno, std::move(l));
    } else if (section == "VALVES") {
      if (tok.size() != 6)
        throw ParseError("line " + std::to_string(lineno) +
                         ": [VALVES] expects 'id node1 node2 diameter type setting'");
      Link l;
      l.id = tok[0];
      l.from_id = tok[1];
      l.to_id = tok[2];
      l.kind = LinkKind::Valve;
      l.diameter = detail::parse_num(tok[3], lineno, "diameter") / 1000.0;
      l.loss_coeff = detail::parse_num(tok[5], lineno, "setting");
      l.eta.assign(1, 0.0);
      pending_links.emplace_back(lineno, std::move(l));
    } else if (section == "DEMANDS") {
      if (tok.size() < 2)
        throw ParseError("line " + std::to_string(lineno) + ": [DEMANDS] expects 'id demand'");
      extra_demands.emplace_back(lineno, tok[0], detail::parse_num(tok[1], lineno, "demand"));
    }
  }

  for (auto& [ln, l] : pending_links) {
    (void)ln;
    net.links.push_back(std::move(l));
  }
  for (auto& [ln, id, d] : extra_demands) {
    int ni = net.node_index(id);
    if (ni < 0)
      throw ValidationError("[DEMANDS] line " + std::to_string(ln) +
                            " references unknown junction '" + id + "'");
    net.nodes[ni].demand[0] += d;
  }
  net.n_t = 1;
  link_endpoints(net);
  validate_network(net);
  return net;
}

// Scenario CSV: rows 'id,v1,...,v_nt'. A node id sets demands, an inlet id
// sets heads, a valve id sets known added losses. Entities absent from the
// file keep their base value replicated across scenarios.
inline void apply_scenarios(Network& net, const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string raw;
  int lineno = 0;
  int nt = -1;
  struct Row {
    std::string id;
    std::vector<double> vals;
  };
  std::vector<Row> rows;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    Row row;
    bool first = true;
    while (std::getline(ls, cell, ',')) {
      cell = detail::trim(cell);
      if (first) {
        row.id = cell;
        first = false;
      } else {
        try {
          row.vals.push_back(std::stod(cell));
        } catch (const std::exception&) {
          if (lineno == 1 && rows.empty()) {
            row.vals.clear();
            break;  // header row
          }
          throw ParseError("scenario line " + std::to_string(lineno) +
                           ": cannot parse '" + cell + "' as a number");
        }
      }
    }
    if (row.id.empty() || row.vals.empty()) continue;
    if (nt < 0)
      nt = static_cast<int>(row.vals.size());
    else if (static_cast<int>(row.vals.size()) != nt)
      throw ParseError("scenario line " + std::to_string(lineno) + ": expected " +
                       std::to_string(nt) + " values, got " + std::to_string(row.vals.size()));
    rows.push_back(std::move(row));
  }
  if (nt < 1) throw ParseError("scenario file contains no data rows");

  for (auto& n : net.nodes) n.demand.assign(nt, n.demand.at(0));
  for (auto& i : net.inlets) i.head.assign(nt, i.head.at(0));
  for (auto& l : net.links)
    if (l.kind == LinkKind::Valve) l.eta.assign(nt, l.eta.at(0));
  net.n_t = nt;

  for (const auto& row : rows) {
    int ni = net.node_index(row.id);
    if (ni >= 0) {
      net.nodes[ni].demand = row.vals;
      continue;
    }
    int ii = net.inlet_index(row.id);
    if (ii >= 0) {
      net.inlets[ii].head = row.vals;
      continue;
    }
    int li = net.link_index(row.id);
    if (li >= 0 && net.links[li].kind == LinkKind::Valve) {
      net.links[li].eta = row.vals;
      continue;
    }
    throw ValidationError("scenario row references unknown id '" + row.id + "'");
  }
  validate_network(net);
}

inline json to_json(const Network& net) {
  json j;
  j["n_t"] = net.n_t;
  j["group_roughness"] = net.group_roughness;
  j["nodes"] = json::array();
  for (const auto& n : net.nodes)
    j["nodes"].push_back({{"id", n.id}, {"elevation", n.elevation}, {"demand", n.demand}});
  j["inlets"] = json::array();
  for (const auto& i : net.inlets)
    j["inlets"].push_back({{"id", i.id}, {"head", i.head}});
  j["links"] = json::array();
  for (const auto& l : net.links) {
    json e = {{"id", l.id},     {"from", l.from_id},        {"to", l.to_id},
              {"kind", l.kind == LinkKind::Pipe ? "pipe" : "valve"},
              {"length", l.length}, {"diameter", l.diameter}};
    if (l.kind == LinkKind::Pipe) {
      e["group"] = l.group;
    } else {
      e["loss_coeff"] = l.loss_coeff;
      e["eta"] = l.eta;
    }
    j["links"].push_back(std::move(e));
  }
  return j;
}

inline Network from_json(const json& j) {
  Network net;
  net.n_t = j.at("n_t").get<int>();
  net.group_roughness = j.at("group_roughness").get<std::vector<double>>();
  for (const auto& e : j.at("nodes")) {
    Node n;
    n.id = e.at("id").get<std::string>();
    n.elevation = e.at("elevation").get<double>();
    n.demand = e.at("demand").get<std::vector<double>>();
    net.nodes.push_back(std::move(n));
  }
  for (const auto& e : j.at("inlets")) {
    Inlet i;
    i.id = e.at("id").get<std::string>();
    i.head = e.at("head").get<std::vector<double>>();
    net.inlets.push_back(std::move(i));
  }
  for (const auto& e : j.at("links")) {
    Link l;
    l.id = e.at("id").get<std::string>();
    l.from_id = e.at("from").get<std::string>();
    l.to_id = e.at("to").get<std::string>();
    l.kind = e.at("kind").get<std::string>() == "pipe" ? LinkKind::Pipe : LinkKind::Valve;
    l.length = e.at("length").get<double>();
    l.diameter = e.at("diameter").get<double>();
    if (l.kind == LinkKind::Pipe) {
      l.group = e.at("group").get<int>();
    } else {
      l.loss_coeff = e.at("loss_coeff").get<double>();
      l.eta = e.at("eta").get<std::vector<double>>();
    }
    net.links.push_back(std::move(l));
  }
  link_endpoints(net);
  validate_network(net);
  return net;
}

inline std::string canonical_json(const Network& net) { return to_json(net).dump(2); }

// Signed incidence: A12(l, from-node) = -1, A12(l, to-node) = +1, same signs
// for inlet columns in A10. Positive flow runs from 'from' to 'to'.
// A13(l, v) = 1 when link l is valve v.
inline IncidenceSet build_incidence(const Network& net) {
  std::vector<Triplet> t12, t10, t13;
  for (int l = 0; l < net.n_p(); ++l) {
    const Link& lk = net.links[l];
    if (lk.from.is_inlet)
      t10.emplace_back(l, lk.from.index, -1.0);
    else
      t12.emplace_back(l, lk.from.index, -1.0);
    if (lk.to.is_inlet)
      t10.emplace_back(l, lk.to.index, 1.0);
    else
      t12.emplace_back(l, lk.to.index, 1.0);
    if (lk.kind == LinkKind::Valve) t13.emplace_back(l, lk.valve_index, 1.0);
  }
  IncidenceSet inc;
  inc.A12.resize(net.n_p(), net.n_n());
  inc.A10.resize(net.n_p(), net.n_0());
  inc.A13.resize(net.n_p(), net.n_v());
  inc.A12.setFromTriplets(t12.begin(), t12.end());
  inc.A10.setFromTriplets(t10.begin(), t10.end());
  inc.A13.setFromTriplets(t13.begin(), t13.end());
  return inc;
}

inline AdjacencyConstraints adjacency_constraints(const Network& net) {
  std::vector<Triplet> tg;
  for (int l = 0; l < net.n_p(); ++l) {
    const Link& lk = net.links[l];
    if (!lk.from.is_inlet) tg.emplace_back(l, lk.from.index, 1.0);
    if (!lk.to.is_inlet) tg.emplace_back(l, lk.to.index, 1.0);
  }
  AdjacencyConstraints adj;
  adj.G.resize(net.n_p(), net.n_n());
  adj.G.setFromTriplets(tg.begin(), tg.end());
  adj.b = Vec::Ones(net.n_p());
  return adj;
}

// Node-to-node adjacency via links (for fast Gz <= b checks in swaps).
inline std::vector<std::vector<int>> node_neighbors(const Network& net) {
  std::vector<std::vector<int>> nb(net.n_n());
  for (const auto& l : net.links) {
    if (l.from.is_inlet || l.to.is_inlet) continue;
    nb[l.from.index].push_back(l.to.index);
    nb[l.to.index].push_back(l.from.index);
  }
  for (auto& v : nb) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return nb;
}

}  // namespace hydroplace
