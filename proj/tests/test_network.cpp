#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>

namespace hp = hydroplace;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data_path(const std::string& name) {
  const char* dir = std::getenv("HYDROPLACE_DATA");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

const char* kTriangleFree = R"(
[JUNCTIONS]
J1 10 0.01
J2 12 0.02
J3 11
[RESERVOIRS]
R1 50
[PIPES]
P0 R1 J1 100 200 100
P1 J1 J2 100 200 100
P2 J2 J3 150 200 120
[END]
)";

}  // namespace

TEST_CASE("parse_inp reads a small file") {
  hp::Network net = hp::parse_inp(kTriangleFree);
  CHECK(net.n_n() == 3);
  CHECK(net.n_p() == 3);
  CHECK(net.n_0() == 1);
  CHECK(net.n_t == 1);
  CHECK(net.n_r() == 2);
  CHECK(net.group_roughness == std::vector<double>{100.0, 120.0});
  CHECK(net.nodes[0].demand[0] == 0.01);
  CHECK(net.nodes[2].demand[0] == 0.0);
  CHECK(net.links[0].diameter == Catch::Approx(0.2));  // mm -> m
  CHECK(net.links[1].group == 0);
  CHECK(net.links[2].group == 1);
}

TEST_CASE("parse_inp counts match the benchmark header comments") {
  hp::Network net = hp::parse_inp(read_file(data_path("two_loop.inp")));
  CHECK(net.n_n() == 6);
  CHECK(net.n_0() == 1);
  CHECK(net.n_p() == 8);
  CHECK(net.n_r() == 3);
  CHECK(net.group_roughness == std::vector<double>{130.0, 120.0, 110.0});
}

TEST_CASE("parse_inp rejects dangling endpoints naming the id") {
  std::string text = R"(
[JUNCTIONS]
J1 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P1 J1 X9 100 200 100
[END]
)";
  CHECK_THROWS_WITH(hp::parse_inp(text), Catch::Matchers::ContainsSubstring("X9"));
}

TEST_CASE("parse_inp reports parse errors with line numbers") {
  std::string text = "[JUNCTIONS]\nJ1 ten 0.01\n";
  CHECK_THROWS_WITH(hp::parse_inp(text), Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_AS(hp::parse_inp(text), hp::ParseError);
  CHECK_THROWS_WITH(hp::parse_inp("J1 10\n"),
                    Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("parse_inp warns on unknown sections") {
  std::string text = std::string(kTriangleFree) + "[COORDINATES]\nJ1 0 0\n[END]\n";
  hp::Network net = hp::parse_inp(text);
  REQUIRE(net.warnings.size() == 1);
  CHECK_THAT(net.warnings[0], Catch::Matchers::ContainsSubstring("COORDINATES"));
}

TEST_CASE("parse_inp merges equal roughness values into one group") {
  std::string text = R"(
[JUNCTIONS]
J1 10 0.01
J2 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P0 R1 J1 100 200 100
P1 J1 J2 100 200 100.0
[END]
)";
  hp::Network net = hp::parse_inp(text);
  CHECK(net.n_r() == 1);
  CHECK(net.links[1].group == 0);
}

TEST_CASE("parse_inp accumulates [DEMANDS] onto junction base demand") {
  std::string text = R"(
[JUNCTIONS]
J1 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P1 R1 J1 100 200 100
[DEMANDS]
J1 0.005
J1 0.002
[END]
)";
  hp::Network net = hp::parse_inp(text);
  CHECK(net.nodes[0].demand[0] == Catch::Approx(0.017));
}

TEST_CASE("parse_inp parses valves with loss setting") {
  std::string text = R"(
[JUNCTIONS]
J1 10 0.01
J2 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P0 R1 J1 100 200 100
P1 J1 J2 100 200 100
[VALVES]
V1 J1 J2 200 TCV 25
[END]
)";
  hp::Network net = hp::parse_inp(text);
  CHECK(net.n_v() == 1);
  const hp::Link& v = net.links[2];
  CHECK(v.kind == hp::LinkKind::Valve);
  CHECK(v.loss_coeff == 25.0);
  CHECK(v.group == -1);
  CHECK(v.valve_index == 0);
  CHECK(v.eta == std::vector<double>{0.0});
}

TEST_CASE("validation rejects malformed networks") {
  SECTION("duplicate node id") {
    std::string t = "[JUNCTIONS]\nJ1 0 0.01\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n"
                    "[PIPES]\nP1 R1 J1 10 100 100\n[END]\n";
    CHECK_THROWS_WITH(hp::parse_inp(t), Catch::Matchers::ContainsSubstring("duplicate"));
  }
  SECTION("self loop") {
    std::string t = "[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n"
                    "[PIPES]\nP1 R1 J1 10 100 100\nP2 J1 J1 10 100 100\n[END]\n";
    CHECK_THROWS_WITH(hp::parse_inp(t), Catch::Matchers::ContainsSubstring("self-loop"));
  }
  SECTION("non-positive length") {
    std::string t = "[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n"
                    "[PIPES]\nP1 R1 J1 0 100 100\n[END]\n";
    CHECK_THROWS_WITH(hp::parse_inp(t), Catch::Matchers::ContainsSubstring("length"));
  }
  SECTION("disconnected component names the unreachable id") {
    std::string t = "[JUNCTIONS]\nJ1 0 0.01\nJ9 0 0.01\n[RESERVOIRS]\nR1 50\n"
                    "[PIPES]\nP1 R1 J1 10 100 100\n[END]\n";
    CHECK_THROWS_WITH(hp::parse_inp(t), Catch::Matchers::ContainsSubstring("J9"));
  }
  SECTION("no inlet") {
    std::string t = "[JUNCTIONS]\nJ1 0 0.01\nJ2 0 0.01\n"
                    "[PIPES]\nP1 J1 J2 10 100 100\n[END]\n";
    CHECK_THROWS_WITH(hp::parse_inp(t), Catch::Matchers::ContainsSubstring("inlet"));
  }
}

TEST_CASE("apply_scenarios replaces listed entities and replicates the rest") {
  hp::Network net = hp::parse_inp(read_file(data_path("two_loop.inp")));
  hp::apply_scenarios(net, read_file(data_path("two_loop_scenarios.csv")));
  CHECK(net.n_t == 3);
  int j2 = net.node_index("J2");
  CHECK(net.nodes[j2].demand == std::vector<double>{0.0278, 0.0350, 0.0200});
  int j1 = net.node_index("J1");
  CHECK(net.nodes[j1].demand == std::vector<double>{0.0278, 0.0278, 0.0278});
  CHECK(net.inlets[0].head == std::vector<double>{210, 208, 212});
}

TEST_CASE("apply_scenarios handles headers, valves, and bad rows") {
  hp::Network base = hp::parse_inp(R"(
[JUNCTIONS]
J1 10 0.01
J2 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P0 R1 J1 100 200 100
P1 J1 J2 100 200 100
[VALVES]
V1 J1 J2 200 TCV 25
[END]
)");
  SECTION("valve eta row") {
    hp::Network net = base;
    hp::apply_scenarios(net, "V1,0.5,1.5\n");
    CHECK(net.n_t == 2);
    CHECK(net.links[2].eta == std::vector<double>{0.5, 1.5});
    CHECK(net.nodes[0].demand == std::vector<double>{0.01, 0.01});
  }
  SECTION("unknown id") {
    hp::Network net = base;
    CHECK_THROWS_WITH(hp::apply_scenarios(net, "ZZ,1,2\n"),
                      Catch::Matchers::ContainsSubstring("ZZ"));
  }
  SECTION("ragged row") {
    hp::Network net = base;
    CHECK_THROWS_AS(hp::apply_scenarios(net, "J1,1,2\nJ2,1\n"), hp::ParseError);
  }
  SECTION("no data rows") {
    hp::Network net = base;
    CHECK_THROWS_AS(hp::apply_scenarios(net, "id,s1\n"), hp::ParseError);
  }
}

TEST_CASE("json round-trip preserves the network byte for byte") {
  hp::Network net = hp::parse_inp(read_file(data_path("two_loop.inp")));
  hp::apply_scenarios(net, read_file(data_path("two_loop_scenarios.csv")));
  std::string first = hp::canonical_json(net);
  hp::Network back = hp::from_json(hp::json::parse(first));
  CHECK(hp::canonical_json(back) == first);
  CHECK(back.n_n() == net.n_n());
  CHECK(back.n_t == net.n_t);
}

TEST_CASE("build_incidence follows the from/to sign convention") {
  hp::Network net = hp::parse_inp(kTriangleFree);
  hp::IncidenceSet inc = hp::build_incidence(net);
  hp::Mat A12 = hp::Mat(inc.A12);
  hp::Mat A10 = hp::Mat(inc.A10);

  // P0 runs R1 -> J1: inlet leaves (-1 in A10), node receives (+1 in A12)
  CHECK(A10(0, 0) == -1.0);
  CHECK(A12(0, net.node_index("J1")) == 1.0);
  // P1 runs J1 -> J2
  CHECK(A12(1, net.node_index("J1")) == -1.0);
  CHECK(A12(1, net.node_index("J2")) == 1.0);

  // each link row of [A12 A10] has exactly one +1 and one -1
  hp::Mat full(net.n_p(), net.n_n() + net.n_0());
  full << A12, A10;
  for (int l = 0; l < net.n_p(); ++l) {
    CHECK(full.row(l).sum() == 0.0);
    CHECK(full.row(l).cwiseAbs().sum() == 2.0);
  }
  // internal rows of A12 sum to 0, inlet rows to +-1
  CHECK(A12.row(0).sum() == 1.0);
  CHECK(A12.row(1).sum() == 0.0);
  CHECK(A12.row(2).sum() == 0.0);
}

TEST_CASE("valve incidence lands in A13") {
  hp::Network net = hp::parse_inp(R"(
[JUNCTIONS]
J1 10 0.01
J2 10 0.01
[RESERVOIRS]
R1 50
[PIPES]
P0 R1 J1 100 200 100
P1 J1 J2 100 200 100
[VALVES]
V1 J1 J2 200 TCV 25
[END]
)");
  hp::IncidenceSet inc = hp::build_incidence(net);
  CHECK(inc.A13.rows() == 3);
  CHECK(inc.A13.cols() == 1);
  CHECK(hp::Mat(inc.A13)(2, 0) == 1.0);
  CHECK(hp::Mat(inc.A13).topRows(2).cwiseAbs().sum() == 0.0);
}

TEST_CASE("adjacency constraints flag shared links") {
  // path J1 - J2 - J3 with an inlet feeding J1
  std::string t = "[JUNCTIONS]\nJ1 0 0.01\nJ2 0 0.01\nJ3 0 0.01\n[RESERVOIRS]\nR1 50\n"
                  "[PIPES]\nP0 R1 J1 10 100 100\nP1 J1 J2 10 100 100\nP2 J2 J3 10 100 100\n[END]\n";
  hp::Network net = hp::parse_inp(t);
  hp::AdjacencyConstraints adj = hp::adjacency_constraints(net);
  CHECK(adj.b.size() == net.n_p());
  CHECK(adj.b.minCoeff() == 1.0);

  auto feasible = [&](std::initializer_list<double> zz) {
    hp::Vec z(3);
    std::copy(zz.begin(), zz.end(), z.data());
    return ((adj.G * z - adj.b).maxCoeff() <= 0.0);
  };
  CHECK(feasible({1, 0, 1}));
  CHECK_FALSE(feasible({1, 1, 0}));
  CHECK_FALSE(feasible({0, 1, 1}));

  // inlet-touching row has a single one, internal rows exactly two
  hp::Mat G(adj.G);
  CHECK(G.row(0).sum() == 1.0);
  CHECK(G.row(1).sum() == 2.0);
  CHECK(G.row(2).sum() == 2.0);

  // agreement with a direct graph scan over all binary z
  auto nb = hp::node_neighbors(net);
  for (int mask = 0; mask < 8; ++mask) {
    hp::Vec z(3);
    for (int i = 0; i < 3; ++i) z(i) = (mask >> i) & 1;
    bool lin = (hp::Vec(adj.G * z) - adj.b).maxCoeff() <= 0.0;
    bool scan = true;
    for (int i = 0; i < 3 && scan; ++i)
      if (z(i) == 1.0)
        for (int j : nb[i])
          if (z(j) == 1.0) scan = false;
    CHECK(lin == scan);
  }
}

TEST_CASE("node_neighbors deduplicates parallel links") {
  std::string t = "[JUNCTIONS]\nJ1 0 0.01\nJ2 0 0.01\n[RESERVOIRS]\nR1 50\n"
                  "[PIPES]\nP0 R1 J1 10 100 100\nP1 J1 J2 10 100 100\nP2 J1 J2 20 100 100\n[END]\n";
  hp::Network net = hp::parse_inp(t);
  auto nb = hp::node_neighbors(net);
  CHECK(nb[net.node_index("J1")] == std::vector<int>{net.node_index("J2")});
}

TEST_CASE("synthetic generators produce valid networks") {
  hp::SyntheticOptions so;
  so.seed = 5;
  so.n_groups = 2;
  so.n_t = 2;
  SECTION("grid") {
    hp::Network net = hp::make_grid_network(3, 4, so);
    CHECK(net.n_n() == 12);
    CHECK(net.n_0() == 1);
    CHECK_NOTHROW(hp::validate_network(net));
  }
  SECTION("grid with valve") {
    hp::SyntheticOptions sv = so;
    sv.with_valve = true;
    hp::Network net = hp::make_grid_network(3, 3, sv);
    CHECK(net.n_v() == 1);
    CHECK_NOTHROW(hp::validate_network(net));
  }
  SECTION("random") {
    hp::Network net = hp::make_random_network(15, 5, so);
    CHECK(net.n_n() == 15);
    CHECK(net.n_p() >= 15);
    CHECK_NOTHROW(hp::validate_network(net));
  }
  SECTION("path") {
    hp::Network net = hp::make_path_network(6, so);
    CHECK(net.n_n() == 6);
    CHECK(net.n_p() == 6);
    CHECK_NOTHROW(hp::validate_network(net));
  }
  SECTION("determinism") {
    std::string a = hp::canonical_json(hp::make_random_network(15, 5, so));
    std::string b = hp::canonical_json(hp::make_random_network(15, 5, so));
    CHECK(a == b);
  }
}
