#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

namespace hp = hydroplace;

namespace {

hp::FeasibleSet fset(int n, int m, std::vector<int> fixed = {},
                     std::vector<int> excluded = {}) {
  hp::FeasibleSet fs;
  fs.n = n;
  fs.m = m;
  fs.fixed = std::move(fixed);
  fs.excluded = std::move(excluded);
  return fs;
}

hp::Vec vec3(double a, double b, double c) {
  hp::Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("linear minimization oracle") {
  SECTION("picks the most negative gradients") {
    hp::Vec z = hp::lmo_top_m(vec3(-3, -1, -2), fset(3, 2));
    CHECK(z == vec3(1, 0, 1));
  }
  SECTION("fixed coordinates are pinned first") {
    hp::Vec z = hp::lmo_top_m(vec3(-3, 0, -2), fset(3, 2, {1}));
    CHECK(z == vec3(1, 1, 0));
  }
  SECTION("ties resolve to the lowest indices") {
    hp::Vec z = hp::lmo_top_m(hp::Vec::Zero(4), fset(4, 2));
    CHECK(z(0) == 1.0);
    CHECK(z(1) == 1.0);
    CHECK(z.sum() == 2.0);
  }
  SECTION("excluded coordinates never enter") {
    hp::Vec z = hp::lmo_top_m(vec3(-3, -1, -2), fset(3, 2, {}, {0}));
    CHECK(z == vec3(0, 1, 1));
  }
  SECTION("budget above candidate count") {
    CHECK_THROWS_AS(hp::lmo_top_m(vec3(0, 0, 0), fset(3, 4)), hp::ValidationError);
  }
}

TEST_CASE("projection onto the budgeted box") {
  SECTION("uniform deficit spreads evenly") {
    hp::Vec z = hp::project_box_simplex(hp::Vec::Constant(3, 0.5), fset(3, 2));
    for (int i = 0; i < 3; ++i) CHECK(z(i) == Catch::Approx(2.0 / 3.0).margin(1e-10));
    CHECK(std::abs(z.sum() - 2.0) < 1e-10);
  }
  SECTION("feasible points are fixed points") {
    hp::Vec v = vec3(0.9, 0.6, 0.5);
    hp::Vec z = hp::project_box_simplex(v, fset(3, 2));
    CHECK((z - v).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("extreme coordinates clip to the box") {
    hp::Vec z = hp::project_box_simplex(vec3(10, -10, 0.5), fset(3, 1));
    CHECK(z(0) == Catch::Approx(1.0).margin(1e-12));
    CHECK(z(1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(z(2) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("projection is the nearest feasible point") {
    std::mt19937_64 rng(60);
    std::uniform_real_distribution<double> uni(-2.0, 3.0);
    hp::FeasibleSet fs = fset(6, 3, {0}, {5});
    for (int trial = 0; trial < 25; ++trial) {
      hp::Vec v(6);
      for (int i = 0; i < 6; ++i) v(i) = uni(rng);
      hp::Vec z = hp::project_box_simplex(v, fs);
      CHECK(z(0) == 1.0);
      CHECK(z(5) == 0.0);
      CHECK(std::abs(z.sum() - 3.0) < 1e-10);
      CHECK(z.minCoeff() >= -1e-12);
      CHECK(z.maxCoeff() <= 1.0 + 1e-12);
      // no feasible comparison point may be closer
      std::uniform_real_distribution<double> box(0.0, 1.0);
      for (int probe = 0; probe < 20; ++probe) {
        hp::Vec x(6);
        for (int i = 1; i < 5; ++i) x(i) = box(rng);
        x(0) = 1.0;
        x(5) = 0.0;
        // rescale the free mass to match the budget
        double free_mass = x.sum() - 1.0;
        if (free_mass <= 0) continue;
        for (int i = 1; i < 5; ++i) x(i) *= 2.0 / free_mass;
        if (x.maxCoeff() > 1.0) continue;
        CHECK((z - v).squaredNorm() <= (x - v).squaredNorm() + 1e-9);
      }
    }
  }
  SECTION("huge inputs still meet the budget residual") {
    hp::Vec v = vec3(1e300, -1e300, 0.0);
    hp::Vec z = hp::project_box_simplex(v, fset(3, 2));
    CHECK(std::abs(z.sum() - 2.0) < 1e-10);
    CHECK(z(0) == 1.0);
    CHECK(z(1) == 0.0);
    CHECK(z(2) == 1.0);
  }
}

TEST_CASE("feasible set validation") {
  CHECK_THROWS_AS(fset(3, 4).validate(), hp::ValidationError);
  CHECK_THROWS_AS(fset(3, -1).validate(), hp::ValidationError);
  CHECK_THROWS_AS(fset(3, 1, {0, 1}).validate(), hp::ValidationError);
  CHECK_THROWS_AS(fset(3, 2, {0}, {0}).validate(), hp::ValidationError);
  CHECK_THROWS_AS(fset(4, 3, {0}, {1, 2}).validate(), hp::InfeasibleError);
  CHECK_NOTHROW(fset(4, 2, {0}, {3}).validate());
}

TEST_CASE("single-point feasible set is solved exactly") {
  auto fn = [](const hp::Vec& z, hp::Vec& g) {
    g.resize(1);
    g(0) = 2.0 * (z(0) - 0.3);
    return (z(0) - 0.3) * (z(0) - 0.3);
  };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fset(1, 1));
  CHECK(res.z(0) == 1.0);
  CHECK(res.value == Catch::Approx(0.49).epsilon(1e-12));
  CHECK(res.bound == Catch::Approx(0.49).epsilon(1e-9));
  CHECK(res.converged);
}

TEST_CASE("frank-wolfe on the smooth objective") {
  auto b = oracle::random_bundle(10, 3, 2, 61);
  hp::FeasibleSet fs = fset(10, 3);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) { return hp::f_D_value_grad(b, z, g); };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fs);

  SECTION("result is feasible") {
    CHECK(std::abs(res.z.sum() - 3.0) < 1e-9);
    CHECK(res.z.minCoeff() >= 0.0);
    CHECK(res.z.maxCoeff() <= 1.0);
  }
  SECTION("bound sandwiches the enumerated binary optimum") {
    double best = std::numeric_limits<double>::infinity();
    oracle::for_each_subset(10, 3, [&](const std::vector<int>& sel) {
      best = std::min(best, hp::f_D(b, oracle::indicator(10, sel)));
    });
    CHECK(res.bound <= best + 1e-12);
    CHECK(res.value >= res.bound - 1e-12);
  }
  SECTION("gap trace is nonnegative and the bound never decreases") {
    REQUIRE(res.trace.size() >= 2);
    for (std::size_t i = 0; i < res.trace.size(); ++i)
      CHECK(res.trace[i].value >= res.trace[i].bound - 1e-12);
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      CHECK(res.trace[i].bound >= res.trace[i - 1].bound - 1e-15);
  }
}

TEST_CASE("tight budget leaves the result flagged unconverged but bounded") {
  auto b = oracle::random_bundle(9, 3, 2, 62);
  hp::FeasibleSet fs = fset(9, 3);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) { return hp::f_D_value_grad(b, z, g); };
  hp::RelaxOptions opts;
  opts.fw_max_iter = 3;
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fs, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 3);
  double best = std::numeric_limits<double>::infinity();
  oracle::for_each_subset(9, 3, [&](const std::vector<int>& sel) {
    best = std::min(best, hp::f_D(b, oracle::indicator(9, sel)));
  });
  CHECK(res.bound <= best + 1e-12);
}

TEST_CASE("projected subgradient on the nonsmooth objective") {
  hp::SyntheticOptions so;
  so.seed = 63;
  hp::Network net = hp::make_random_network(9, 3, so);
  auto cm = hp::shortest_path_costs(net);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) {
    auto r = hp::f_T_relaxed(cm, z);
    g = r.subgrad;
    return r.value;
  };
  hp::FeasibleSet fs = fset(9, 3);
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Nonsmooth, fs);

  CHECK(std::abs(res.z.sum() - 3.0) < 1e-9);
  CHECK(res.z.minCoeff() >= -1e-12);

  double best = std::numeric_limits<double>::infinity();
  oracle::for_each_subset(9, 3, [&](const std::vector<int>& sel) {
    best = std::min(best, hp::f_T(cm, oracle::indicator(9, sel)));
  });
  CHECK(res.bound <= best + 1e-12);
}

TEST_CASE("bounds stay valid under the adjacency-constrained enumeration") {
  hp::SyntheticOptions so;
  so.seed = 64;
  hp::Network net = hp::make_random_network(10, 4, so);
  auto cm = hp::shortest_path_costs(net);
  auto nb = hp::node_neighbors(net);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) {
    auto r = hp::f_T_relaxed(cm, z);
    g = r.subgrad;
    return r.value;
  };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Nonsmooth, fset(10, 3));
  double best = std::numeric_limits<double>::infinity();
  oracle::for_each_subset(10, 3, [&](const std::vector<int>& sel) {
    for (std::size_t a = 0; a < sel.size(); ++a)
      for (std::size_t b2 = a + 1; b2 < sel.size(); ++b2)
        for (int u : nb[sel[a]])
          if (u == sel[b2]) return;
    best = std::min(best, hp::f_T(cm, oracle::indicator(10, sel)));
  });
  // dropping Gz <= b from the relaxation only lowers the bound
  CHECK(res.bound <= best + 1e-12);
}

TEST_CASE("fixed and excluded nodes are honored at every exit") {
  auto b = oracle::random_bundle(8, 3, 2, 65);
  hp::FeasibleSet fs = fset(8, 3, {2}, {7});
  auto fn = [&](const hp::Vec& z, hp::Vec& g) { return hp::f_D_value_grad(b, z, g); };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fs);
  CHECK(res.z(2) == 1.0);
  CHECK(res.z(7) == 0.0);
  CHECK(std::abs(res.z.sum() - 3.0) < 1e-9);
}

TEST_CASE("non-finite objectives abort with a numerical error") {
  auto fn = [](const hp::Vec&, hp::Vec& g) {
    g = hp::Vec::Zero(3);
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fset(3, 2)),
                  hp::NumericalError);
}

TEST_CASE("zero subgradient at the start certifies optimality immediately") {
  auto fn = [](const hp::Vec& z, hp::Vec& g) {
    g = hp::Vec::Zero(4);
    (void)z;
    return 7.0;
  };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Nonsmooth, fset(4, 2));
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.bound == 7.0);
}

TEST_CASE("trace csv matches the recorded trajectory") {
  auto b = oracle::random_bundle(6, 3, 2, 66);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) { return hp::f_D_value_grad(b, z, g); };
  hp::RelaxOptions opts;
  opts.fw_max_iter = 5;
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fset(6, 2), opts);
  std::string path = "trace_test.csv";
  hp::write_trace_csv(res, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iterate,value,bound");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == static_cast<int>(res.trace.size()));
  std::remove(path.c_str());
}

TEST_CASE("frank-wolfe gap drops below the relative target on a large instance") {
  auto b = oracle::random_bundle(300, 11, 3, 67);
  hp::FeasibleSet fs = fset(300, 10);
  auto fn = [&](const hp::Vec& z, hp::Vec& g) { return hp::f_D_value_grad(b, z, g); };
  auto res = hp::solve_relaxation(fn, hp::ObjectiveKind::Smooth, fs);
  REQUIRE_FALSE(res.trace.empty());
  double f0 = res.trace.front().value;
  CHECK(res.value - res.bound <= 1e-4 * std::max(1.0, std::abs(f0)));
}
