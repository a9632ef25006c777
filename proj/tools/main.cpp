#include "hydroplace/hydroplace.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace hp = hydroplace;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hp::ParseError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw hp::ValidationError("cannot write file '" + path + "'");
  out << content;
}

struct CommonArgs {
  std::string inp;
  std::string scenarios;
  std::string config;
};

hp::Network load_network(const CommonArgs& a) {
  hp::Network net = hp::parse_inp(slurp(a.inp));
  for (const auto& w : net.warnings) std::cerr << "warning: " << w << "\n";
  if (!a.scenarios.empty()) hp::apply_scenarios(net, slurp(a.scenarios));
  return net;
}

hp::Config load_config(const CommonArgs& a) {
  return a.config.empty() ? hp::Config() : hp::Config::from_file(a.config);
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--inp", a.inp, "network INP file")->required();
  cmd->add_option("--scenarios", a.scenarios, "scenario CSV (id,v1,...,v_nt)");
  cmd->add_option("--config", a.config, "key = value configuration file");
}

int cmd_hydraulics(const CommonArgs& a, const std::string& out_path) {
  hp::Network net = load_network(a);
  hp::Config cfg = load_config(a);
  hp::ProblemOptions opts = hp::options_from_config(cfg);

  hp::Vec theta = opts.theta;
  if (theta.size() == 0) {
    theta.resize(net.n_r());
    for (int r = 0; r < net.n_r(); ++r) theta(r) = net.group_roughness[r];
  }
  auto inc = hp::build_incidence(net);
  auto phys = hp::build_physics(net, theta, opts.hydraulic);
  hp::HydraulicSolver solver(net, inc, opts.hydraulic);
  auto states = solver.solve_all(phys);

  std::ostringstream os;
  os << "scenario,kind,id,value,residual_energy,residual_mass\n";
  os << std::setprecision(17);
  for (const auto& st : states) {
    for (int l = 0; l < net.n_p(); ++l)
      os << st.scenario << ",flow," << net.links[l].id << ',' << st.q(l) << ','
         << st.residual_energy << ',' << st.residual_mass << '\n';
    for (int i = 0; i < net.n_n(); ++i)
      os << st.scenario << ",head," << net.nodes[i].id << ',' << st.h(i) << ','
         << st.residual_energy << ',' << st.residual_mass << '\n';
  }
  write_file(out_path, os.str());
  std::cout << "wrote " << out_path << " (" << states.size() << " scenarios)\n";
  return 0;
}

int cmd_single(const CommonArgs& a, const std::string& objective,
               const std::vector<int>& ms, const std::string& out_path,
               const std::string& trace_prefix) {
  hp::Network net = load_network(a);
  hp::Config cfg = load_config(a);
  hp::ProblemOptions opts = hp::options_from_config(cfg);

  hp::json rows = hp::json::array();
  hp::json timings = hp::json::array();
  for (int m : ms) {
    hp::json row;
    row["m"] = m;
    row["objective"] = objective;
    try {
      opts.m = m;
      hp::PlacementProblem prob = hp::assemble_problem(net, opts);
      hp::SingleResult res =
          objective == "doptimal"
              ? hp::single_solve(prob, hp::make_fD_objective(prob),
                                 hp::ObjectiveKind::Smooth, hp::binary_fD(prob))
              : hp::single_solve(prob, hp::make_fT_objective(prob),
                                 hp::ObjectiveKind::Nonsmooth, hp::binary_fT(prob));
      row["f_hat"] = res.f_hat;
      row["f_star"] = res.f_star;
      row["gap"] = res.gap;
      row["relax_iterations"] = res.relax_iterations;
      row["relax_converged"] = res.relax_converged;
      row["swap_evaluations"] = res.swap_evaluations;
      row["placement"] = hp::placement_ids(prob.net, res.z_hat);
      timings.push_back(res.seconds);
      if (!trace_prefix.empty())
        hp::write_trace_csv(res.relax,
                            trace_prefix + "_" + objective + "_m" +
                                std::to_string(m) + ".csv");
    } catch (const hp::InfeasibleError& e) {
      row["error"] = e.what();
      timings.push_back(0.0);
    }
    rows.push_back(std::move(row));
  }
  hp::json out;
  out["results"] = std::move(rows);
  out["timings"] = {{"per_row_seconds", std::move(timings)}};
  write_file(out_path, out.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_enum_checks(const hp::PlacementProblem& prob, const hp::ParetoArtifacts& art,
                    std::ostream& os) {
  auto all = hp::enumerate_feasible(prob);
  auto front = hp::brute_force_pareto(prob);
  auto P = hp::images_of(art.P);
  auto L = hp::anchors_of(art.L);
  int failures = 0;

  int w_hits = 0;
  for (const auto& e : front)
    if (hp::in_W(e.image, P)) ++w_hits;
  os << (w_hits == 0 ? "  ok: " : "  FAIL: ")
     << "exact front vs W overlap count = " << w_hits << "\n";
  failures += w_hits == 0 ? 0 : 1;

  int rq_hits = 0;
  for (const auto& e : all)
    if (hp::in_R(e.image, art.f_D_star, art.f_T_star) || hp::in_Q(e.image, L))
      ++rq_hits;
  os << (rq_hits == 0 ? "  ok: " : "  FAIL: ")
     << "feasible images inside R or Q = " << rq_hits << "\n";
  failures += rq_hits == 0 ? 0 : 1;

  double best_D = std::numeric_limits<double>::infinity();
  double best_T = std::numeric_limits<double>::infinity();
  for (const auto& e : all) {
    best_D = std::min(best_D, e.image.fD);
    best_T = std::min(best_T, e.image.fT);
  }
  bool sandwich = art.f_D_star <= best_D + 1e-12 && art.f_T_star <= best_T + 1e-12 &&
                  best_D <= art.d_solve.f_hat + 1e-12 &&
                  best_T <= art.t_solve.f_hat + 1e-12;
  os << (sandwich ? "  ok: " : "  FAIL: ")
     << "bound sandwich f* <= enumerated optimum <= f(z_hat)\n";
  failures += sandwich ? 0 : 1;
  return failures;
}

int cmd_pareto(const CommonArgs& a, int m, int N, const std::string& out_json,
               const std::string& out_csv, bool verify_enum) {
  hp::Network net = load_network(a);
  hp::Config cfg = load_config(a);
  hp::ProblemOptions opts = hp::options_from_config(cfg);
  opts.m = m > 0 ? m : opts.m;
  int n_betas = N > 0 ? N : static_cast<int>(cfg.get_int("n", 5));

  hp::PlacementProblem prob = hp::assemble_problem(std::move(net), opts);
  hp::ParetoArtifacts art = hp::chebyshev_front(prob, n_betas);
  for (const auto& w : art.warnings) std::cerr << "warning: " << w << "\n";

  write_file(out_json, hp::pareto_to_json(art, prob).dump(2) + "\n");
  write_file(out_csv, hp::pareto_plot_csv(art));
  std::cout << "wrote " << out_json << " and " << out_csv << "\n";

  if (verify_enum) {
    std::cout << "enumeration checks:\n";
    int failures = run_enum_checks(prob, art, std::cout);
    if (failures > 0) throw hp::NumericalError("enumeration checks failed");
  }
  return 0;
}

int cmd_verify() {
  int failures = 0;
  for (std::uint64_t seed : {11u, 23u, 37u}) {
    hp::SyntheticOptions so;
    so.seed = seed;
    so.n_groups = 2;
    so.n_t = 2;
    hp::Network net = hp::make_random_network(12, 4, so);
    hp::ProblemOptions opts;
    opts.m = 3;
    opts.lambda = 10.0;
    hp::PlacementProblem prob = hp::assemble_problem(std::move(net), opts);
    hp::ParetoArtifacts art = hp::chebyshev_front(prob, 3);
    std::cout << "synthetic seed " << seed << ":\n";
    failures += run_enum_checks(prob, art, std::cout);
  }
  std::cout << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: checks FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bi-objective pressure sensor placement for water networks"};
  app.require_subcommand(1);

  CommonArgs hyd_args;
  std::string hyd_out = "hydraulics.csv";
  auto* hyd = app.add_subcommand("hydraulics", "solve steady states and dump q, h");
  add_common(hyd, hyd_args);
  hyd->add_option("--out", hyd_out, "output CSV path");

  CommonArgs single_args;
  std::string single_objective = "doptimal";
  std::vector<int> single_ms{2};
  std::string single_out = "single-results.json";
  std::string trace_prefix;
  auto* single = app.add_subcommand("single", "minimize one objective over a budget sweep");
  add_common(single, single_args);
  single->add_option("--objective", single_objective, "doptimal or pmedian")
      ->check(CLI::IsMember({"doptimal", "pmedian"}));
  single->add_option("--m", single_ms, "sensor budgets, e.g. --m 2 3 4");
  single->add_option("--out", single_out, "output JSON path");
  single->add_option("--trace", trace_prefix, "write per-solve convergence CSVs with this prefix");

  CommonArgs pareto_args;
  int pareto_m = 0, pareto_n = 0;
  std::string pareto_json = "pareto-results.json";
  std::string pareto_csv = "pareto-plot.csv";
  bool verify_enum = false;
  auto* pareto = app.add_subcommand("pareto", "approximate the Pareto front with bounds");
  add_common(pareto, pareto_args);
  pareto->add_option("--m", pareto_m, "sensor budget");
  pareto->add_option("--N", pareto_n, "number of interior scalarizations");
  pareto->add_option("--out-json", pareto_json, "results JSON path");
  pareto->add_option("--out-csv", pareto_csv, "plot CSV path");
  pareto->add_flag("--verify-enum", verify_enum, "run enumeration oracle checks");

  auto* verify = app.add_subcommand("verify", "run enumeration oracle suite on small nets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (hyd->parsed()) return cmd_hydraulics(hyd_args, hyd_out);
    if (single->parsed())
      return cmd_single(single_args, single_objective, single_ms, single_out,
                        trace_prefix);
    if (pareto->parsed())
      return cmd_pareto(pareto_args, pareto_m, pareto_n, pareto_json, pareto_csv,
                        verify_enum);
    if (verify->parsed()) return cmd_verify();
  } catch (const hp::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const hp::ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const hp::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const hp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
