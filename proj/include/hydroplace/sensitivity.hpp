#pragma once

#include "hydroplace/hydraulics.hpp"

#include <cstdio>
#include <cstring>
#include <limits>
#include <optional>

namespace hydroplace {

// Row i of Phi[k] is the gradient w.r.t. the group roughness vector of
// measurable quantity i in scenario k: rows 0..n_p-1 are link flows, rows
// n_p..n_p+n_n-1 are node heads.
struct SensitivityTensor {
  std::vector<Mat> Phi;  // n_t matrices, (n_p + n_n) x n_r
  int n_p = 0, n_n = 0, n_r = 0;
};

// d(headloss)/d(theta_group) per link: the w(q) factor reuses the smoothed
// law so finite differences of the solver agree near zero flow.
struct GroupJacobian {
  std::vector<int> group;    // -1 for valves
  std::vector<double> value; // d rho/d theta * w(q)
};

inline GroupJacobian jacobian_B(const Network& net,
                                const std::vector<LinkPhysics>& phys,
                                const HydraulicState& state) {
  GroupJacobian B;
  B.group.resize(net.n_p());
  B.value.resize(net.n_p());
  for (int l = 0; l < net.n_p(); ++l) {
    const Link& lk = net.links[l];
    if (lk.kind == LinkKind::Valve) {
      B.group[l] = -1;
      B.value[l] = 0.0;
    } else {
      B.group[l] = lk.group;
      B.value[l] = phys[l].drho_dtheta * phys[l].w(state.q(l));
    }
  }
  return B;
}

// Null-space computation of all sensitivity vectors: one Cholesky of
// A12^T A12 shared across scenarios, one Cholesky of Z^T G Z per scenario,
// then two triangular substitutions per measurable quantity.
inline SensitivityTensor compute_sensitivities(const Network& net,
                                               const IncidenceSet& inc,
                                               const HydraulicSolver& solver,
                                               const std::vector<LinkPhysics>& phys,
                                               const std::vector<HydraulicState>& states,
                                               unsigned threads = 1) {
  const int np = net.n_p(), nn = net.n_n(), nr = net.n_r(), nt = net.n_t;
  if (static_cast<int>(states.size()) != nt)
    throw ValidationError("expected one hydraulic state per scenario");

  const SpMat& Z = solver.Z();
  const SpMat Zt = SpMat(Z.transpose());
  const int nz = static_cast<int>(Z.cols());

  // head-row particular solutions, shared across scenarios
  Mat Y(np, nn);
  {
    Mat W = Mat::Identity(nn, nn);
    Mat Wsol(nn, nn);
    parallel_for(static_cast<std::size_t>(nn), threads, [&](std::size_t j) {
      Wsol.col(j) = solver.normal_solver().solve(Vec(W.col(j)));
    });
    Y = inc.A12 * Wsol;
  }

  SensitivityTensor out;
  out.n_p = np;
  out.n_n = nn;
  out.n_r = nr;
  out.Phi.assign(nt, Mat::Zero(np + nn, nr));

  for (int k = 0; k < nt; ++k) {
    const HydraulicState& st = states[k];
    if (!st.converged)
      throw ValidationError("scenario " + std::to_string(k) +
                            " state is not converged");
    Vec g(np);
    for (int l = 0; l < np; ++l) g(l) = phys[l].dheadloss(st.q(l));
    GroupJacobian B = jacobian_B(net, phys, st);

    PosDefSolver red;
    if (nz > 0) {
      SpMat red_mat = Zt * g.asDiagonal() * Z;
      red.analyze(red_mat);
      try {
        red.factorize(red_mat, "reduced sensitivity matrix Z^T G Z");
      } catch (const NumericalError&) {
        throw NumericalError(
            "indefinite reduced matrix in sensitivity solve (zero-flow loop)");
      }
    }

    Mat& Phi = out.Phi[k];
    auto scatter = [&](int row, const Vec& dq) {
      for (int l = 0; l < np; ++l)
        if (B.group[l] >= 0) Phi(row, B.group[l]) -= B.value[l] * dq(l);
    };

    // flow rows: w_i = 0, delta_q = Z (Z^T G Z)^{-1} Z^T e_l
    parallel_for(static_cast<std::size_t>(np), threads, [&](std::size_t l) {
      if (nz == 0) return;  // tree: flows are demand-determined, delta_q = 0
      Vec rhs = Zt.col(static_cast<int>(l));
      Vec dq = Z * red.solve(rhs);
      scatter(static_cast<int>(l), dq);
    });
    // head rows: delta_q = Y e_j + Z (Z^T G Z)^{-1} (-Z^T G Y e_j)
    parallel_for(static_cast<std::size_t>(nn), threads, [&](std::size_t j) {
      Vec yj = Y.col(static_cast<int>(j));
      Vec dq = yj;
      if (nz > 0) {
        Vec rhs = -(Zt * Vec(g.asDiagonal() * yj));
        dq += Z * red.solve(rhs);
      }
      scatter(np + static_cast<int>(j), dq);
    });
  }
  return out;
}

struct SensitivityBundle {
  int n_r = 0, n_t = 0;
  std::vector<Mat> A;    // per node: n_r x n_t head sensitivities
  std::vector<Mat> AAT;  // per node: A_j A_j^T
  Mat X0;                // fixed-sensor information, ridge folded in
  double sigma = 1.0;
  double lambda = std::numeric_limits<double>::infinity();
};

inline SensitivityBundle build_information(const SensitivityTensor& tensor,
                                           const std::vector<int>& s0_links,
                                           double sigma, double lambda) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  const int nr = tensor.n_r, nt = static_cast<int>(tensor.Phi.size());
  SensitivityBundle b;
  b.n_r = nr;
  b.n_t = nt;
  b.sigma = sigma;
  b.lambda = lambda;

  b.X0 = Mat::Zero(nr, nr);
  for (int l : s0_links) {
    if (l < 0 || l >= tensor.n_p)
      throw ValidationError("fixed flow sensor index " + std::to_string(l) +
                            " out of range");
    Mat Af(nr, nt);
    for (int k = 0; k < nt; ++k) Af.col(k) = tensor.Phi[k].row(l).transpose();
    b.X0 += Af * Af.transpose();
  }
  if (std::isfinite(lambda))
    b.X0 += (sigma * sigma / lambda) * Mat::Identity(nr, nr);

  b.A.reserve(tensor.n_n);
  b.AAT.reserve(tensor.n_n);
  Mat Mall = b.X0;
  for (int j = 0; j < tensor.n_n; ++j) {
    Mat Aj(nr, nt);
    for (int k = 0; k < nt; ++k)
      Aj.col(k) = tensor.Phi[k].row(tensor.n_p + j).transpose();
    if (!Aj.allFinite())
      throw NumericalError("non-finite sensitivity for node index " +
                           std::to_string(j));
    b.AAT.push_back(Aj * Aj.transpose());
    Mall += b.AAT.back();
    b.A.push_back(std::move(Aj));
  }

  Eigen::LLT<Mat> llt(Mall);
  if (llt.info() != Eigen::Success) {
    if (!std::isfinite(lambda))
      throw NumericalError(
          "information matrix is singular even with every sensor selected: the "
          "sensitivities do not span the parameter space; set a finite ridge "
          "prior variance lambda");
    throw NumericalError("information matrix singular despite ridge prior");
  }
  return b;
}

// --------------------------- bundle disk cache -----------------------------

inline std::uint64_t bundle_cache_key(const Network& net, const Vec& theta,
                                      double sigma, double lambda,
                                      const std::vector<int>& s0_links,
                                      FrictionModel model) {
  std::string s = canonical_json(net);
  std::uint64_t h = fnv1a64(s);
  auto mix = [&h](const void* p, std::size_t n) { h = fnv1a64(p, n, h); };
  for (int i = 0; i < theta.size(); ++i) {
    double v = theta(i);
    mix(&v, sizeof(v));
  }
  mix(&sigma, sizeof(sigma));
  mix(&lambda, sizeof(lambda));
  for (int l : s0_links) mix(&l, sizeof(l));
  int m = static_cast<int>(model);
  mix(&m, sizeof(m));
  return h;
}

inline void save_bundle(const std::string& path, std::uint64_t key,
                        const SensitivityBundle& b) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ValidationError("cannot write bundle cache '" + path + "'");
  auto put = [&](const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f) != n) {
      std::fclose(f);
      throw ValidationError("short write to bundle cache '" + path + "'");
    }
  };
  const char magic[8] = {'H', 'P', 'S', 'B', '0', '0', '0', '1'};
  put(magic, 8);
  put(&key, sizeof(key));
  std::int32_t nr = b.n_r, nt = b.n_t, nj = static_cast<int>(b.A.size());
  put(&nr, 4);
  put(&nt, 4);
  put(&nj, 4);
  put(&b.sigma, 8);
  put(&b.lambda, 8);
  put(b.X0.data(), sizeof(double) * nr * nr);
  for (const auto& Aj : b.A) put(Aj.data(), sizeof(double) * nr * nt);
  std::fclose(f);
}

inline std::optional<SensitivityBundle> load_bundle(const std::string& path,
                                                    std::uint64_t key) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) return std::nullopt;
  auto get = [&](void* p, std::size_t n) {
    return std::fread(p, 1, n, f) == n;
  };
  char magic[8];
  std::uint64_t file_key = 0;
  std::int32_t nr = 0, nt = 0, nj = 0;
  SensitivityBundle b;
  bool ok = get(magic, 8) && std::memcmp(magic, "HPSB0001", 8) == 0 &&
            get(&file_key, 8) && file_key == key && get(&nr, 4) && get(&nt, 4) &&
            get(&nj, 4) && get(&b.sigma, 8) && get(&b.lambda, 8) && nr > 0 &&
            nt > 0 && nj >= 0;
  if (ok) {
    b.n_r = nr;
    b.n_t = nt;
    b.X0.resize(nr, nr);
    ok = get(b.X0.data(), sizeof(double) * nr * nr);
    for (int j = 0; ok && j < nj; ++j) {
      Mat Aj(nr, nt);
      ok = get(Aj.data(), sizeof(double) * nr * nt);
      if (ok) {
        b.AAT.push_back(Aj * Aj.transpose());
        b.A.push_back(std::move(Aj));
      }
    }
  }
  std::fclose(f);
  if (!ok) return std::nullopt;
  return b;
}

}  // namespace hydroplace
