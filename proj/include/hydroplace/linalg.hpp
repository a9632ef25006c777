#pragma once

#include "hydroplace/common.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace hydroplace {

// Cholesky solver for symmetric positive definite systems. Small systems use
// dense LLT, larger ones sparse simplicial LLT with fill-reducing ordering.
// The sparsity pattern is analyzed once; refactorizing with new values keeps
// the symbolic work.
class PosDefSolver {
 public:
  static constexpr int kDenseLimit = 200;

  PosDefSolver() = default;
  explicit PosDefSolver(const SpMat& A, const std::string& context = "system") {
    analyze(A);
    factorize(A, context);
  }

  void analyze(const SpMat& A) {
    dense_ = A.rows() < kDenseLimit;
    if (!dense_) {
      sparse_ = std::make_unique<Eigen::SimplicialLLT<SpMat>>();
      sparse_->analyzePattern(A);
    }
  }

  void factorize(const SpMat& A, const std::string& context = "system") {
    if (dense_) {
      dense_llt_.compute(Mat(A));
      if (dense_llt_.info() != Eigen::Success)
        throw NumericalError("Cholesky factorization failed: " + context +
                             " is not positive definite");
    } else {
      sparse_->factorize(A);
      if (sparse_->info() != Eigen::Success)
        throw NumericalError("Cholesky factorization failed: " + context +
                             " is not positive definite");
    }
  }

  Vec solve(const Vec& b) const {
    return dense_ ? Vec(dense_llt_.solve(b)) : Vec(sparse_->solve(b));
  }

  Mat solve(const Mat& B) const {
    return dense_ ? Mat(dense_llt_.solve(B)) : Mat(sparse_->solve(B));
  }

  bool dense() const { return dense_; }

 private:
  bool dense_ = true;
  Eigen::LLT<Mat> dense_llt_;
  std::unique_ptr<Eigen::SimplicialLLT<SpMat>> sparse_;
};

}  // namespace hydroplace
