#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cbtomo/charge_model.hpp"

namespace cbtomo {

using SparseCMatrix = Eigen::SparseMatrix<complex, Eigen::RowMajor>;

struct LanczosOptions {
  // Residual bound ||H x - lambda x|| <= tolerance * ||H||_inf per pair.
  double tolerance = 1e-10;
  // Matrices at or below this dimension are solved densely.
  Eigen::Index dense_threshold = 1000;
  Eigen::Index max_krylov = 1200;
  int check_every = 10;
  std::uint64_t seed = 0x5eed;
  // Extra restarts in the complement of the converged pairs, to catch copies of
  // (near-)degenerate levels that a single Krylov sequence misses.
  int max_deflation_rounds = 6;
};

struct LanczosResult {
  Eigen::VectorXd eigenvalues;  // ascending
  CMatrix eigenvectors;
  Eigen::VectorXd residuals;    // ||H x - lambda x||
  double norm_estimate = 0.0;
  Eigen::Index krylov_steps = 0;
  bool dense = false;
};

// Lowest `count` eigenpairs of a sparse Hermitian matrix, with the same phase
// and degenerate-ordering convention as eigensystem().
LanczosResult lowest_eigenpairs(const SparseCMatrix& h, Eigen::Index count,
                                const LanczosOptions& options = {});

}  // namespace cbtomo
