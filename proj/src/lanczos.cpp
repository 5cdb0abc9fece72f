#include "cbtomo/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cbtomo/errors.hpp"
#include "cbtomo/rng.hpp"

namespace cbtomo {

namespace {

double inf_norm(const SparseCMatrix& h) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < h.outerSize(); ++r) {
    double row = 0.0;
    for (SparseCMatrix::InnerIterator it(h, r); it; ++it) {
      row += std::abs(it.value());
    }
    best = std::max(best, row);
  }
  return best;
}

void orthogonalize(CVector& w, const CMatrix& basis, Eigen::Index cols) {
  if (cols == 0) {
    return;
  }
  // Two passes of classical Gram-Schmidt.
  for (int pass = 0; pass < 2; ++pass) {
    w.noalias() -= basis.leftCols(cols) * (basis.leftCols(cols).adjoint() * w);
  }
}

struct RitzPairs {
  Eigen::VectorXd values;
  CMatrix vectors;
  Eigen::Index steps = 0;
};

// One Lanczos sequence in the orthogonal complement of `locked`. Returns the
// `want` lowest Ritz pairs once their residual estimates pass.
RitzPairs lanczos_run(const SparseCMatrix& h, const CMatrix& locked, Eigen::Index want,
                      double threshold, const LanczosOptions& options, std::uint64_t stream) {
  const Eigen::Index n = h.rows();
  const Eigen::Index room = n - locked.cols();
  const Eigen::Index max_steps = std::min(options.max_krylov, room);
  want = std::min(want, room);

  CounterRng rng(options.seed, stream);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = complex(re, im);
  }
  orthogonalize(v, locked, locked.cols());
  v.normalize();

  CMatrix basis(n, max_steps);
  std::vector<double> alpha;
  std::vector<double> beta;
  basis.col(0) = v;

  Eigen::VectorXd ritz;
  Eigen::MatrixXd s;
  Eigen::Index m = 0;
  bool done = false;
  while (!done) {
    CVector w = h * basis.col(m);
    const double a = std::real(basis.col(m).dot(w));
    alpha.push_back(a);
    w -= a * basis.col(m);
    if (m > 0) {
      w -= beta[m - 1] * basis.col(m - 1);
    }
    orthogonalize(w, basis, m + 1);
    orthogonalize(w, locked, locked.cols());
    const double b = w.norm();
    ++m;

    const bool exhausted = b <= 1e-14 * threshold || m == max_steps;
    if (exhausted || (m >= want && m % options.check_every == 0)) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd off = Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      ritz = tri.eigenvalues();
      s = tri.eigenvectors();
      bool converged = m >= want;
      for (Eigen::Index i = 0; converged && i < want; ++i) {
        converged = std::abs(b * s(m - 1, i)) <= 0.5 * threshold;
      }
      if (converged || b <= 1e-14 * threshold) {
        done = true;
      } else if (m == max_steps) {
        CMatrix best = basis.leftCols(m) * s.leftCols(want).cast<complex>();
        throw ConvergenceError("Lanczos did not converge within " + std::to_string(m) + " steps",
                               best, static_cast<int>(m));
      }
    }
    if (!done) {
      beta.push_back(b);
      basis.col(m) = w / b;
    }
  }

  want = std::min(want, m);
  RitzPairs out;
  out.values = ritz.head(want);
  out.vectors = basis.leftCols(m) * s.leftCols(want).cast<complex>();
  for (Eigen::Index q = 0; q < want; ++q) {
    out.vectors.col(q).normalize();
  }
  out.steps = m;
  return out;
}

void finalize(LanczosResult& result, Eigen::Index count, double scale) {
  const Eigen::Index total = result.eigenvalues.size();
  std::vector<Eigen::Index> anchors(static_cast<std::size_t>(total));
  for (Eigen::Index q = 0; q < total; ++q) {
    fix_phase(result.eigenvectors.col(q));
    const Eigen::VectorXd mag = result.eigenvectors.col(q).cwiseAbs();
    const double peak = mag.maxCoeff();
    Eigen::Index anchor = 0;
    while (mag[anchor] < peak * (1.0 - 1e-8)) {
      ++anchor;
    }
    anchors[static_cast<std::size_t>(q)] = anchor;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd& ev = result.eigenvalues;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(ev[a] - ev[b]) > 1e-12 * scale) {
      return ev[a] < ev[b];
    }
    return anchors[static_cast<std::size_t>(a)] < anchors[static_cast<std::size_t>(b)];
  });
  LanczosResult sorted = result;
  sorted.eigenvalues.resize(count);
  sorted.eigenvectors.resize(result.eigenvectors.rows(), count);
  sorted.residuals.resize(count);
  for (Eigen::Index q = 0; q < count; ++q) {
    const auto src = order[static_cast<std::size_t>(q)];
    sorted.eigenvalues[q] = ev[src];
    sorted.eigenvectors.col(q) = result.eigenvectors.col(src);
    sorted.residuals[q] = result.residuals[src];
  }
  result = std::move(sorted);
}

}  // namespace

LanczosResult lowest_eigenpairs(const SparseCMatrix& h, Eigen::Index count,
                                const LanczosOptions& options) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n || count < 1 || count > n) {
    throw std::invalid_argument("lowest_eigenpairs: bad shape or level count");
  }
  LanczosResult result;
  result.norm_estimate = inf_norm(h);
  const double scale = std::max(1.0, result.norm_estimate);
  const double threshold = options.tolerance * scale;

  if (n <= options.dense_threshold) {
    const CMatrix dense = CMatrix(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(dense);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("lowest_eigenpairs: dense diagonalization failed");
    }
    result.eigenvalues = solver.eigenvalues();
    result.eigenvectors = solver.eigenvectors();
    result.residuals = Eigen::VectorXd::Zero(n);
    result.dense = true;
    finalize(result, count, scale);
    for (Eigen::Index q = 0; q < count; ++q) {
      result.residuals[q] =
          (h * result.eigenvectors.col(q) - result.eigenvalues[q] * result.eigenvectors.col(q)).norm();
    }
    return result;
  }

  RitzPairs first = lanczos_run(h, CMatrix(n, 0), count, threshold, options, 0);
  std::vector<double> values(first.values.data(), first.values.data() + first.values.size());
  CMatrix vectors = first.vectors;
  result.krylov_steps = first.steps;

  // Look for missed levels below the current count-th level.
  for (int round = 1; round <= options.max_deflation_rounds && vectors.cols() < n; ++round) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double ceiling = sorted[static_cast<std::size_t>(count - 1)];
    RitzPairs extra = lanczos_run(h, vectors, 1, threshold, options, static_cast<std::uint64_t>(round));
    result.krylov_steps += extra.steps;
    if (extra.values.size() == 0 || extra.values[0] >= ceiling - threshold) {
      break;
    }
    values.push_back(extra.values[0]);
    CMatrix grown(n, vectors.cols() + 1);
    grown << vectors, extra.vectors.col(0);
    vectors = std::move(grown);
  }

  result.eigenvalues = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  result.eigenvectors = vectors;
  result.residuals.resize(result.eigenvalues.size());
  for (Eigen::Index q = 0; q < result.eigenvalues.size(); ++q) {
    result.residuals[q] =
        (h * vectors.col(q) - result.eigenvalues[q] * vectors.col(q)).norm();
  }
  finalize(result, count, scale);
  for (Eigen::Index q = 0; q < count; ++q) {
    if (result.residuals[q] > threshold) {
      throw ConvergenceError("Lanczos residual " + std::to_string(result.residuals[q]) +
                                 " above tolerance for level " + std::to_string(q),
                             result.eigenvectors, static_cast<int>(result.krylov_steps));
    }
  }
  return result;
}

}  // namespace cbtomo
