#include "distill/linalg.hpp"

#include <cmath>
#include <string>

#include "distill/errors.hpp"
#include "distill/kernels.hpp"

namespace distill {

namespace {

void requireSquare(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void requireLabel(const ComplexMatrix& m, BipartiteLabel label, const char* what) {
  requireSquare(m, what);
  if (label.dimA < 1 || label.dimB < 1 || m.rows() != label.total()) {
    throw DimensionError(std::string(what) + ": label " + std::to_string(label.dimA) + "x" +
                         std::to_string(label.dimB) + " does not factor dimension " +
                         std::to_string(m.rows()));
  }
}

}  // namespace

DensityOperator::DensityOperator(ComplexMatrix matrix, std::optional<BipartiteLabel> label)
    : matrix_(std::move(matrix)), label_(label) {
  requireSquare(matrix_, "DensityOperator");
  if (label_) requireLabel(matrix_, *label_, "DensityOperator");
  if (hermiticityDefect(matrix_) > tol::herm) {
    throw DomainError("DensityOperator: matrix is not Hermitian");
  }
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace) {
    throw DomainError("DensityOperator: trace " + std::to_string(tr) + " is not 1");
  }
  const double lo = minEigenvalue(matrix_);
  if (lo < -tol::psd) {
    throw DomainError("DensityOperator: negative eigenvalue " + std::to_string(lo));
  }
}

DensityOperator DensityOperator::fromPure(const ComplexVector& psi,
                                          std::optional<BipartiteLabel> label) {
  const double norm = psi.norm();
  if (norm == 0.0) throw DomainError("fromPure: zero vector");
  const ComplexVector unit = psi / norm;
  return DensityOperator(unit * unit.adjoint(), label);
}

DensityOperator DensityOperator::maximallyMixed(BipartiteLabel label) {
  const int d = label.total();
  return DensityOperator(ComplexMatrix::Identity(d, d) / static_cast<double>(d), label);
}

const BipartiteLabel& DensityOperator::bipartite() const {
  if (!label_) throw LabelError("state carries no bipartite label");
  return *label_;
}

ComplexMatrix tensor(const ComplexMatrix& m1, const ComplexMatrix& m2) {
  return kernels::kron(m1, m2);
}

BipartiteLabel combine(BipartiteLabel l1, BipartiteLabel l2) noexcept {
  return {l1.dimA * l2.dimA, l1.dimB * l2.dimB};
}

ComplexMatrix bipartiteTensor(const ComplexMatrix& m1, BipartiteLabel rows1,
                              BipartiteLabel cols1, const ComplexMatrix& m2,
                              BipartiteLabel rows2, BipartiteLabel cols2) {
  if (m1.rows() != rows1.total() || m1.cols() != cols1.total() ||
      m2.rows() != rows2.total() || m2.cols() != cols2.total()) {
    throw DimensionError("bipartiteTensor: labels do not match matrix shapes");
  }
  const ComplexMatrix plain = kernels::kron(m1, m2);
  const BipartiteLabel rowsOut = combine(rows1, rows2);
  const BipartiteLabel colsOut = combine(cols1, cols2);

  // plain index of (a1,b1,a2,b2) is (a1·dB1 + b1)·d2 + a2·dB2 + b2
  auto plainIndex = [](BipartiteLabel l1, BipartiteLabel l2, int a1, int b1, int a2, int b2) {
    return (a1 * l1.dimB + b1) * l2.total() + a2 * l2.dimB + b2;
  };
  auto regroupedIndex = [](BipartiteLabel l1, BipartiteLabel l2, int a1, int b1, int a2, int b2) {
    return (a1 * l2.dimA + a2) * (l1.dimB * l2.dimB) + b1 * l2.dimB + b2;
  };

  std::vector<int> rowMap(rowsOut.total()), colMap(colsOut.total());
  for (int a1 = 0; a1 < rows1.dimA; ++a1)
    for (int b1 = 0; b1 < rows1.dimB; ++b1)
      for (int a2 = 0; a2 < rows2.dimA; ++a2)
        for (int b2 = 0; b2 < rows2.dimB; ++b2)
          rowMap[regroupedIndex(rows1, rows2, a1, b1, a2, b2)] =
              plainIndex(rows1, rows2, a1, b1, a2, b2);
  for (int a1 = 0; a1 < cols1.dimA; ++a1)
    for (int b1 = 0; b1 < cols1.dimB; ++b1)
      for (int a2 = 0; a2 < cols2.dimA; ++a2)
        for (int b2 = 0; b2 < cols2.dimB; ++b2)
          colMap[regroupedIndex(cols1, cols2, a1, b1, a2, b2)] =
              plainIndex(cols1, cols2, a1, b1, a2, b2);

  ComplexMatrix out(rowsOut.total(), colsOut.total());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = plain(rowMap[r], colMap[c]);
  return out;
}

DensityOperator tensorStates(const DensityOperator& r1, const DensityOperator& r2) {
  if (r1.isBipartite() != r2.isBipartite()) {
    throw LabelError("tensorStates: cannot mix bipartite and unipartite states");
  }
  if (!r1.isBipartite()) return DensityOperator(kernels::kron(r1.matrix(), r2.matrix()));
  const auto l1 = r1.bipartite();
  const auto l2 = r2.bipartite();
  return DensityOperator(bipartiteTensor(r1.matrix(), l1, l1, r2.matrix(), l2, l2),
                         combine(l1, l2));
}

ComplexMatrix partialTrace(const ComplexMatrix& m, BipartiteLabel label, Subsystem keep) {
  requireLabel(m, label, "partialTrace");
  return keep == Subsystem::A ? kernels::partialTraceB(m, label.dimA, label.dimB)
                              : kernels::partialTraceA(m, label.dimA, label.dimB);
}

DensityOperator partialTrace(const DensityOperator& rho, Subsystem keep) {
  if (!rho.isBipartite()) throw DimensionError("partialTrace: state has no bipartite factorization");
  const auto& label = rho.bipartite();
  return DensityOperator(partialTrace(rho.matrix(), label, keep));
}

ComplexMatrix partialTranspose(const ComplexMatrix& m, BipartiteLabel label, Subsystem side) {
  requireLabel(m, label, "partialTranspose");
  return side == Subsystem::B ? kernels::partialTransposeB(m, label.dimA, label.dimB)
                              : kernels::partialTransposeA(m, label.dimA, label.dimB);
}

ComplexMatrix partialTranspose(const DensityOperator& rho, Subsystem side) {
  if (!rho.isBipartite()) throw LabelError("partialTranspose: state is unipartite");
  return partialTranspose(rho.matrix(), rho.bipartite(), side);
}

double hermiticityDefect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return maxAbsDifference(m, m.adjoint());
}

bool isHermitian(const ComplexMatrix& m, double tolerance) {
  return hermiticityDefect(m) <= tolerance;
}

RealVector hermitianEigenvalues(const ComplexMatrix& m) {
  requireSquare(m, "hermitianEigenvalues");
  // Relative to the matrix scale, so large Choi matrices are not rejected
  // for rounding noise.
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermiticityDefect(m) > tol::herm * scale) {
    throw PreconditionError("hermitianEigenvalues: matrix is not Hermitian");
  }
  const ComplexMatrix sym = (m + m.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double minEigenvalue(const ComplexMatrix& m) { return hermitianEigenvalues(m).minCoeff(); }

double maxAbsDifference(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("maxAbsDifference: shape mismatch");
  }
  if (x.size() == 0) return 0.0;
  return (x - y).cwiseAbs().maxCoeff();
}

}  // namespace distill
