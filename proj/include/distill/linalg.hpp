#pragma once

// Dense complex linear algebra for small bipartite systems.
//
// Index convention, used by every module: on V_A ⊗ V_B the basis vector
// |a⟩⊗|b⟩ has flat index a·dimB + b. This is the ordering produced by
// the Kronecker product, and partial trace / partial transpose assume it.

#include <complex>
#include <optional>

#include <Eigen/Dense>

namespace distill {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-9;
inline constexpr double trace = 1e-9;
inline constexpr double psd = 1e-9;
inline constexpr double eig = 1e-10;
}  // namespace tol

struct BipartiteLabel {
  int dimA = 1;
  int dimB = 1;

  [[nodiscard]] int total() const noexcept { return dimA * dimB; }
  [[nodiscard]] int index(int a, int b) const noexcept { return a * dimB + b; }
  friend bool operator==(const BipartiteLabel&, const BipartiteLabel&) = default;
};

enum class Subsystem { A, B };

class DensityOperator {
 public:
  // Validates Hermiticity, unit trace and positivity against tol::*.
  explicit DensityOperator(ComplexMatrix matrix,
                           std::optional<BipartiteLabel> label = std::nullopt);

  static DensityOperator fromPure(const ComplexVector& psi,
                                  std::optional<BipartiteLabel> label = std::nullopt);
  static DensityOperator maximallyMixed(BipartiteLabel label);

  [[nodiscard]] const ComplexMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const std::optional<BipartiteLabel>& label() const noexcept { return label_; }
  [[nodiscard]] bool isBipartite() const noexcept { return label_.has_value(); }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(matrix_.rows()); }

  // Throws LabelError when unipartite.
  [[nodiscard]] const BipartiteLabel& bipartite() const;

 private:
  ComplexMatrix matrix_;
  std::optional<BipartiteLabel> label_;
};

[[nodiscard]] ComplexMatrix tensor(const ComplexMatrix& m1, const ComplexMatrix& m2);

// Kronecker product of two operators on bipartite spaces, re-ordered so that
// the result acts on (A1⊗A2)⊗(B1⊗B2). Row and column labels may differ
// (Kraus operators change dimension).
[[nodiscard]] ComplexMatrix bipartiteTensor(const ComplexMatrix& m1, BipartiteLabel rows1,
                                            BipartiteLabel cols1, const ComplexMatrix& m2,
                                            BipartiteLabel rows2, BipartiteLabel cols2);
[[nodiscard]] BipartiteLabel combine(BipartiteLabel l1, BipartiteLabel l2) noexcept;
[[nodiscard]] DensityOperator tensorStates(const DensityOperator& r1, const DensityOperator& r2);

[[nodiscard]] ComplexMatrix partialTrace(const ComplexMatrix& m, BipartiteLabel label,
                                         Subsystem keep);
[[nodiscard]] DensityOperator partialTrace(const DensityOperator& rho, Subsystem keep);

[[nodiscard]] ComplexMatrix partialTranspose(const ComplexMatrix& m, BipartiteLabel label,
                                             Subsystem side = Subsystem::B);
[[nodiscard]] ComplexMatrix partialTranspose(const DensityOperator& rho,
                                             Subsystem side = Subsystem::B);

[[nodiscard]] double hermiticityDefect(const ComplexMatrix& m);
[[nodiscard]] bool isHermitian(const ComplexMatrix& m, double tolerance = tol::herm);

// Ascending eigenvalues of a Hermitian matrix. Throws PreconditionError on
// non-Hermitian input.
[[nodiscard]] RealVector hermitianEigenvalues(const ComplexMatrix& m);
[[nodiscard]] double minEigenvalue(const ComplexMatrix& m);

[[nodiscard]] double maxAbsDifference(const ComplexMatrix& x, const ComplexMatrix& y);

}  // namespace distill
