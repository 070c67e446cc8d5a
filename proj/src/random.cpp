#include "distill/random.hpp"

#include <cmath>

#include "distill/errors.hpp"

namespace distill {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng streamRng(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t mixed = splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(seed)};
  return Rng(seq);
}

ComplexMatrix ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
  ComplexMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  return g;
}

ComplexMatrix haarUnitary(int dim, Rng& rng) {
  // QR of a Ginibre matrix with the phases of R's diagonal moved into Q.
  const ComplexMatrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

ComplexMatrix randomIsometry(int rows, int cols, Rng& rng) {
  return haarUnitary(rows, rng).leftCols(cols);
}

DensityOperator randomDensity(BipartiteLabel label, Rng& rng) {
  const int d = label.total();
  const ComplexMatrix g = ginibre(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()) * 0.5;
  return DensityOperator(std::move(rho), label);
}

ComplexVector randomPureVector(int dim, Rng& rng) {
  ComplexVector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

QuantumOperation randomOperation(BipartiteLabel input, const std::vector<BipartiteLabel>& outputs,
                                 int krausPerBranch, Rng& rng) {
  const int din = input.total();
  int rows = 0;
  for (const auto& o : outputs) rows += o.total() * krausPerBranch;
  if (rows < din) {
    throw DimensionError("randomOperation: not enough Kraus rows for an isometry");
  }
  const ComplexMatrix v = randomIsometry(rows, din, rng);
  std::vector<SubOperation> subops;
  int offset = 0;
  for (const auto& o : outputs) {
    SubOperation sub{{}, o};
    for (int k = 0; k < krausPerBranch; ++k) {
      sub.kraus.push_back(v.middleRows(offset, o.total()));
      offset += o.total();
    }
    subops.push_back(std::move(sub));
  }
  return QuantumOperation(input, std::move(subops));
}

}  // namespace distill
