#include "distill/states.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distill/errors.hpp"

namespace distill {

double IsotropicParams::mixing() const { return mixingFromFidelity(K, F); }

IsotropicParams makeIsotropicParams(int K, double F) {
  if (K < 1) throw DomainError("isotropic dimension must be >= 1, got " + std::to_string(K));
  if (!(F >= -kFidelitySlack && F <= 1.0 + kFidelitySlack)) {
    throw DomainError("fidelity " + std::to_string(F) + " outside [0, 1]");
  }
  F = std::clamp(F, 0.0, 1.0);
  if (K == 1 && F != 1.0) {
    if (std::abs(F - 1.0) > kFidelitySlack) throw DomainError("dimension 1 forces fidelity 1");
    F = 1.0;
  }
  return {K, F};
}

double mixingFromFidelity(int K, double F) {
  if (K == 1) return 1.0;
  const double k2 = static_cast<double>(K) * K;
  return (F * k2 - 1.0) / (k2 - 1.0);
}

double fidelityFromMixing(int K, double a) {
  const double k2 = static_cast<double>(K) * K;
  return a + (1.0 - a) / k2;
}

ComplexVector phiPlus(int K) {
  if (K < 1) throw DomainError("phiPlus: K must be >= 1");
  ComplexVector v = ComplexVector::Zero(K * K);
  const double amp = 1.0 / std::sqrt(static_cast<double>(K));
  for (int i = 0; i < K; ++i) v(i * K + i) = amp;
  return v;
}

ComplexMatrix phiPlusProjector(int K) {
  const ComplexVector v = phiPlus(K);
  return v * v.adjoint();
}

DensityOperator phiPlusState(int K) { return DensityOperator(phiPlusProjector(K), BipartiteLabel{K, K}); }

double fidelity(const DensityOperator& rho) {
  const auto& label = rho.bipartite();
  if (label.dimA != label.dimB) {
    throw LabelError("fidelity needs V⊗V, got " + std::to_string(label.dimA) + "x" +
                     std::to_string(label.dimB));
  }
  // Φ⁺ is supported on |ii⟩, so the overlap is (1/K) Σ_{ij} ρ_{ii,jj}.
  const int K = label.dimA;
  Complex s = 0.0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) s += rho.matrix()(i * K + i, j * K + j);
  return s.real() / K;
}

DensityOperator isotropicState(IsotropicParams p) {
  p = makeIsotropicParams(p.K, p.F);
  const int K = p.K;
  const int d = K * K;
  const double a = p.mixing();
  ComplexMatrix m = a * phiPlusProjector(K);
  m.diagonal().array() += (1.0 - a) / d;
  return DensityOperator(std::move(m), BipartiteLabel{K, K});
}

DensityOperator isotropicState(int K, double F) { return isotropicState(IsotropicParams{K, F}); }

IsotropicParams isotropicFidelity(const DensityOperator& rho) {
  const double F = fidelity(rho);
  return makeIsotropicParams(rho.bipartite().dimA, F);
}

}  // namespace distill
