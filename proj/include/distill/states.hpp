#pragma once

// Φ⁺ and the isotropic family. All fidelities are relative to the fixed
// Φ⁺(K) = K^{-1/2} Σ_i |i⟩⊗|i⟩ in the computational basis; any other
// maximally entangled reference is related to it by a local unitary.

#include "distill/linalg.hpp"

namespace distill {

// Slack allowed on F ∈ [0, 1] before an argument is rejected.
inline constexpr double kFidelitySlack = 1e-12;

struct IsotropicParams {
  int K = 1;
  double F = 1.0;

  // a in a·Φ⁺Φ⁺† + (1 - a)·I/K²
  [[nodiscard]] double mixing() const;
};

// Validates 1 ≤ K, F ∈ [0, 1] (within kFidelitySlack, then clamped), and
// F = 1 when K = 1.
[[nodiscard]] IsotropicParams makeIsotropicParams(int K, double F);

[[nodiscard]] double mixingFromFidelity(int K, double F);
[[nodiscard]] double fidelityFromMixing(int K, double a);

[[nodiscard]] ComplexVector phiPlus(int K);
[[nodiscard]] ComplexMatrix phiPlusProjector(int K);
[[nodiscard]] DensityOperator phiPlusState(int K);

// ⟨Φ⁺|ρ|Φ⁺⟩. Requires dimA = dimB.
[[nodiscard]] double fidelity(const DensityOperator& rho);

[[nodiscard]] DensityOperator isotropicState(IsotropicParams p);
[[nodiscard]] DensityOperator isotropicState(int K, double F);

// (K, fidelity(ρ)); does not check that ρ is isotropic.
[[nodiscard]] IsotropicParams isotropicFidelity(const DensityOperator& rho);

}  // namespace distill
