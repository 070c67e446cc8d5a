#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (namespace
// kernels) and a plain serial loop version (kernels::reference) that shares
// no code with it; tests and bench/ compare the two.
//
// Every parallel reduction sums fixed-size blocks in index order, so the
// result is bit-identical for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "distill/linalg.hpp"

namespace distill::kernels {

[[nodiscard]] ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Σ_j K_j ρ K_j†
[[nodiscard]] ComplexMatrix krausSum(std::span<const ComplexMatrix> kraus,
                                     const ComplexMatrix& rho);

// Row-major vectorization: vec(K ρ K†) = (Σ_j K_j ⊗ conj(K_j)) vec(ρ).
[[nodiscard]] ComplexMatrix superoperator(std::span<const ComplexMatrix> kraus);

[[nodiscard]] ComplexMatrix partialTraceB(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTraceA(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTransposeB(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTransposeA(const ComplexMatrix& m, int dimA, int dimB);

// Mean of (U⊗Ū) ρ (U⊗Ū)† over `samples` Haar-random U ∈ U(K). Sample i
// draws from its own generator seeded by (seed, i).
[[nodiscard]] ComplexMatrix haarTwirlAverage(const ComplexMatrix& rho, int K,
                                             std::size_t samples, std::uint64_t seed);

// P(∃ j : N_j < thresholds[j]) for (N_1..N_J) ~ Multinomial(k, probs).
// Computed as accumulated failure mass, so tiny probabilities keep their
// relative accuracy.
[[nodiscard]] double multinomialShortfall(int k, std::span<const double> probs,
                                          std::span<const int> thresholds);

namespace reference {
[[nodiscard]] ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
[[nodiscard]] ComplexMatrix krausSum(std::span<const ComplexMatrix> kraus,
                                     const ComplexMatrix& rho);
[[nodiscard]] ComplexMatrix superoperator(std::span<const ComplexMatrix> kraus);
[[nodiscard]] ComplexMatrix partialTraceB(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTraceA(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTransposeB(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix partialTransposeA(const ComplexMatrix& m, int dimA, int dimB);
[[nodiscard]] ComplexMatrix haarTwirlAverage(const ComplexMatrix& rho, int K,
                                             std::size_t samples, std::uint64_t seed);
[[nodiscard]] double multinomialShortfall(int k, std::span<const double> probs,
                                          std::span<const int> thresholds);
}  // namespace reference

}  // namespace distill::kernels
