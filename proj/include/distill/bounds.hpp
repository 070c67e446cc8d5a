#pragma once

// Scalar entanglement bounds for isotropic states, in bits. 0·log 0 = 0
// throughout.

#include <cstdint>

#include "distill/linalg.hpp"

namespace distill {

[[nodiscard]] double xlog2x(double x);
[[nodiscard]] double binaryEntropy(double F);

struct EfBounds {
  int K = 1;
  double F = 1.0;
  double lower = 0.0;  // max(0, F·log2 K - H2(F))
  double upper = 0.0;  // (FK-1)/(K-1)·log2 K for F ≥ 1/K, else 0
  double pptBound = 0.0;
};

[[nodiscard]] EfBounds efBoundsIsotropic(int K, double F);

// The same two bounds for an integer-valued dimension held as a double, so
// trace dimensions such as 2^120 can be used directly.
[[nodiscard]] double efLowerBound(double K, double F);
[[nodiscard]] double efUpperBound(double K, double F);

// log2 K + F log2 F + (1-F) log2(1-F) - (1-F) log2(K-1). Can be negative.
[[nodiscard]] double pptBoundIsotropic(int K, double F);

struct HashingRate {
  double raw = 0.0;
  double clamped = 0.0;  // max(0, raw)
  // The bound is only established for K a power of 2; other K are evaluated
  // but flagged.
  bool powerOfTwo = true;
};

// log2 K + F log2 F + (1-F) log2((1-F)/(K²-1))
[[nodiscard]] HashingRate hashingRate(int K, double F);

struct EfEstimateOptions {
  int iterations = 600;
  int restarts = 8;
  std::uint64_t seed = 0;
  int ensembleSize = 0;  // 0 picks min(d² + 1, 2·rank + 2)
};

// Upper estimate of the entanglement of formation of a bipartite state with
// total dimension ≤ 16: multi-restart Riemannian gradient descent over
// pure-state ensembles {√λ_i |e_i⟩ mixed by an isometry}. Deterministic for a
// fixed seed.
[[nodiscard]] double efNumericEstimate(const DensityOperator& rho,
                                       const EfEstimateOptions& options = {});

// von Neumann entropy (bits) of the reduced state of a pure bipartite vector.
[[nodiscard]] double entanglementEntropy(const ComplexVector& psi, BipartiteLabel label);

}  // namespace distill
