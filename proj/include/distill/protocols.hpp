#pragma once

// Dimension-reducing local protocols on isotropic states, their closed-form
// fidelity maps, and twirling by U⊗Ū.

#include <cstdint>

#include "distill/linalg.hpp"
#include "distill/operations.hpp"

namespace distill {

enum class BranchMode { Merged, KeepBranches };

// Both parties project onto span{|0⟩..|K'-1⟩}. A party whose projection
// fails replaces its share with the maximally mixed state on that subspace.
// KeepBranches gives four sub-operations ordered (A ok, B ok), (A ok, B fail),
// (A fail, B ok), (A fail, B fail); empty failure branches (K' = K) are
// omitted. Merged gives the single non-measuring local operation.
[[nodiscard]] QuantumOperation protocol1Op(int K, int Kprime,
                                           BranchMode mode = BranchMode::Merged);

// Output fidelity of protocol 1 (merged) on an isotropic input of fidelity F.
[[nodiscard]] double protocol1Fidelity(int K, int Kprime, double F);

// Each party views C^K as C^{K'} ⊗ C^{K/K'} (index x·(K/K') + y) and traces
// out the second factor.
[[nodiscard]] QuantumOperation protocol2Op(int K, int Kprime);
[[nodiscard]] double protocol2Fidelity(int K, int Kprime, double f);

// The U⊗Ū group average, in closed form: the isotropic state with the same
// fidelity.
[[nodiscard]] DensityOperator exactTwirl(const DensityOperator& rho);

// Sampled average over Haar-random U. Test oracle for exactTwirl.
[[nodiscard]] ComplexMatrix monteCarloTwirl(const DensityOperator& rho, std::size_t samples,
                                            std::uint64_t seed);

struct ReductionPlan {
  int K = 1;
  int Kprime = 1;
  int stage1Target = 1;                  // K'·⌊K/K'⌋
  double guaranteedFidelityFactor = 1.0;  // (K'/K)·⌊K/K'⌋
};

[[nodiscard]] ReductionPlan makeReductionPlan(int K, int Kprime);

// Lower bound (K'/K)⌊K/K'⌋·F on the reduced fidelity.
[[nodiscard]] double reductionBound(int K, int Kprime, double F);
// The weaker max(K-K', K')/K·F.
[[nodiscard]] double reductionBoundCoarse(int K, int Kprime, double F);

// Twirl, protocol 1 down to K'⌊K/K'⌋, then protocol 2 down to K'.
[[nodiscard]] DensityOperator reduceDimension(int K, int Kprime, const DensityOperator& rho);
// Closed-form fidelity of the same composite on an isotropic input.
[[nodiscard]] double reduceDimension(int K, int Kprime, double F);

}  // namespace distill
