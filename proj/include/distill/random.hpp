#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "distill/linalg.hpp"
#include "distill/operations.hpp"

namespace distill {

using Rng = std::mt19937_64;

// Generator for stream `index` of a run seeded with `seed`.
[[nodiscard]] Rng streamRng(std::uint64_t seed, std::uint64_t index);

[[nodiscard]] ComplexMatrix ginibre(int rows, int cols, Rng& rng);
[[nodiscard]] ComplexMatrix haarUnitary(int dim, Rng& rng);
// rows ≥ cols; columns orthonormal.
[[nodiscard]] ComplexMatrix randomIsometry(int rows, int cols, Rng& rng);

// Full-rank ρ = G G† / tr(G G†) with G Ginibre.
[[nodiscard]] DensityOperator randomDensity(BipartiteLabel label, Rng& rng);
[[nodiscard]] ComplexVector randomPureVector(int dim, Rng& rng);

// Trace-preserving operation with one sub-operation per output label, built
// by slicing a Haar isometry into Kraus blocks.
[[nodiscard]] QuantumOperation randomOperation(BipartiteLabel input,
                                               const std::vector<BipartiteLabel>& outputs,
                                               int krausPerBranch, Rng& rng);

}  // namespace distill
