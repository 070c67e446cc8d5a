#pragma once

// Measuring quantum operations in Kraus form and the predicates for the
// operation classes local ⊂ 1-local ⊂ 2-local ⊂ separable ⊂ p.p.t.
//
// Membership in the generated classes (local, 1-local, 2-local) cannot be
// decided from raw Kraus data, so operations carry a provenance tag set by
// the constructors below and propagated by compose / tensorOp / forget.
// Separable and p.p.t. membership are checked directly.

#include <cstddef>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "distill/linalg.hpp"

namespace distill {

inline constexpr double kCompletenessTolerance = 1e-9;
inline constexpr double kChoiTolerance = 1e-9;
inline constexpr double kActionTolerance = 1e-9;
inline constexpr double kZeroProbability = 1e-12;

enum class OperationClass { Local, OneLocal, TwoLocal, Separable, Ppt, Unclassified };

[[nodiscard]] std::string_view toString(OperationClass c) noexcept;

struct ProductTerm {
  ComplexMatrix a;  // on V_A
  ComplexMatrix b;  // on V_B
};

// Per sub-operation, Kraus operators in product form A_j ⊗ B_j.
using SeparableWitness = std::vector<std::vector<ProductTerm>>;

struct SubOperation {
  std::vector<ComplexMatrix> kraus;
  BipartiteLabel output;
};

class QuantumOperation {
 public:
  // Checks shapes only; completeness is the isTracePreserving predicate.
  QuantumOperation(BipartiteLabel input, std::vector<SubOperation> subops,
                   OperationClass provenance = OperationClass::Unclassified,
                   std::optional<SeparableWitness> witness = std::nullopt);

  [[nodiscard]] const BipartiteLabel& input() const noexcept { return input_; }
  [[nodiscard]] const std::vector<SubOperation>& subops() const noexcept { return subops_; }
  [[nodiscard]] const SubOperation& subop(std::size_t i) const { return subops_.at(i); }
  [[nodiscard]] std::size_t branchCount() const noexcept { return subops_.size(); }
  [[nodiscard]] bool isMeasuring() const noexcept { return subops_.size() > 1; }
  [[nodiscard]] OperationClass provenance() const noexcept { return provenance_; }
  [[nodiscard]] const std::optional<SeparableWitness>& witness() const noexcept { return witness_; }

 private:
  BipartiteLabel input_;
  std::vector<SubOperation> subops_;
  OperationClass provenance_;
  std::optional<SeparableWitness> witness_;
};

struct Branch {
  double probability = 0.0;
  // Empty when probability < kZeroProbability.
  std::optional<DensityOperator> state;
};

[[nodiscard]] QuantumOperation identityOperation(BipartiteLabel label);

[[nodiscard]] std::vector<Branch> apply(const QuantumOperation& op, const DensityOperator& rho);

// Unnormalized Σ_j S_ij ρ S_ij† for one branch.
[[nodiscard]] ComplexMatrix applyUnnormalized(const SubOperation& sub, const ComplexMatrix& rho);

// Sub-operations of the result are indexed by (i, k) in i-major order.
[[nodiscard]] QuantumOperation compose(const QuantumOperation& first,
                                       const std::vector<QuantumOperation>& then);
[[nodiscard]] QuantumOperation compose(const QuantumOperation& first,
                                       const QuantumOperation& then);

// Acts on (A_s ⊗ A_t) ⊗ (B_s ⊗ B_t); sub-operations indexed (i, j) i-major.
[[nodiscard]] QuantumOperation tensorOp(const QuantumOperation& s, const QuantumOperation& t);

// Merges the listed branches into one placed at the smallest index.
[[nodiscard]] QuantumOperation forget(const QuantumOperation& op,
                                      const std::set<std::size_t>& mergeSet);
[[nodiscard]] QuantumOperation forgetAll(const QuantumOperation& op);

[[nodiscard]] ComplexMatrix completenessSum(const QuantumOperation& op);
[[nodiscard]] bool isTracePreserving(const QuantumOperation& op,
                                     double tolerance = kCompletenessTolerance);

// A linear map on operators stored as its superoperator matrix on the
// row-major vectorization: vec(out) = superop · vec(in). Used for maps with
// no Kraus form, e.g. S^Γ of a non-p.p.t. operation.
struct LinearAction {
  BipartiteLabel input;
  BipartiteLabel output;
  ComplexMatrix superop;

  [[nodiscard]] ComplexMatrix operator()(const ComplexMatrix& rho) const;
};

[[nodiscard]] LinearAction actionOf(const SubOperation& sub, BipartiteLabel input);

// Choi(S) = Σ_ab |a⟩⟨b| ⊗ S(|a⟩⟨b|), unnormalized.
[[nodiscard]] ComplexMatrix choiMatrix(const LinearAction& action);
[[nodiscard]] double choiMinEigenvalue(const LinearAction& action);

[[nodiscard]] bool isCompletelyPositive(const LinearAction& action,
                                        double tolerance = kChoiTolerance);
[[nodiscard]] bool isCompletelyPositive(const SubOperation& sub, BipartiteLabel input,
                                        double tolerance = kChoiTolerance);

// ρ ↦ (S(ρ^Γ))^Γ with Γ the partial transpose on B of input and output.
[[nodiscard]] LinearAction pptTranspose(const LinearAction& action);
[[nodiscard]] LinearAction pptTranspose(const SubOperation& sub, BipartiteLabel input);

// Smallest Choi eigenvalue over all S_i^Γ.
[[nodiscard]] double pptChoiMinEigenvalue(const QuantumOperation& op);
[[nodiscard]] bool isPptOperation(const QuantumOperation& op, double tolerance = kChoiTolerance);

// Throws DimensionError when the witness shape does not fit the operation.
[[nodiscard]] bool verifySeparableForm(const QuantumOperation& op, const SeparableWitness& w,
                                       double tolerance = kActionTolerance);

// Splits every Kraus operator into A ⊗ B when its realignment has rank one.
// Succeeds only if all of them factor.
[[nodiscard]] std::optional<SeparableWitness> factorProductKraus(const QuantumOperation& op,
                                                                 double tolerance = 1e-10);

// True if the carried witness, or else an automatic product factorization,
// verifies.
[[nodiscard]] bool isVerifiablySeparable(const QuantumOperation& op);

// Single-party operations are QuantumOperations on label {d, 1}.
[[nodiscard]] QuantumOperation singleParty(int inputDim,
                                           std::vector<std::vector<ComplexMatrix>> krausPerBranch);

// S_A ⊗ S_B for non-measuring single-party operations. Tagged local.
[[nodiscard]] QuantumOperation makeLocal(const QuantumOperation& sA, const QuantumOperation& sB);
// S_A ⊗ 1 for an arbitrary single-party S_A. Tagged 1-local.
[[nodiscard]] QuantumOperation makeOneLocal(const QuantumOperation& sA, int dimB);
// 1 ⊗ S_B. Tagged 2-local: together with S_A ⊗ 1 it generates that class.
[[nodiscard]] QuantumOperation makeOneLocalFromB(int dimA, const QuantumOperation& sB);

// Discards the input and prepares `state` on `output`. Tagged unclassified.
[[nodiscard]] QuantumOperation replaceWithState(BipartiteLabel input, const DensityOperator& state);

}  // namespace distill
