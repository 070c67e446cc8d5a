#include "distill/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distill/errors.hpp"
#include "distill/kernels.hpp"
#include "distill/states.hpp"

namespace distill {

namespace {

void requireFidelity(double F, const char* what) {
  if (!(F >= -kFidelitySlack && F <= 1.0 + kFidelitySlack)) {
    throw DomainError(std::string(what) + ": fidelity " + std::to_string(F) + " outside [0, 1]");
  }
}

void requireReducible(int K, int Kprime, const char* what) {
  if (K < 1 || Kprime < 1 || Kprime > K) {
    throw DomainError(std::string(what) + ": need 1 <= K' <= K, got K=" + std::to_string(K) +
                      ", K'=" + std::to_string(Kprime));
  }
}

// Single-party pieces of protocol 1.
ComplexMatrix subspaceProjector(int K, int Kprime) {
  ComplexMatrix p = ComplexMatrix::Zero(Kprime, K);
  for (int x = 0; x < Kprime; ++x) p(x, x) = 1.0;
  return p;
}

// |x⟩⟨y| / √K' for x < K' ≤ y: a failed projection followed by the
// maximally mixed state on the subspace.
std::vector<ComplexMatrix> failureReplacement(int K, int Kprime) {
  std::vector<ComplexMatrix> out;
  const double amp = 1.0 / std::sqrt(static_cast<double>(Kprime));
  for (int y = Kprime; y < K; ++y)
    for (int x = 0; x < Kprime; ++x) {
      ComplexMatrix k = ComplexMatrix::Zero(Kprime, K);
      k(x, y) = amp;
      out.push_back(std::move(k));
    }
  return out;
}

DensityOperator onlyState(const std::vector<Branch>& branches) {
  if (branches.size() != 1 || !branches.front().state) {
    throw PreconditionError("expected a single non-null output branch");
  }
  return *branches.front().state;
}

}  // namespace

QuantumOperation protocol1Op(int K, int Kprime, BranchMode mode) {
  requireReducible(K, Kprime, "protocol1Op");
  const ComplexMatrix success = subspaceProjector(K, Kprime);
  const auto failure = failureReplacement(K, Kprime);

  if (mode == BranchMode::Merged) {
    std::vector<ComplexMatrix> kraus{success};
    kraus.insert(kraus.end(), failure.begin(), failure.end());
    const auto party = singleParty(K, {kraus});
    return makeLocal(party, party);
  }

  std::vector<std::vector<ComplexMatrix>> branches{{success}};
  if (!failure.empty()) branches.push_back(failure);

  std::vector<SubOperation> subops;
  SeparableWitness witness;
  for (const auto& a : branches)
    for (const auto& b : branches) {
      SubOperation sub{{}, BipartiteLabel{Kprime, Kprime}};
      std::vector<ProductTerm> terms;
      for (const auto& ka : a)
        for (const auto& kb : b) {
          sub.kraus.push_back(kernels::kron(ka, kb));
          terms.push_back(ProductTerm{ka, kb});
        }
      subops.push_back(std::move(sub));
      witness.push_back(std::move(terms));
    }
  const auto cls = subops.size() > 1 ? OperationClass::TwoLocal : OperationClass::Local;
  return QuantumOperation(BipartiteLabel{K, K}, std::move(subops), cls, std::move(witness));
}

double protocol1Fidelity(int K, int Kprime, double F) {
  if (K < 2) throw DomainError("protocol1Fidelity: K must be >= 2");
  requireReducible(K, Kprime, "protocol1Fidelity");
  requireFidelity(F, "protocol1Fidelity");
  const double k = K, kp = Kprime;
  return (kp / k) * F +
         (k - kp) * ((1.0 - F) * kp * (kp + k) + k * k - 1.0) / (kp * kp * k * (k * k - 1.0));
}

QuantumOperation protocol2Op(int K, int Kprime) {
  requireReducible(K, Kprime, "protocol2Op");
  if (K % Kprime != 0) {
    throw DomainError("protocol2Op: K'=" + std::to_string(Kprime) + " does not divide K=" +
                      std::to_string(K));
  }
  const int traced = K / Kprime;
  std::vector<ComplexMatrix> kraus;
  for (int r = 0; r < traced; ++r) {
    ComplexMatrix k = ComplexMatrix::Zero(Kprime, K);
    for (int x = 0; x < Kprime; ++x) k(x, x * traced + r) = 1.0;
    kraus.push_back(std::move(k));
  }
  const auto party = singleParty(K, {kraus});
  return makeLocal(party, party);
}

double protocol2Fidelity(int K, int Kprime, double f) {
  requireReducible(K, Kprime, "protocol2Fidelity");
  if (K % Kprime != 0) throw DomainError("protocol2Fidelity: K' must divide K");
  requireFidelity(f, "protocol2Fidelity");
  if (K == 1) return makeIsotropicParams(1, f).F;
  const double k2 = static_cast<double>(K) * K, kp2 = static_cast<double>(Kprime) * Kprime;
  return f + (1.0 - f) * (k2 - kp2) / ((k2 - 1.0) * kp2);
}

DensityOperator exactTwirl(const DensityOperator& rho) {
  const auto& label = rho.bipartite();
  if (label.dimA != label.dimB) throw LabelError("exactTwirl: need a K x K state");
  return isotropicState(isotropicFidelity(rho));
}

ComplexMatrix monteCarloTwirl(const DensityOperator& rho, std::size_t samples, std::uint64_t seed) {
  const auto& label = rho.bipartite();
  if (label.dimA != label.dimB) throw LabelError("monteCarloTwirl: need a K x K state");
  return kernels::haarTwirlAverage(rho.matrix(), label.dimA, samples, seed);
}

ReductionPlan makeReductionPlan(int K, int Kprime) {
  requireReducible(K, Kprime, "makeReductionPlan");
  const int blocks = K / Kprime;
  return ReductionPlan{K, Kprime, Kprime * blocks,
                       static_cast<double>(Kprime) * blocks / static_cast<double>(K)};
}

double reductionBound(int K, int Kprime, double F) {
  requireFidelity(F, "reductionBound");
  return makeReductionPlan(K, Kprime).guaranteedFidelityFactor * F;
}

double reductionBoundCoarse(int K, int Kprime, double F) {
  requireReducible(K, Kprime, "reductionBoundCoarse");
  requireFidelity(F, "reductionBoundCoarse");
  return static_cast<double>(std::max(K - Kprime, Kprime)) / K * F;
}

double reduceDimension(int K, int Kprime, double F) {
  if (Kprime >= K) throw DomainError("reduceDimension: need K' < K");
  const auto plan = makeReductionPlan(K, Kprime);
  requireFidelity(F, "reduceDimension");
  double f = F;
  if (plan.stage1Target < K) f = protocol1Fidelity(K, plan.stage1Target, f);
  if (Kprime < plan.stage1Target) f = protocol2Fidelity(plan.stage1Target, Kprime, f);
  return f;
}

DensityOperator reduceDimension(int K, int Kprime, const DensityOperator& rho) {
  if (Kprime >= K) throw DomainError("reduceDimension: need K' < K");
  const auto plan = makeReductionPlan(K, Kprime);
  if (rho.bipartite() != BipartiteLabel{K, K}) throw LabelError("reduceDimension: state is not K x K");
  DensityOperator state = exactTwirl(rho);
  if (plan.stage1Target < K) state = onlyState(apply(protocol1Op(K, plan.stage1Target), state));
  if (Kprime < plan.stage1Target) state = onlyState(apply(protocol2Op(plan.stage1Target, Kprime), state));
  return state;
}

}  // namespace distill
