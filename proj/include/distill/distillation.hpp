#pragma once

// Accounting over protocol traces: the outcome statistics {n_i; (p_ij, K_ij,
// F_ij)} that the different definitions of distillable entanglement
// constrain, plus the trace transformations that relate those definitions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace distill {

struct BranchOutcome {
  double p = 1.0;
  // Output local dimension. Integer-valued; stored as double so that
  // powers of two far beyond 2^64 stay exact.
  double K = 1.0;
  double F = 1.0;
};

struct TraceStep {
  std::int64_t n = 1;
  std::vector<BranchOutcome> branches;
};

class ProtocolTrace {
 public:
  ProtocolTrace() = default;
  // Validates: n ≥ 1 strictly increasing; each step has branches with
  // p ∈ [0,1] summing to 1 (±1e-9), integer K ≥ 1, F ∈ [0,1], and F = 1
  // wherever K = 1.
  explicit ProtocolTrace(std::vector<TraceStep> steps);

  [[nodiscard]] const std::vector<TraceStep>& steps() const noexcept { return steps_; }
  [[nodiscard]] bool empty() const noexcept { return steps_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return steps_.size(); }
  [[nodiscard]] bool singleBranch() const noexcept;

 private:
  std::vector<TraceStep> steps_;
};

[[nodiscard]] bool isPowerOfTwo(double K) noexcept;

// Tail test for "x_i → 0" on a finite sequence: over the last ⌈len/2⌉
// entries (at least 2) the values are nonincreasing and either strictly
// decrease across the tail or end at ≤ 1e-9.
[[nodiscard]] bool tailConvergesToZero(const std::vector<double>& values);

struct Def1Result {
  bool applicable = false;  // false when some step is measuring
  bool fidelityConditionHolds = false;
  std::optional<double> rate;  // last-step log2 K / n, present iff the condition holds
  std::vector<double> perStepRate;
  double lastStepDelta = 0.0;  // rate change over the final step
};

[[nodiscard]] Def1Result def1Rate(const ProtocolTrace& trace);
[[nodiscard]] bool def1primeCheck(const ProtocolTrace& trace);

struct Def2PrimeResult {
  std::vector<double> perStepRate;      // (1/n) Σ p log2 K
  std::vector<double> perStepResidual;  // (1/n) Σ p (1-F) log2 K
  double rate = 0.0;
  double residual = 0.0;
  bool conditionHolds = false;
};

[[nodiscard]] Def2PrimeResult def2primeEvaluate(const ProtocolTrace& trace);

// (1/n) Σ p E_f(F, K) bracketed by the isotropic E_f bounds.
struct Def2Result {
  std::vector<double> perStepLower;
  std::vector<double> perStepUpper;
  double lower = 0.0;
  double upper = 0.0;
};

[[nodiscard]] Def2Result def2Evaluate(const ProtocolTrace& trace);

struct InfFidelityResult {
  std::vector<double> perStepMin;
  double last = 1.0;
  bool conditionHolds = false;
};

[[nodiscard]] InfFidelityResult infFidelityCheck(const ProtocolTrace& trace);

struct RateReport {
  bool def1Applicable = false;
  bool def1FidelityCondition = false;
  std::optional<double> def1Rate;
  bool def1Prime = false;
  double def2Lower = 0.0;
  double def2Upper = 0.0;
  double def2primeRate = 0.0;
  double def2primeResidual = 0.0;
  bool def2primeCondition = false;
  double infFidelity = 1.0;
  bool infFidelityCondition = false;
};

[[nodiscard]] RateReport rateReport(const ProtocolTrace& trace);

// Largest power of two strictly below K / n, or 1 when K < 2n.
[[nodiscard]] double powerOfTwoBelowRatio(double K, std::int64_t n);

struct Theorem2Step {
  std::int64_t n = 1;
  double K = 1.0;
  double Kprime = 1.0;
  double F = 1.0;
  double fidelityLowerBound = 1.0;  // (1 - K'/K)·F, or 1 when K' = 1
  double ratio = 1.0;               // K'/K
  double rate = 0.0;                // log2 K / n
  double ratePrime = 0.0;           // log2 K' / n
};

struct Theorem2Result {
  ProtocolTrace transformed;
  std::vector<Theorem2Step> steps;
  double finalRateGap = 0.0;  // rate - ratePrime at the last step
  double finalRatio = 0.0;    // K'/K at the last step
};

// Non-measuring (single-branch) traces only; throws PreconditionError otherwise.
[[nodiscard]] Theorem2Result theorem2Transform(const ProtocolTrace& trace);

// The same replacement applied branch-wise to a measuring trace.
[[nodiscard]] ProtocolTrace normalizeToPowersOfTwo(const ProtocolTrace& trace);

struct CompilerConfig {
  double pSlack = 0.1;     // p' = (1 - pSlack)·p
  double rateSlack = 0.01;  // R' = (1 - rateSlack)·((2F-1) log2 K - 1) when positive
  int k = 1000;            // tensor power
  int exactLimit = 4096;   // exact multinomial tail up to this k
};

enum class TailMethod { Exact, Hoeffding };

struct CompiledBranch {
  double p = 0.0;
  double pPrime = 0.0;
  double cap = 0.0;     // (2F-1) log2 K - 1
  double rPrime = 0.0;  // 0 when cap ≤ 0 (branch not hashed)
  int threshold = 0;    // ⌊p'·k⌋
  double log2Factor = 0.0;
};

struct CompiledStep {
  std::int64_t n = 1;
  int k = 1;
  std::int64_t inputCopies = 1;  // n·k
  std::vector<CompiledBranch> branches;
  double log2OutputDim = 0.0;    // log2 Π_j max(1, ⌊2^{R' p' k}⌋)
  double achievedRate = 0.0;     // log2OutputDim / (n k)
  double targetRate = 0.0;       // (1/n) Σ R' p'
  double failureProb = 0.0;
  TailMethod tailMethod = TailMethod::Exact;
  double fidelity = 1.0;         // (1 - P_fail) + P_fail / K'²
  double rateBound = 0.0;        // (1/n) Σ p (2F-1) log2 K - 1/n
  std::string rateBoundExact;    // reduced fraction, empty if some K is not a power of two
  double limitingRate = 0.0;     // (1/n) Σ p max(cap, 0): sup over margins as k → ∞
};

struct Theorem3Result {
  std::vector<CompiledStep> steps;
};

// Requires every branch dimension to be a power of two (see
// normalizeToPowersOfTwo); throws ConfigError on bad margins.
[[nodiscard]] Theorem3Result theorem3Compile(const ProtocolTrace& trace, const CompilerConfig& cfg);

[[nodiscard]] std::string exactRateBound(const TraceStep& step);

struct PaddingStep {
  std::int64_t n = 1;
  std::int64_t sourceN = 0;  // 0 when every input is discarded
  std::int64_t discarded = 0;
  double sourceRate = 0.0;
  double rate = 0.0;  // sourceRate · sourceN / n
};

struct PaddedTrace {
  ProtocolTrace trace;  // one step for every n in [1, maxN]
  std::vector<PaddingStep> steps;
};

// Runs the largest defined step with n_src ≤ n and discards the rest.
[[nodiscard]] PaddingStep paddedStepAt(const ProtocolTrace& trace, std::int64_t n);
[[nodiscard]] PaddedTrace discardPadding(const ProtocolTrace& trace, std::int64_t maxN);

}  // namespace distill
