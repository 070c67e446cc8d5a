#include "distill/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "distill/bounds.hpp"
#include "distill/distillation.hpp"
#include "distill/errors.hpp"
#include "distill/kernels.hpp"
#include "distill/protocols.hpp"
#include "distill/random.hpp"
#include "distill/states.hpp"

namespace distill {

namespace {

constexpr std::size_t kMaxDetails = 8;
constexpr double kClosedForm = 1e-9;
constexpr double kIdentity = 1e-12;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class Suite {
 public:
  explicit Suite(std::string name) { result_.name = std::move(name); }

  template <class Describe>
  void expect(bool ok, Describe&& describe) {
    ++result_.checks;
    if (ok) return;
    ++result_.failures;
    if (result_.details.size() < kMaxDetails) result_.details.push_back(describe());
  }

  // Exceptions count as a failed check instead of aborting the run.
  template <class Body>
  void guarded(const std::string& what, Body&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      expect(false, [&] { return what + ": threw " + e.what(); });
    }
  }

  SuiteResult take() { return std::move(result_); }

 private:
  SuiteResult result_;
};

std::vector<double> fidelityGrid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

ComplexMatrix localConjugation(const ComplexMatrix& u) { return kernels::kron(u, u.conjugate()); }

double branchFidelity(const std::vector<Branch>& branches) {
  if (branches.size() != 1 || !branches.front().state) {
    throw PreconditionError("expected one non-null branch");
  }
  return fidelity(*branches.front().state);
}

// linalg ---------------------------------------------------------------

SuiteResult suiteLinalg(std::uint64_t seed) {
  Suite s("linalg");
  Rng rng = streamRng(seed, 101);
  for (int dA : {2, 3})
    for (int dB : {2, 3}) {
      const BipartiteLabel label{dA, dB};
      for (int trial = 0; trial < 100; ++trial) {
        const auto rho = randomDensity(label, rng);
        const auto& m = rho.matrix();
        const std::string at = "dims " + std::to_string(dA) + "x" + std::to_string(dB) +
                               " trial " + std::to_string(trial);

        const auto ra = partialTrace(m, label, Subsystem::A);
        const auto rb = partialTrace(m, label, Subsystem::B);
        s.expect(std::abs(ra.trace().real() - 1.0) <= kIdentity,
                 [&] { return at + ": tr_B changes the trace"; });
        s.expect(std::abs(rb.trace().real() - 1.0) <= kIdentity,
                 [&] { return at + ": tr_A changes the trace"; });

        const auto pt = partialTranspose(m, label);
        s.expect(isHermitian(pt) && std::abs(pt.trace().real() - 1.0) <= kIdentity,
                 [&] { return at + ": partial transpose lost Hermiticity or trace"; });
        s.expect(maxAbsDifference(partialTranspose(pt, label), m) == 0.0,
                 [&] { return at + ": partial transpose is not an involution"; });
        // (ρ^{T_B})^{T_A} = ρ^T
        s.expect(maxAbsDifference(partialTranspose(pt, label, Subsystem::A), m.transpose()) == 0.0,
                 [&] { return at + ": T_A T_B differs from the full transpose"; });

        const auto sigma = randomDensity(BipartiteLabel{dB, 1}, rng);
        const auto prod = tensor(DensityOperator::maximallyMixed({dA, 1}).matrix(), sigma.matrix());
        s.expect(maxAbsDifference(partialTrace(prod, label, Subsystem::B), sigma.matrix()) <= kIdentity,
                 [&] { return at + ": tr_A(I/dA ⊗ σ) != σ"; });

        s.expect(maxAbsDifference(kernels::partialTraceB(m, dA, dB),
                                  kernels::reference::partialTraceB(m, dA, dB)) <= kIdentity,
                 [&] { return at + ": partialTraceB kernel parity"; });
        s.expect(maxAbsDifference(kernels::partialTraceA(m, dA, dB),
                                  kernels::reference::partialTraceA(m, dA, dB)) <= kIdentity,
                 [&] { return at + ": partialTraceA kernel parity"; });
        s.expect(maxAbsDifference(kernels::partialTransposeB(m, dA, dB),
                                  kernels::reference::partialTransposeB(m, dA, dB)) == 0.0,
                 [&] { return at + ": partialTransposeB kernel parity"; });
        s.expect(maxAbsDifference(kernels::partialTransposeA(m, dA, dB),
                                  kernels::reference::partialTransposeA(m, dA, dB)) == 0.0,
                 [&] { return at + ": partialTransposeA kernel parity"; });

        const auto g = ginibre(dA, dB, rng);
        s.expect(maxAbsDifference(kernels::kron(g, m), kernels::reference::kron(g, m)) == 0.0,
                 [&] { return at + ": kron kernel parity"; });
        const std::vector<ComplexMatrix> kraus{ginibre(dA * dB, dA * dB, rng),
                                               ginibre(dA * dB, dA * dB, rng)};
        s.expect(maxAbsDifference(kernels::krausSum(kraus, m),
                                  kernels::reference::krausSum(kraus, m)) <= kIdentity,
                 [&] { return at + ": krausSum kernel parity"; });
      }
    }

  const auto rho = randomDensity({2, 2}, rng);
  s.expect(maxAbsDifference(kernels::haarTwirlAverage(rho.matrix(), 2, 256, seed),
                            kernels::reference::haarTwirlAverage(rho.matrix(), 2, 256, seed)) <=
               kIdentity,
           [] { return std::string("haarTwirlAverage kernel parity"); });
  const std::vector<double> probs{0.2, 0.3, 0.5};
  const std::vector<int> thresholds{15, 25, 45};
  const double tail = kernels::multinomialShortfall(100, probs, thresholds);
  const double tailRef = kernels::reference::multinomialShortfall(100, probs, thresholds);
  s.expect(std::abs(tail - tailRef) <= kIdentity * std::max(1.0, tailRef),
           [&] { return "multinomialShortfall parity: " + num(tail) + " vs " + num(tailRef); });
  return s.take();
}

// states ---------------------------------------------------------------

SuiteResult suiteStates(std::uint64_t seed) {
  Suite s("states");
  Rng rng = streamRng(seed, 102);
  for (int K = 2; K <= 6; ++K)
    for (double F : fidelityGrid()) {
      const std::string at = "K=" + std::to_string(K) + " F=" + num(F);
      s.guarded(at, [&] {
        const auto rho = isotropicState(K, F);
        s.expect(std::abs(fidelity(rho) - F) <= kIdentity,
                 [&] { return at + ": fidelity(isotropicState) = " + num(fidelity(rho)); });
        s.expect(std::abs(fidelityFromMixing(K, mixingFromFidelity(K, F)) - F) <= kIdentity,
                 [&] { return at + ": mixing parameter round trip"; });
        for (int t = 0; t < 20; ++t) {
          const auto w = localConjugation(haarUnitary(K, rng));
          const ComplexMatrix moved = w * rho.matrix() * w.adjoint();
          s.expect(maxAbsDifference(moved, rho.matrix()) <= kClosedForm,
                   [&] { return at + ": isotropic state not U⊗Ū invariant"; });
        }
      });
    }
  for (int K = 1; K <= 8; ++K) {
    s.expect(std::abs(fidelity(phiPlusState(K)) - 1.0) <= kIdentity,
             [&] { return "fidelity(Φ⁺) != 1 at K=" + std::to_string(K); });
    const auto mixed = DensityOperator::maximallyMixed({K, K});
    s.expect(std::abs(fidelity(mixed) - 1.0 / (K * K)) <= kIdentity,
             [&] { return "fidelity(I/K²) != 1/K² at K=" + std::to_string(K); });
  }
  return s.take();
}

// protocols ------------------------------------------------------------

SuiteResult suiteProtocol1(double perturbation) {
  Suite s("protocol1");
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      const auto op = protocol1Op(K, Kp);
      s.expect(isTracePreserving(op), [&] {
        return "protocol 1 K=" + std::to_string(K) + " K'=" + std::to_string(Kp) +
               " is not trace preserving";
      });
      for (double F : fidelityGrid()) {
        const std::string at =
            "K=" + std::to_string(K) + " K'=" + std::to_string(Kp) + " F=" + num(F);
        s.guarded(at, [&] {
          const double simulated = branchFidelity(apply(op, isotropicState(K, F)));
          const double closed = protocol1Fidelity(K, Kp, F) + perturbation;
          s.expect(std::abs(simulated - closed) <= kClosedForm, [&] {
            return at + ": simulated " + num(simulated) + " vs closed form " + num(closed);
          });
          s.expect(closed >= static_cast<double>(Kp) / K * F - kIdentity,
                   [&] { return at + ": closed form below (K'/K)F"; });
        });
      }
    }
  const double spot = protocol1Fidelity(4, 2, 1.0) + perturbation;
  s.expect(std::abs(spot - 0.625) <= kIdentity,
           [&] { return "K=4 K'=2 F=1: closed form " + num(spot) + " != 0.625"; });
  return s.take();
}

std::vector<std::pair<int, int>> divisorPairs(int maxK) {
  std::vector<std::pair<int, int>> out;
  for (int K = 2; K <= maxK; ++K)
    for (int Kp = 1; Kp <= K; ++Kp)
      if (K % Kp == 0) out.emplace_back(K, Kp);
  return out;
}

SuiteResult suiteProtocol2() {
  Suite s("protocol2");
  for (auto [K, Kp] : divisorPairs(9)) {
    const auto op = protocol2Op(K, Kp);
    const std::string pair = "K=" + std::to_string(K) + " K'=" + std::to_string(Kp);
    s.expect(isTracePreserving(op), [&] { return pair + ": not trace preserving"; });
    for (double F : fidelityGrid()) {
      const std::string at = pair + " F=" + num(F);
      s.guarded(at, [&] {
        const auto branches = apply(op, isotropicState(K, F));
        const auto& out = *branches.front().state;
        const double simulated = fidelity(out);
        const double closed = protocol2Fidelity(K, Kp, F);
        s.expect(std::abs(simulated - closed) <= kClosedForm, [&] {
          return at + ": simulated " + num(simulated) + " vs closed form " + num(closed);
        });
        s.expect(maxAbsDifference(out.matrix(), isotropicState(Kp, closed).matrix()) <= kClosedForm,
                 [&] { return at + ": output is not isotropic"; });
      });
    }
    s.guarded(pair + " fixed points", [&] {
      const double one = branchFidelity(apply(op, phiPlusState(K)));
      s.expect(std::abs(one - 1.0) <= kIdentity && protocol2Fidelity(K, Kp, 1.0) == 1.0,
               [&] { return pair + ": Φ⁺ not mapped to Φ⁺"; });
      const auto mixed = apply(op, DensityOperator::maximallyMixed({K, K}));
      const double target = 1.0 / (static_cast<double>(Kp) * Kp);
      s.expect(maxAbsDifference(mixed.front().state->matrix(),
                                DensityOperator::maximallyMixed({Kp, Kp}).matrix()) <= kIdentity &&
                   std::abs(protocol2Fidelity(K, Kp, 1.0 / (static_cast<double>(K) * K)) - target) <=
                       kIdentity,
               [&] { return pair + ": maximally mixed state not mapped to maximally mixed"; });
    });
  }
  return s.take();
}

SuiteResult suiteTwirl(std::uint64_t seed) {
  Suite s("twirl");
  Rng rng = streamRng(seed, 105);
  for (int K = 2; K <= 4; ++K)
    for (int trial = 0; trial < 5; ++trial) {
      const std::string at = "K=" + std::to_string(K) + " state " + std::to_string(trial);
      const auto rho = randomDensity({K, K}, rng);
      const auto tw = exactTwirl(rho);
      s.expect(std::abs(fidelity(tw) - fidelity(rho)) <= kIdentity,
               [&] { return at + ": twirl changed the fidelity"; });
      for (int c = 0; c < 100; ++c) {
        const auto w = localConjugation(haarUnitary(K, rng));
        s.expect(maxAbsDifference(w * tw.matrix() * w.adjoint(), tw.matrix()) <= kClosedForm,
                 [&] { return at + ": twirled state not U⊗Ū invariant"; });
      }
    }
  for (int K : {2, 3}) {
    const auto rho = randomDensity({K, K}, rng);
    const auto mc = monteCarloTwirl(rho, 10000, seed + static_cast<std::uint64_t>(K));
    const double diff = maxAbsDifference(mc, exactTwirl(rho).matrix());
    s.expect(diff <= 1e-2, [&] {
      return "K=" + std::to_string(K) + ": Monte Carlo twirl off by " + num(diff);
    });
  }
  return s.take();
}

SuiteResult suiteLemma2(std::uint64_t seed) {
  Suite s("lemma2");
  Rng rng = streamRng(seed, 106);
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp < K; ++Kp)
      for (double F : fidelityGrid()) {
        const std::string at =
            "K=" + std::to_string(K) + " K'=" + std::to_string(Kp) + " F=" + num(F);
        s.guarded(at, [&] {
          const double simulated = fidelity(reduceDimension(K, Kp, isotropicState(K, F)));
          const double bound = reductionBound(K, Kp, F);
          const double coarse = reductionBoundCoarse(K, Kp, F);
          s.expect(simulated >= bound - kIdentity, [&] {
            return at + ": simulated " + num(simulated) + " below bound " + num(bound);
          });
          s.expect(bound >= coarse - kIdentity,
                   [&] { return at + ": bound " + num(bound) + " below coarse " + num(coarse); });
          s.expect(std::abs(simulated - reduceDimension(K, Kp, F)) <= kClosedForm,
                   [&] { return at + ": composite closed form mismatch"; });
        });
      }
  // Non-isotropic inputs go through the twirl first.
  for (int trial = 0; trial < 20; ++trial) {
    const int K = 3 + trial % 4;
    const int Kp = 1 + trial % (K - 1);
    const auto rho = randomDensity({K, K}, rng);
    const double F = fidelity(rho);
    s.guarded("random state " + std::to_string(trial), [&] {
      const double simulated = fidelity(reduceDimension(K, Kp, rho));
      s.expect(simulated >= reductionBound(K, Kp, F) - kIdentity,
               [&] { return "random state " + std::to_string(trial) + ": bound violated"; });
    });
  }
  return s.take();
}

// bounds ---------------------------------------------------------------

SuiteResult suiteLemma1(std::uint64_t seed) {
  Suite s("lemma1-chain");
  for (int K = 2; K <= 16; ++K)
    for (int i = 0; i <= 20; ++i) {
      const double F = i / 20.0;
      const std::string at = "K=" + std::to_string(K) + " F=" + num(F);
      const double k = K;
      const double lhs = pptBoundIsotropic(K, F) - (F * std::log2(k) - binaryEntropy(F));
      const double rhs = (1.0 - F) * std::log2(k / (k - 1.0));
      s.expect(std::abs(lhs - rhs) <= kIdentity,
               [&] { return at + ": ppt identity residual " + num(lhs - rhs); });
      const auto b = efBoundsIsotropic(K, F);
      s.expect(b.lower <= b.upper + kIdentity,
               [&] { return at + ": lower " + num(b.lower) + " > upper " + num(b.upper); });
      s.expect(b.lower >= 0.0 && b.upper <= std::log2(k) + kIdentity,
               [&] { return at + ": bounds outside [0, log2 K]"; });
    }
  for (double F : {0.5, 0.7, 0.9, 1.0}) {
    const std::string at = "E_f K=2 F=" + num(F);
    s.guarded(at, [&] {
      const auto b = efBoundsIsotropic(2, F);
      EfEstimateOptions opt;
      opt.seed = seed;
      const double est = efNumericEstimate(isotropicState(2, F), opt);
      s.expect(est >= b.lower - 1e-6 && est <= b.upper + 1e-4, [&] {
        return at + ": estimate " + num(est) + " outside [" + num(b.lower) + ", " + num(b.upper) + "]";
      });
    });
  }
  return s.take();
}

SuiteResult suiteLemma3() {
  Suite s("lemma3-identity");
  for (int K : {2, 4, 8, 16}) {
    const double k = K;
    for (int i = 1; i < 20; ++i) {
      const double F = i / 20.0;
      const double expected = (2.0 * F - 1.0) * std::log2(k) - binaryEntropy(F) +
                              (1.0 - F) * std::log2(k * k / (k * k - 1.0));
      const auto h = hashingRate(K, F);
      s.expect(std::abs(h.raw - expected) <= kIdentity, [&] {
        return "K=" + std::to_string(K) + " F=" + num(F) + ": residual " + num(h.raw - expected);
      });
      s.expect(h.clamped == std::max(0.0, h.raw) && h.powerOfTwo,
               [&] { return "K=" + std::to_string(K) + ": clamp or power-of-two flag wrong"; });
    }
    s.expect(hashingRate(K, 1.0).raw == std::log2(k),
             [&] { return "hashingRate(" + std::to_string(K) + ", 1) != log2 K"; });
  }
  return s.take();
}

// operation algebra ----------------------------------------------------

BipartiteLabel randomLabel(Rng& rng, int maxDim) {
  std::uniform_int_distribution<int> d(1, maxDim);
  return {d(rng), d(rng)};
}

QuantumOperation randomOp(BipartiteLabel input, Rng& rng, int maxBranches = 3) {
  std::uniform_int_distribution<int> branches(1, maxBranches);
  std::vector<BipartiteLabel> outputs(static_cast<std::size_t>(branches(rng)));
  int rows = 0;
  for (auto& o : outputs) {
    o = randomLabel(rng, 2);
    rows += o.total();
  }
  std::uniform_int_distribution<int> extra(0, 1);
  const int kraus = (input.total() + rows - 1) / rows + extra(rng);
  return randomOperation(input, outputs, kraus, rng);
}

// Outputs on {d, 1}, as the single-party constructors require.
QuantumOperation randomSingleParty(int dim, Rng& rng, int maxBranches) {
  std::uniform_int_distribution<int> branches(1, maxBranches);
  std::uniform_int_distribution<int> outDim(1, 3);
  std::vector<BipartiteLabel> outputs(static_cast<std::size_t>(branches(rng)));
  int rows = 0;
  for (auto& o : outputs) {
    o = {outDim(rng), 1};
    rows += o.dimA;
  }
  return randomOperation({dim, 1}, outputs, (dim + rows - 1) / rows, rng);
}

SuiteResult suiteOperationAlgebra(std::uint64_t seed) {
  Suite s("operation-algebra");
  Rng rng = streamRng(seed, 109);
  constexpr int kCases = 200;

  for (int c = 0; c < kCases; ++c) {
    const std::string at = "case " + std::to_string(c);
    s.guarded(at, [&] {
      const auto in = randomLabel(rng, 3);
      const auto op = randomOp(in, rng);
      s.expect(isTracePreserving(op), [&] { return at + ": completeness fails"; });
      bool cp = true;
      for (const auto& sub : op.subops()) cp = cp && isCompletelyPositive(sub, in);
      s.expect(cp, [&] { return at + ": Choi matrix not PSD"; });

      const auto rho = randomDensity(in, rng);
      double total = 0.0;
      for (const auto& b : apply(op, rho)) total += b.probability;
      s.expect(std::abs(total - 1.0) <= kClosedForm,
               [&] { return at + ": branch probabilities sum to " + num(total); });

      // compose then apply == apply then apply, branch by branch
      std::vector<QuantumOperation> then;
      for (const auto& sub : op.subops()) then.push_back(randomOp(sub.output, rng, 2));
      const auto composed = compose(op, then);
      std::size_t idx = 0;
      double worst = 0.0;
      for (std::size_t i = 0; i < op.branchCount(); ++i) {
        const ComplexMatrix mid = applyUnnormalized(op.subop(i), rho.matrix());
        for (std::size_t k = 0; k < then[i].branchCount(); ++k, ++idx) {
          const auto direct = applyUnnormalized(composed.subop(idx), rho.matrix());
          const auto staged = applyUnnormalized(then[i].subop(k), mid);
          worst = std::max(worst, maxAbsDifference(direct, staged));
        }
      }
      s.expect(idx == composed.branchCount() && worst <= kClosedForm,
               [&] { return at + ": compose/apply mismatch " + num(worst); });

      // tensor product rule on product inputs
      const auto in2 = randomLabel(rng, 2);
      const auto op2 = randomOp(in2, rng, 2);
      const auto rho2 = randomDensity(in2, rng);
      const auto joint = tensorOp(op, op2);
      const auto jointState = tensorStates(rho, rho2);
      worst = 0.0;
      for (std::size_t i = 0; i < op.branchCount(); ++i)
        for (std::size_t j = 0; j < op2.branchCount(); ++j) {
          const auto& si = op.subop(i);
          const auto& tj = op2.subop(j);
          const auto lhs =
              applyUnnormalized(joint.subop(i * op2.branchCount() + j), jointState.matrix());
          const auto rhs = bipartiteTensor(applyUnnormalized(si, rho.matrix()), si.output, si.output,
                                           applyUnnormalized(tj, rho2.matrix()), tj.output, tj.output);
          worst = std::max(worst, maxAbsDifference(lhs, rhs));
        }
      s.expect(worst <= kClosedForm, [&] { return at + ": tensor product rule off by " + num(worst); });

      // forget gives the probability-weighted mixture of the merged branches
      std::map<std::pair<int, int>, std::set<std::size_t>> byOutput;
      for (std::size_t i = 0; i < op.branchCount(); ++i)
        byOutput[{op.subop(i).output.dimA, op.subop(i).output.dimB}].insert(i);
      for (const auto& [key, group] : byOutput) {
        const auto merged = forget(op, group);
        const std::size_t anchor = *group.begin();
        ComplexMatrix sum = ComplexMatrix::Zero(op.subop(anchor).output.total(),
                                                op.subop(anchor).output.total());
        for (auto i : group) sum += applyUnnormalized(op.subop(i), rho.matrix());
        const double diff = maxAbsDifference(applyUnnormalized(merged.subop(anchor), rho.matrix()), sum);
        s.expect(merged.branchCount() == op.branchCount() - group.size() + 1 && diff <= kClosedForm,
                 [&] { return at + ": forget mixture identity off by " + num(diff); });
      }
    });
  }

  // constructor-tagged local and 1-local operations carry verifying witnesses
  for (int c = 0; c < 20; ++c) {
    const std::string at = "local case " + std::to_string(c);
    s.guarded(at, [&] {
      const int dA = 1 + c % 3, dB = 1 + (c / 3) % 3;
      const auto sA = randomSingleParty(dA, rng, 1);
      const auto sB = randomSingleParty(dB, rng, 1);
      const auto local = makeLocal(sA, sB);
      s.expect(local.witness() && verifySeparableForm(local, *local.witness()) && isPptOperation(local),
               [&] { return at + ": local operation fails separable/ppt"; });
      const auto measuring = randomSingleParty(dA, rng, 3);
      const auto oneLocal = makeOneLocal(measuring, dB);
      s.expect(oneLocal.witness() && verifySeparableForm(oneLocal, *oneLocal.witness()) &&
                   isPptOperation(oneLocal),
               [&] { return at + ": 1-local operation fails separable/ppt"; });
    });
  }

  const auto creation = replaceWithState({2, 2}, phiPlusState(2));
  const double choiMin = pptChoiMinEigenvalue(creation);
  s.expect(choiMin <= -0.5 + kClosedForm && !isPptOperation(creation),
           [&] { return "Φ⁺ creation not flagged: min eigenvalue " + num(choiMin); });

  for (int K = 2; K <= 4; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      const std::string at = "K=" + std::to_string(K) + " K'=" + std::to_string(Kp);
      for (auto mode : {BranchMode::Merged, BranchMode::KeepBranches}) {
        const auto p1 = protocol1Op(K, Kp, mode);
        s.expect(isVerifiablySeparable(p1) && isPptOperation(p1) && isTracePreserving(p1),
                 [&] { return at + ": protocol 1 not separable/ppt"; });
      }
      if (K % Kp == 0) {
        const auto p2 = protocol2Op(K, Kp);
        s.expect(isVerifiablySeparable(p2) && isPptOperation(p2),
                 [&] { return at + ": protocol 2 not separable/ppt"; });
      }
    }
  return s.take();
}

// traces ---------------------------------------------------------------

ProtocolTrace singleBranchTrace(const std::vector<std::int64_t>& n, const std::vector<double>& K,
                                const std::vector<double>& F) {
  std::vector<TraceStep> steps;
  for (std::size_t i = 0; i < n.size(); ++i) steps.push_back({n[i], {{1.0, K[i], F[i]}}});
  return ProtocolTrace(std::move(steps));
}

SuiteResult suiteTheorem2() {
  Suite s("theorem2");
  // n_i = i, K_i = 2^{3i}, F_i = 1 - 1/i
  std::vector<std::int64_t> n;
  std::vector<double> K, F;
  for (int i = 1; i <= 40; ++i) {
    n.push_back(i);
    K.push_back(std::ldexp(1.0, 3 * i));
    F.push_back(1.0 - 1.0 / i);
  }
  const auto result = theorem2Transform(singleBranchTrace(n, K, F));
  s.expect(def1primeCheck(result.transformed),
           [] { return std::string("transformed dimensions are not powers of two"); });
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& st = result.steps[i];
    const std::string at = "i=" + std::to_string(st.n);
    s.expect(st.Kprime * static_cast<double>(st.n) < st.K && 2.0 * st.Kprime * static_cast<double>(st.n) >= st.K,
             [&] { return at + ": K' is not the largest power of two below K/n"; });
    if (st.n > 4) {
      s.expect(st.ratio <= result.steps[i - 1].ratio,
               [&] { return at + ": K'/K increased to " + num(st.ratio); });
    }
    const double gap = st.rate - st.ratePrime;
    const double nd = static_cast<double>(st.n);
    const double allowed = (1.0 + std::log2(nd)) / nd;
    s.expect(gap >= 0.0 && gap <= allowed + kIdentity, [&] {
      return at + ": rate gap " + num(gap) + " exceeds (1 + log2 n)/n = " + num(allowed);
    });
  }
  s.expect(result.finalRatio <= 1.0 / 40.0,
           [&] { return "K'/K did not shrink: " + num(result.finalRatio); });
  const auto d1 = def1Rate(result.transformed);
  s.expect(d1.fidelityConditionHolds,
           [] { return std::string("transformed fidelities do not tend to 1"); });

  // geometric n: the gap is (1 + log2 n)/n exactly and falls monotonically
  std::vector<std::int64_t> gn;
  std::vector<double> gK, gF;
  for (int i = 1; i <= 8; ++i) {
    gn.push_back(std::int64_t{1} << i);
    gK.push_back(std::ldexp(1.0, 3 << i));
    gF.push_back(1.0 - std::ldexp(1.0, -i));
  }
  const auto geo = theorem2Transform(singleBranchTrace(gn, gK, gF));
  double prevGap = 1e300;
  for (const auto& st : geo.steps) {
    const double gap = st.rate - st.ratePrime;
    const double expected = (1.0 + std::log2(static_cast<double>(st.n))) / static_cast<double>(st.n);
    s.expect(std::abs(gap - expected) <= kIdentity && gap < prevGap,
             [&] { return "geometric n=" + std::to_string(st.n) + ": gap " + num(gap); });
    prevGap = gap;
  }

  // worked value and conventions
  const auto worked = theorem2Transform(singleBranchTrace({10}, {std::ldexp(1.0, 30)}, {0.99}));
  const auto& w = worked.steps.front();
  s.expect(w.Kprime == std::ldexp(1.0, 26) && std::abs(w.fidelityLowerBound - 0.928125) <= 1e-15,
           [&] { return "n=10 K=2^30: K'=" + num(w.Kprime) + " F'=" + num(w.fidelityLowerBound); });
  const auto small = theorem2Transform(singleBranchTrace({10}, {15.0}, {0.9})).steps.front();
  s.expect(small.Kprime == 1.0 && small.fidelityLowerBound == 1.0,
           [] { return std::string("K < 2n does not map to K'=1, F'=1"); });
  const auto pow2 = theorem2Transform(singleBranchTrace({1}, {64.0}, {1.0})).steps.front();
  s.expect(pow2.Kprime == 32.0 && pow2.rate - pow2.ratePrime == 1.0,
           [] { return std::string("n=1, K=64 does not drop to K'=32"); });
  return s.take();
}

ProtocolTrace compilerFixture() {
  return ProtocolTrace({TraceStep{10, {{0.5, 1024.0, 0.99}, {0.5, 1.0, 1.0}}}});
}

SuiteResult suiteTheorem3(std::uint64_t seed) {
  Suite s("theorem3");
  const auto fixture = compilerFixture();
  CompilerConfig cfg;
  cfg.k = 10000;
  const auto big = theorem3Compile(fixture, cfg).steps.front();
  s.expect(big.rateBoundExact == "39/100",
           [&] { return "fixture rate bound " + big.rateBoundExact + " != 39/100"; });
  s.expect(std::abs(big.rateBound - 0.39) <= kIdentity,
           [&] { return "fixture rate bound " + num(big.rateBound); });
  const double target = 0.99 * (0.98 * 10.0 - 1.0) * 0.45 / 10.0;
  s.expect(std::abs(big.targetRate - target) <= kIdentity,
           [&] { return "target rate " + num(big.targetRate) + " != " + num(target); });
  s.expect(std::abs(big.achievedRate - big.targetRate) <= 1e-3, [&] {
    return "k=10000: achieved " + num(big.achievedRate) + " vs target " + num(big.targetRate);
  });
  s.expect(big.rateBound <= big.limitingRate + kIdentity,
           [&] { return "rate bound above the limiting rate"; });

  double prev = 2.0;
  for (int k : {10, 100, 1000}) {
    cfg.k = k;
    const auto st = theorem3Compile(fixture, cfg).steps.front();
    s.expect(st.tailMethod == TailMethod::Exact && st.failureProb < prev, [&] {
      return "k=" + std::to_string(k) + ": failure probability " + num(st.failureProb) +
             " not below " + num(prev);
    });
    s.expect(st.achievedRate <= st.targetRate + kIdentity,
             [&] { return "k=" + std::to_string(k) + ": achieved rate above target"; });
    prev = st.failureProb;
  }

  CompilerConfig half;
  half.pSlack = 0.5;
  half.rateSlack = 0.5;
  half.k = 1000;
  const auto h = theorem3Compile(fixture, half).steps.front();
  s.expect(h.failureProb < 1e-10, [&] { return "half margins: failure " + num(h.failureProb); });

  CompilerConfig plain;
  const auto degenerate =
      theorem3Compile(ProtocolTrace({TraceStep{1, {{1.0, 2.0, 1.0}}}}), plain).steps.front();
  s.expect(degenerate.achievedRate == 0.0 && degenerate.targetRate == 0.0,
           [] { return std::string("K=2, F=1 branch is not rate 0"); });

  Rng rng = streamRng(seed, 112);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> exponent(0, 12);
  for (int t = 0; t < 50; ++t) {
    const std::string at = "random trace " + std::to_string(t);
    s.guarded(at, [&] {
      std::vector<BranchOutcome> branches;
      double total = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double K = std::ldexp(1.0, exponent(rng));
        const double F = K == 1.0 ? 1.0 : 0.5 + 0.5 * unit(rng);
        const double p = 0.1 + unit(rng);
        total += p;
        branches.push_back({p, K, F});
      }
      for (auto& b : branches) b.p /= total;
      const double psum = branches[0].p + branches[1].p;
      branches[2].p = 1.0 - psum;
      CompilerConfig c;
      c.k = 200;
      const auto st =
          theorem3Compile(ProtocolTrace({TraceStep{5, std::move(branches)}}), c).steps.front();
      s.expect(st.achievedRate <= st.targetRate + kIdentity && st.rateBound <= st.limitingRate + kIdentity &&
                   st.fidelity >= 0.0 && st.fidelity <= 1.0,
               [&] { return at + ": compiled step out of range"; });
    });
  }
  return s.take();
}

SuiteResult suiteDefinitions(std::uint64_t seed) {
  Suite s("definitions");

  // (n=i, K=2^i, F=1-1/i) has rate 1
  std::vector<std::int64_t> n;
  std::vector<double> K, Kh, F, Fc;
  for (int i = 1; i <= 30; ++i) {
    n.push_back(i);
    K.push_back(std::ldexp(1.0, i));
    Kh.push_back(std::ldexp(1.0, i / 2));
    F.push_back(1.0 - 1.0 / i);
    Fc.push_back(0.9);
  }
  const auto r1 = def1Rate(singleBranchTrace(n, K, F));
  s.expect(r1.fidelityConditionHolds && r1.rate && *r1.rate == 1.0,
           [] { return std::string("def1 rate of 2^i trace is not 1"); });
  s.expect(!def1Rate(singleBranchTrace(n, K, Fc)).rate,
           [] { return std::string("def1 rate present with constant F = 0.9"); });
  std::vector<double> Fh = F;
  for (std::size_t i = 0; i < Kh.size(); ++i)
    if (Kh[i] == 1.0) Fh[i] = 1.0;
  const auto rh = def1Rate(singleBranchTrace(n, Kh, Fh));
  s.expect(rh.rate && std::abs(*rh.rate - 0.5) <= 1e-12,
           [] { return std::string("def1 rate of 2^{i/2} trace is not 0.5"); });
  s.expect(def1primeCheck(singleBranchTrace({1, 2, 3}, {2, 4, 8}, {1, 1, 1})) &&
               !def1primeCheck(singleBranchTrace({1, 2, 3}, {2, 6, 8}, {1, 1, 1})) &&
               def1primeCheck(ProtocolTrace()),
           [] { return std::string("def1' power-of-two check"); });

  const auto fixture = compilerFixture();
  const auto d2p = def2primeEvaluate(fixture);
  s.expect(std::abs(d2p.rate - 0.5) <= kIdentity && std::abs(d2p.residual - 0.005) <= kIdentity,
           [&] { return "fixture rate " + num(d2p.rate) + " residual " + num(d2p.residual); });
  const auto d2 = def2Evaluate(ProtocolTrace({TraceStep{10, {{1.0, 2.0, 0.9}}}}));
  s.expect(std::abs(d2.lower - (0.9 - binaryEntropy(0.9)) / 10.0) <= kIdentity &&
               std::abs(d2.upper - 0.08) <= kIdentity,
           [&] { return "def2 interval [" + num(d2.lower) + ", " + num(d2.upper) + "]"; });
  const auto inf = infFidelityCheck(fixture);
  s.expect(inf.last == 0.99, [&] { return "inf fidelity " + num(inf.last); });

  // the def1 condition implies the def2' condition on the same data
  Rng rng = streamRng(seed, 113);
  std::uniform_int_distribution<int> rateDist(1, 4);
  std::uniform_int_distribution<int> stride(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const std::string at = "monotone trace " + std::to_string(t);
    s.guarded(at, [&] {
      const int R = rateDist(rng);
      std::vector<std::int64_t> tn;
      std::vector<double> tK, tF;
      std::int64_t cur = 0;
      double deficit = 0.5 * unit(rng) + 0.1;
      for (int i = 0; i < 12; ++i) {
        cur += stride(rng);
        deficit *= 0.3 + 0.6 * unit(rng);
        tn.push_back(cur);
        tK.push_back(std::ldexp(1.0, R * static_cast<int>(cur)));
        tF.push_back(1.0 - deficit);
      }
      const auto trace = singleBranchTrace(tn, tK, tF);
      const auto a = def1Rate(trace);
      const auto b = def2primeEvaluate(trace);
      s.expect(a.fidelityConditionHolds && b.conditionHolds && a.rate &&
                   std::abs(*a.rate - b.rate) <= kIdentity && *a.rate == R,
               [&] { return at + ": definition 1 and 2' disagree"; });
      const auto i2 = def2Evaluate(trace);
      const auto& last = trace.steps().back();
      const double slack = binaryEntropy(last.branches.front().F) / static_cast<double>(last.n);
      s.expect(i2.lower <= i2.upper + kIdentity && b.rate - i2.upper <= b.residual + slack + kIdentity,
               [&] { return at + ": def2 interval relation fails"; });
    });
  }

  // discarding inputs to fill in missing n
  const auto sparse = singleBranchTrace({10, 20, 40}, {1024.0, 1048576.0, std::ldexp(1.0, 40)},
                                        {0.9, 0.95, 0.99});
  const auto at25 = paddedStepAt(sparse, 25);
  s.expect(at25.sourceN == 20 && std::abs(at25.rate - 20.0 / 25.0) <= kIdentity,
           [&] { return "padding at n=25: source " + std::to_string(at25.sourceN); });
  const auto at20 = paddedStepAt(sparse, 20);
  s.expect(at20.discarded == 0 && at20.rate == 1.0, [] { return std::string("padding at defined n"); });
  const auto at5 = paddedStepAt(sparse, 5);
  s.expect(at5.sourceN == 0 && at5.rate == 0.0, [] { return std::string("padding below first n"); });
  const auto padded = discardPadding(sparse, 40);
  s.expect(padded.trace.size() == 40, [] { return std::string("padded trace length"); });
  return s.take();
}

struct SuiteEntry {
  std::string name;
  std::function<SuiteResult(const VerifyOptions&)> run;
};

const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> entries{
      {"linalg", [](const VerifyOptions& o) { return suiteLinalg(o.seed); }},
      {"states", [](const VerifyOptions& o) { return suiteStates(o.seed); }},
      {"protocol1", [](const VerifyOptions& o) { return suiteProtocol1(o.protocol1Perturbation); }},
      {"protocol2", [](const VerifyOptions&) { return suiteProtocol2(); }},
      {"twirl", [](const VerifyOptions& o) { return suiteTwirl(o.seed); }},
      {"lemma2", [](const VerifyOptions& o) { return suiteLemma2(o.seed); }},
      {"lemma1-chain", [](const VerifyOptions& o) { return suiteLemma1(o.seed); }},
      {"lemma3-identity", [](const VerifyOptions&) { return suiteLemma3(); }},
      {"operation-algebra", [](const VerifyOptions& o) { return suiteOperationAlgebra(o.seed); }},
      {"theorem2", [](const VerifyOptions&) { return suiteTheorem2(); }},
      {"theorem3", [](const VerifyOptions& o) { return suiteTheorem3(o.seed); }},
      {"definitions", [](const VerifyOptions& o) { return suiteDefinitions(o.seed); }},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& suiteNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.push_back(e.name);
    return out;
  }();
  return names;
}

std::vector<SuiteResult> runVerification(const VerifyOptions& options) {
  for (const auto& name : options.suites) {
    const auto& names = suiteNames();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("unknown suite '" + name + "'");
    }
  }
  std::vector<SuiteResult> out;
  for (const auto& e : registry()) {
    if (!options.suites.empty() &&
        std::find(options.suites.begin(), options.suites.end(), e.name) == options.suites.end()) {
      continue;
    }
    out.push_back(e.run(options));
  }
  return out;
}

std::string formatReport(const std::vector<SuiteResult>& results) {
  std::string out;
  std::size_t checks = 0, failures = 0;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %6zu checks %4zu failed  %s\n", r.name.c_str(), r.checks,
                  r.failures, r.passed() ? "PASS" : "FAIL");
    out += line;
    for (const auto& d : r.details) out += "    " + d + "\n";
    if (r.failures > r.details.size()) {
      out += "    ... " + std::to_string(r.failures - r.details.size()) + " more\n";
    }
    checks += r.checks;
    failures += r.failures;
  }
  out += "total " + std::to_string(checks) + " checks, " + std::to_string(failures) + " failed\n";
  return out;
}

}  // namespace distill
