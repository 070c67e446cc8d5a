// Acceptance criteria AC1-AC10. One PASS/FAIL line per criterion; exit 1 if
// any fails.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "distill/bounds.hpp"
#include "distill/distillation.hpp"
#include "distill/kernels.hpp"
#include "distill/operations.hpp"
#include "distill/protocols.hpp"
#include "distill/random.hpp"
#include "distill/states.hpp"
#include "distill/verify.hpp"
#include "support/oracles.hpp"

using namespace distill;

namespace {

struct Outcome {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

double fidelityAfter(const QuantumOperation& op, const DensityOperator& rho) {
  const auto out = apply(op, rho);
  return out.size() == 1 && out[0].state ? fidelity(*out[0].state) : -1.0;
}

std::vector<double> fGrid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

Outcome ac1() {
  Outcome o;
  double worst = 0.0;
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      const auto op = protocol1Op(K, Kp);
      for (double F : fGrid()) {
        const double d = std::abs(fidelityAfter(op, isotropicState(K, F)) - protocol1Fidelity(K, Kp, F));
        worst = std::max(worst, d);
        o.require(d <= 1e-9, "K=" + std::to_string(K) + " K'=" + std::to_string(Kp) + " F=" + num(F) +
                                 " off by " + num(d));
      }
    }
  const double spot = protocol1Fidelity(4, 2, 1.0);
  o.require(std::abs(spot - 0.625) <= 1e-15, "protocol1Fidelity(4,2,1) = " + num(spot));
  if (o.pass) o.note = "max deviation " + num(worst) + ", spot 0.625";
  return o;
}

Outcome ac2() {
  Outcome o;
  double worst = 0.0;
  for (int K = 2; K <= 9; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      if (K % Kp) continue;
      const auto op = protocol2Op(K, Kp);
      const double K2 = K * K, Kp2 = Kp * Kp;
      for (double f : fGrid()) {
        const double expected = f + (1 - f) * (K2 - Kp2) / ((K2 - 1) * Kp2);
        const double d = std::abs(fidelityAfter(op, isotropicState(K, f)) - expected);
        worst = std::max(worst, d);
        o.require(d <= 1e-9, "K=" + std::to_string(K) + " K'=" + std::to_string(Kp) + " f=" + num(f) +
                                 " off by " + num(d));
      }
      o.require(protocol2Fidelity(K, Kp, 1.0) == 1.0, "fidelity-1 fixed point");
      const auto mixed = apply(op, DensityOperator::maximallyMixed({K, K}));
      const ComplexMatrix target = ComplexMatrix::Identity(Kp * Kp, Kp * Kp) / Kp2;
      o.require(maxAbsDifference(mixed[0].state->matrix(), target) <= 1e-15,
                "random-state fixed point K=" + std::to_string(K));
      o.require(std::abs(protocol2Fidelity(K, Kp, 1.0 / K2) - 1.0 / Kp2) <= 1e-15,
                "closed form at F=1/K^2, K=" + std::to_string(K));
    }
  if (o.pass) o.note = "max deviation " + num(worst);
  return o;
}

Outcome ac3() {
  Outcome o;
  Rng rng = streamRng(7, 301);
  for (int K = 2; K <= 4; ++K) {
    const auto rho = randomDensity({K, K}, rng);
    const auto tw = exactTwirl(rho);
    o.require(std::abs(fidelity(tw) - fidelity(rho)) <= 1e-12, "fidelity not preserved at K=" + std::to_string(K));
    for (int c = 0; c < 100; ++c) {
      const auto u = haarUnitary(K, rng);
      const ComplexMatrix w = oracle::kron(u, u.conjugate());
      o.require(maxAbsDifference(w * tw.matrix() * w.adjoint(), tw.matrix()) <= 1e-9,
                "twirl output not U⊗Ū-invariant at K=" + std::to_string(K));
    }
  }
  double worst = 0.0;
  for (int K : {2, 3}) {
    const auto rho = randomDensity({K, K}, rng);
    const double d = maxAbsDifference(monteCarloTwirl(rho, 10000, 7), exactTwirl(rho).matrix());
    worst = std::max(worst, d);
    o.require(d <= 1e-2, "Monte Carlo deviation " + num(d) + " at K=" + std::to_string(K));
  }
  if (o.pass) o.note = "Monte Carlo max deviation " + num(worst);
  return o;
}

Outcome ac4() {
  Outcome o;
  int violations = 0, cases = 0;
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp < K; ++Kp)
      for (double F : fGrid()) {
        ++cases;
        const double sim = fidelity(reduceDimension(K, Kp, isotropicState(K, F)));
        const double fine = static_cast<double>(Kp) / K * (K / Kp) * F;
        const double coarse = static_cast<double>(std::max(K - Kp, Kp)) / K * F;
        if (!(sim >= fine - 1e-12 && fine >= coarse - 1e-15)) {
          ++violations;
          o.require(false, "K=" + std::to_string(K) + " K'=" + std::to_string(Kp) + " F=" + num(F) +
                               ": " + num(sim) + " vs " + num(fine) + " vs " + num(coarse));
        }
      }
  o.note = std::to_string(violations) + " violations in " + std::to_string(cases) + " cases" +
           (o.pass ? "" : "; first " + o.note);
  return o;
}

Outcome ac5() {
  Outcome o;
  for (int K = 2; K <= 8; ++K)
    for (int i = 0; i <= 20; ++i) {
      const double F = i / 20.0;
      const double gap = pptBoundIsotropic(K, F) - (F * std::log2(K) - binaryEntropy(F));
      o.require(std::abs(gap - (1 - F) * std::log2(K / (K - 1.0))) <= 1e-12,
                "PPT identity K=" + std::to_string(K) + " F=" + num(F));
      const auto b = efBoundsIsotropic(K, F);
      o.require(b.lower <= b.upper, "ef lower > upper at K=" + std::to_string(K) + " F=" + num(F));
    }
  EfEstimateOptions opt;
  opt.seed = 7;
  std::string estimates;
  for (double F : {0.5, 0.7, 0.9, 1.0}) {
    const auto b = efBoundsIsotropic(2, F);
    const double est = efNumericEstimate(isotropicState(2, F), opt);
    estimates += (estimates.empty() ? "" : " ") + num(est);
    o.require(est >= b.lower - 1e-6 && est <= b.upper + 1e-4,
              "E_f estimate " + num(est) + " outside [" + num(b.lower) + ", " + num(b.upper) + "] at F=" + num(F));
  }
  if (o.pass) o.note = "E_f estimates " + estimates;
  return o;
}

Outcome ac6() {
  Outcome o;
  double worst = 0.0;
  for (int K : {2, 4, 8, 16}) {
    const oracle::Dec50 k = K, k2 = k * k;
    for (int i = 1; i < 100; ++i) {
      const oracle::Dec50 F = oracle::Dec50(i) / 100;
      const oracle::Dec50 identity = (2 * F - 1) * oracle::log2(k) - oracle::binaryEntropy(F) +
                                     (1 - F) * oracle::log2(k2 / (k2 - 1));
      const double d = std::abs(hashingRate(K, i / 100.0).raw - static_cast<double>(identity));
      worst = std::max(worst, d);
      o.require(d <= 1e-12, "K=" + std::to_string(K) + " F=" + num(i / 100.0) + " off by " + num(d));
    }
    o.require(hashingRate(K, 1.0).raw == std::log2(static_cast<double>(K)), "hashingRate(K,1) != log2 K");
  }
  if (o.pass) o.note = "max deviation " + num(worst);
  return o;
}

Outcome ac7() {
  Outcome o;
  VerifyOptions opt;
  opt.suites = {"operation-algebra"};
  const auto r = runVerification(opt).front();
  o.require(r.passed(), "operation-algebra suite: " + (r.details.empty() ? std::string() : r.details.front()));

  const auto creation = replaceWithState({2, 2}, phiPlusState(2));
  const double choiMin = pptChoiMinEigenvalue(creation);
  o.require(choiMin <= -0.5 + 1e-9 && !isPptOperation(creation),
            "Φ⁺ creation PPT Choi minimum " + num(choiMin));
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      const auto p1 = protocol1Op(K, Kp, BranchMode::KeepBranches);
      o.require(p1.witness() && verifySeparableForm(p1, *p1.witness()) && isPptOperation(p1),
                "protocol 1 K=" + std::to_string(K) + " K'=" + std::to_string(Kp));
      if (K % Kp == 0) {
        const auto p2 = protocol2Op(K, Kp);
        o.require(isVerifiablySeparable(p2) && isPptOperation(p2),
                  "protocol 2 K=" + std::to_string(K) + " K'=" + std::to_string(Kp));
      }
    }
  if (o.pass) o.note = std::to_string(r.checks) + " algebra checks, creation Choi minimum " + num(choiMin);
  return o;
}

Outcome ac8() {
  Outcome o;
  std::vector<TraceStep> steps;
  for (int i = 1; i <= 40; ++i) steps.push_back({i, {{1.0, std::ldexp(1.0, 3 * i), 1.0 - 1.0 / i}}});
  const ProtocolTrace trace(std::move(steps));
  const auto t = theorem2Transform(trace);

  bool powers = def1primeCheck(t.transformed);
  for (const auto& s : t.steps) powers = powers && isPowerOfTwo(s.Kprime);
  o.require(powers, "transformed dimensions are not all powers of 2");

  std::vector<double> ratios;
  for (const auto& s : t.steps) ratios.push_back(s.ratio);
  bool monotone = true;
  for (std::size_t i = 4; i < ratios.size(); ++i) monotone = monotone && ratios[i] <= ratios[i - 1];
  o.require(monotone && tailConvergesToZero(ratios), "K'/K not monotonically vanishing beyond i = 4");

  const auto before = def1Rate(trace);
  const auto after = def1Rate(t.transformed);
  const double rate = after.rate.value_or(std::nan(""));
  o.require(before.rate && std::abs(*before.rate - 3.0) <= 1e-6, "source trace rate is not 3");
  o.require(after.rate && std::abs(rate - 3.0) <= 1e-6,
            "transformed def-1 rate at i = 40 is " + num(rate) + ", |rate - 3| = " + num(std::abs(rate - 3.0)) +
                " > 1e-6 (K'_40 = 2^" + num(std::log2(t.steps.back().Kprime)) + ")");

  const auto worked = theorem2Transform(ProtocolTrace({{10, {{1.0, std::ldexp(1.0, 30), 0.99}}}}));
  o.require(worked.steps[0].Kprime == std::ldexp(1.0, 26) &&
                std::abs(worked.steps[0].fidelityLowerBound - 0.928125) <= 1e-15,
            "worked value n=10, K=2^30");
  if (o.pass) o.note = "rate " + num(rate);
  return o;
}

Outcome ac9() {
  Outcome o;
  const ProtocolTrace fixture({{10, {{0.5, 1024.0, 0.99}, {0.5, 1.0, 1.0}}}});
  CompilerConfig cfg;
  cfg.pSlack = 0.1;
  cfg.rateSlack = 0.01;
  cfg.k = 10000;
  const auto big = theorem3Compile(fixture, cfg).steps.front();
  o.require(big.rateBoundExact == "39/100" && big.rateBound == 0.39,
            "rateBound " + big.rateBoundExact + " / " + num(big.rateBound));
  const double target = (0.45 * 0.99 * (0.98 * 10 - 1)) / 10;
  o.require(std::abs(big.targetRate - target) <= 1e-12, "target rate " + num(big.targetRate) + " vs " + num(target));
  o.require(std::abs(big.achievedRate - target) <= 1e-3,
            "achieved rate " + num(big.achievedRate) + " vs " + num(target) + " at k = 10^4");

  double previous = 2.0;
  std::string tails;
  for (int k : {10, 100, 1000}) {
    cfg.k = k;
    const auto s = theorem3Compile(fixture, cfg).steps.front();
    const int t = static_cast<int>(std::floor(0.45 * k));
    const double exact = oracle::toDouble(oracle::twoOutcomeShortfall(k, t, t, 1, 2));
    o.require(s.tailMethod == TailMethod::Exact && std::abs(s.failureProb - exact) <= 1e-12 * std::max(1.0, exact) + 1e-300,
              "failure probability at k=" + std::to_string(k) + ": " + num(s.failureProb) + " vs " + num(exact));
    o.require(s.failureProb < previous, "failure probability not decreasing at k=" + std::to_string(k));
    previous = s.failureProb;
    tails += (tails.empty() ? "" : " ") + num(s.failureProb);
  }
  if (o.pass) o.note = "rateBound 39/100, achieved " + num(big.achievedRate) + ", tails " + tails;
  return o;
}

std::pair<int, std::string> runCommand(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome ac10() {
  Outcome o;
  const std::string cmd = std::string("\"") + DISTILL_CLI_PATH + "\" verify --seed 7";
  const auto first = runCommand(cmd);
  const auto second = runCommand(cmd);
  o.require(first.first == 0 && second.first == 0,
            "exit codes " + std::to_string(first.first) + ", " + std::to_string(second.first));
  o.require(!first.second.empty() && first.second == second.second, "reports differ");
  if (o.pass) o.note = std::to_string(first.second.size()) + " identical bytes, exit 0";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limitSeconds;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", 10, ac1},  {"AC2", 10, ac2}, {"AC3", 60, ac3}, {"AC4", 0, ac4},  {"AC5", 120, ac5},
      {"AC6", 0, ac6},   {"AC7", 0, ac7},  {"AC8", 0, ac8},  {"AC9", 60, ac9}, {"AC10", 0, ac10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limitSeconds > 0 && secs >= c.limitSeconds) {
      o.pass = false;
      o.note += "; runtime " + num(secs) + " s over " + num(c.limitSeconds) + " s";
    }
    std::printf("%-5s %s  %s (%.2f s)\n", c.name, o.pass ? "PASS" : "FAIL", o.note.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
