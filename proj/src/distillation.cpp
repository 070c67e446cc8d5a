#include "distill/distillation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "distill/bounds.hpp"
#include "distill/errors.hpp"
#include "distill/kernels.hpp"

namespace distill {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

constexpr double kProbabilitySumTolerance = 1e-9;
constexpr double kConvergedTolerance = 1e-9;

std::string stepText(std::size_t i) { return "step " + std::to_string(i); }

double log2Dim(double K) { return std::log2(K); }

bool isIntegerValued(double x) { return std::isfinite(x) && std::floor(x) == x; }

// Parses the shortest round-trip decimal of x, so 0.99 becomes 99/100.
Rational toRational(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string text(buf, res.ptr);
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    exponent = std::stoi(text.substr(e + 1));
    text.resize(e);
  }
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.erase(0, 1);
  }
  if (auto dot = text.find('.'); dot != std::string::npos) {
    exponent -= static_cast<int>(text.size() - dot - 1);
    text.erase(dot, 1);
  }
  // a leading zero would make cpp_int read the digits as octal
  text.erase(0, std::min(text.find_first_not_of('0'), text.size() - 1));
  Rational r{BigInt(text)};
  const BigInt ten = 10;
  if (exponent > 0) r *= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(exponent)));
  if (exponent < 0) r /= Rational(boost::multiprecision::pow(ten, static_cast<unsigned>(-exponent)));
  return negative ? -r : r;
}

// exponent e with K = 2^e; K must be a power of two.
int exactLog2(double K) {
  int e = 0;
  std::frexp(K, &e);
  return e - 1;
}

double log2FloorPow2(double x) {
  if (x >= 52.0) return x;  // ⌊2^x⌋ and 2^x agree to double precision in log2
  const double v = std::floor(std::exp2(x));
  return v < 1.0 ? 0.0 : std::log2(v);
}

}  // namespace

bool isPowerOfTwo(double K) noexcept {
  if (!(K >= 1.0) || !std::isfinite(K)) return false;
  int e = 0;
  return std::frexp(K, &e) == 0.5;
}

ProtocolTrace::ProtocolTrace(std::vector<TraceStep> steps) : steps_(std::move(steps)) {
  std::int64_t prevN = 0;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& s = steps_[i];
    if (s.n < 1) throw DomainError(stepText(i) + ": n must be >= 1");
    if (s.n <= prevN) throw DomainError(stepText(i) + ": n must be strictly increasing");
    prevN = s.n;
    if (s.branches.empty()) throw DomainError(stepText(i) + ": no branches");
    double total = 0.0;
    for (std::size_t j = 0; j < s.branches.size(); ++j) {
      const auto& b = s.branches[j];
      const std::string where = stepText(i) + " branch " + std::to_string(j);
      if (!(b.p >= 0.0 && b.p <= 1.0)) throw DomainError(where + ": p outside [0, 1]");
      if (!(b.K >= 1.0) || !isIntegerValued(b.K)) throw DomainError(where + ": K must be a positive integer");
      if (!(b.F >= 0.0 && b.F <= 1.0)) throw DomainError(where + ": F outside [0, 1]");
      if (b.K == 1.0 && std::abs(b.F - 1.0) > 1e-12) throw DomainError(where + ": K = 1 forces F = 1");
      total += b.p;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
      throw DomainError(stepText(i) + ": branch probabilities sum to " + std::to_string(total));
    }
  }
}

bool ProtocolTrace::singleBranch() const noexcept {
  return std::all_of(steps_.begin(), steps_.end(),
                     [](const TraceStep& s) { return s.branches.size() == 1; });
}

bool tailConvergesToZero(const std::vector<double>& values) {
  if (values.empty()) return false;
  if (values.back() <= kConvergedTolerance) return true;
  if (values.size() < 2) return false;
  const std::size_t tail = std::max<std::size_t>(2, (values.size() + 1) / 2);
  const std::size_t begin = values.size() - tail;
  for (std::size_t i = begin + 1; i < values.size(); ++i)
    if (values[i] > values[i - 1] + 1e-15) return false;
  return values.back() < values[begin];
}

Def1Result def1Rate(const ProtocolTrace& trace) {
  Def1Result out;
  out.applicable = trace.singleBranch();
  if (!out.applicable || trace.empty()) return out;
  std::vector<double> deficits;
  for (const auto& s : trace.steps()) {
    const auto& b = s.branches.front();
    out.perStepRate.push_back(log2Dim(b.K) / static_cast<double>(s.n));
    deficits.push_back(1.0 - b.F);
  }
  if (out.perStepRate.size() >= 2) {
    out.lastStepDelta = out.perStepRate.back() - out.perStepRate[out.perStepRate.size() - 2];
  }
  out.fidelityConditionHolds = tailConvergesToZero(deficits);
  if (out.fidelityConditionHolds) out.rate = out.perStepRate.back();
  return out;
}

bool def1primeCheck(const ProtocolTrace& trace) {
  for (const auto& s : trace.steps())
    for (const auto& b : s.branches)
      if (!isPowerOfTwo(b.K)) return false;
  return true;
}

Def2PrimeResult def2primeEvaluate(const ProtocolTrace& trace) {
  Def2PrimeResult out;
  for (const auto& s : trace.steps()) {
    double rate = 0.0, residual = 0.0;
    for (const auto& b : s.branches) {
      rate += b.p * log2Dim(b.K);
      residual += b.p * (1.0 - b.F) * log2Dim(b.K);
    }
    out.perStepRate.push_back(rate / static_cast<double>(s.n));
    out.perStepResidual.push_back(residual / static_cast<double>(s.n));
  }
  if (!trace.empty()) {
    out.rate = out.perStepRate.back();
    out.residual = out.perStepResidual.back();
  }
  out.conditionHolds = tailConvergesToZero(out.perStepResidual);
  return out;
}

Def2Result def2Evaluate(const ProtocolTrace& trace) {
  Def2Result out;
  for (const auto& s : trace.steps()) {
    double lo = 0.0, hi = 0.0;
    for (const auto& b : s.branches) {
      lo += b.p * efLowerBound(b.K, b.F);
      hi += b.p * efUpperBound(b.K, b.F);
    }
    out.perStepLower.push_back(lo / static_cast<double>(s.n));
    out.perStepUpper.push_back(hi / static_cast<double>(s.n));
  }
  if (!trace.empty()) {
    out.lower = out.perStepLower.back();
    out.upper = out.perStepUpper.back();
  }
  return out;
}

InfFidelityResult infFidelityCheck(const ProtocolTrace& trace) {
  InfFidelityResult out;
  std::vector<double> deficits;
  for (const auto& s : trace.steps()) {
    double lo = 1.0;
    for (const auto& b : s.branches) lo = std::min(lo, b.F);
    out.perStepMin.push_back(lo);
    deficits.push_back(1.0 - lo);
  }
  if (!trace.empty()) out.last = out.perStepMin.back();
  out.conditionHolds = tailConvergesToZero(deficits);
  return out;
}

RateReport rateReport(const ProtocolTrace& trace) {
  RateReport r;
  const auto d1 = def1Rate(trace);
  r.def1Applicable = d1.applicable;
  r.def1FidelityCondition = d1.fidelityConditionHolds;
  r.def1Rate = d1.rate;
  r.def1Prime = d1.applicable && def1primeCheck(trace);
  const auto d2 = def2Evaluate(trace);
  r.def2Lower = d2.lower;
  r.def2Upper = d2.upper;
  const auto d2p = def2primeEvaluate(trace);
  r.def2primeRate = d2p.rate;
  r.def2primeResidual = d2p.residual;
  r.def2primeCondition = d2p.conditionHolds;
  const auto inf = infFidelityCheck(trace);
  r.infFidelity = inf.last;
  r.infFidelityCondition = inf.conditionHolds;
  return r;
}

double powerOfTwoBelowRatio(double K, std::int64_t n) {
  if (n < 1) throw DomainError("powerOfTwoBelowRatio: n must be >= 1");
  const double nd = static_cast<double>(n);
  if (K < 2.0 * nd) return 1.0;
  // largest j with n·2^j < K, compared exactly via ldexp
  int j = static_cast<int>(std::floor(std::log2(K) - std::log2(nd)));
  while (j > 0 && std::ldexp(nd, j) >= K) --j;
  while (std::ldexp(nd, j + 1) < K) ++j;
  return std::ldexp(1.0, j);
}

Theorem2Result theorem2Transform(const ProtocolTrace& trace) {
  if (!trace.singleBranch()) throw PreconditionError("theorem2Transform: trace has measuring steps");
  Theorem2Result out;
  std::vector<TraceStep> steps;
  for (const auto& s : trace.steps()) {
    const auto& b = s.branches.front();
    Theorem2Step t;
    t.n = s.n;
    t.K = b.K;
    t.F = b.F;
    t.Kprime = powerOfTwoBelowRatio(b.K, s.n);
    t.ratio = t.Kprime / b.K;
    t.fidelityLowerBound = t.Kprime == 1.0 ? 1.0 : (1.0 - t.ratio) * b.F;
    t.rate = log2Dim(b.K) / static_cast<double>(s.n);
    t.ratePrime = log2Dim(t.Kprime) / static_cast<double>(s.n);
    steps.push_back(TraceStep{s.n, {BranchOutcome{1.0, t.Kprime, t.fidelityLowerBound}}});
    out.steps.push_back(t);
  }
  out.transformed = ProtocolTrace(std::move(steps));
  if (!out.steps.empty()) {
    out.finalRateGap = out.steps.back().rate - out.steps.back().ratePrime;
    out.finalRatio = out.steps.back().ratio;
  }
  return out;
}

ProtocolTrace normalizeToPowersOfTwo(const ProtocolTrace& trace) {
  std::vector<TraceStep> steps;
  for (const auto& s : trace.steps()) {
    TraceStep t{s.n, {}};
    for (const auto& b : s.branches) {
      if (isPowerOfTwo(b.K)) {
        t.branches.push_back(b);
        continue;
      }
      const double kp = powerOfTwoBelowRatio(b.K, s.n);
      const double f = kp == 1.0 ? 1.0 : (1.0 - kp / b.K) * b.F;
      t.branches.push_back(BranchOutcome{b.p, kp, f});
    }
    steps.push_back(std::move(t));
  }
  return ProtocolTrace(std::move(steps));
}

std::string exactRateBound(const TraceStep& step) {
  Rational sum = 0;
  for (const auto& b : step.branches) {
    if (!isPowerOfTwo(b.K)) return {};
    sum += toRational(b.p) * (2 * toRational(b.F) - 1) * exactLog2(b.K);
  }
  const Rational bound = (sum - 1) / Rational(BigInt(step.n));
  return bound.str();
}

Theorem3Result theorem3Compile(const ProtocolTrace& trace, const CompilerConfig& cfg) {
  if (!(cfg.pSlack > 0.0 && cfg.pSlack < 1.0)) throw ConfigError("pSlack must lie in (0, 1) so that p' < p");
  if (!(cfg.rateSlack > 0.0 && cfg.rateSlack < 1.0)) {
    throw ConfigError("rateSlack must lie in (0, 1) so that R' < (2F-1)log2K - 1");
  }
  if (cfg.k < 1) throw ConfigError("tensor power k must be >= 1");
  if (!def1primeCheck(trace)) {
    throw PreconditionError("theorem3Compile: every branch dimension must be a power of two");
  }

  Theorem3Result out;
  for (const auto& s : trace.steps()) {
    CompiledStep c;
    c.n = s.n;
    c.k = cfg.k;
    c.inputCopies = s.n * cfg.k;
    const double nd = static_cast<double>(s.n);
    std::vector<double> probs;
    std::vector<int> thresholds;
    double rawBound = 0.0;
    for (const auto& b : s.branches) {
      CompiledBranch cb;
      cb.p = b.p;
      cb.pPrime = (1.0 - cfg.pSlack) * b.p;
      cb.cap = (2.0 * b.F - 1.0) * log2Dim(b.K) - 1.0;
      cb.rPrime = cb.cap > 0.0 ? (1.0 - cfg.rateSlack) * cb.cap : 0.0;
      cb.threshold = static_cast<int>(std::floor(cb.pPrime * cfg.k + 1e-9));
      cb.log2Factor = cb.rPrime > 0.0 ? log2FloorPow2(cb.rPrime * cb.pPrime * cfg.k) : 0.0;
      c.log2OutputDim += cb.log2Factor;
      c.targetRate += cb.rPrime * cb.pPrime / nd;
      c.limitingRate += b.p * std::max(cb.cap, 0.0) / nd;
      rawBound += b.p * (2.0 * b.F - 1.0) * log2Dim(b.K);
      probs.push_back(b.p);
      thresholds.push_back(cb.threshold);
      c.branches.push_back(cb);
    }
    c.rateBound = rawBound / nd - 1.0 / nd;
    c.rateBoundExact = exactRateBound(s);
    c.achievedRate = c.log2OutputDim / static_cast<double>(c.inputCopies);

    if (cfg.k <= cfg.exactLimit) {
      c.tailMethod = TailMethod::Exact;
      c.failureProb = kernels::multinomialShortfall(cfg.k, probs, thresholds);
    } else {
      c.tailMethod = TailMethod::Hoeffding;
      double sum = 0.0;
      for (const auto& cb : c.branches) {
        if (cb.threshold == 0) continue;
        const double gap = cb.p - static_cast<double>(cb.threshold) / cfg.k;
        sum += std::exp(-2.0 * cfg.k * gap * gap);
      }
      c.failureProb = std::min(1.0, sum);
    }
    const double failureFidelity = std::exp2(-2.0 * c.log2OutputDim);
    c.fidelity = (1.0 - c.failureProb) + c.failureProb * failureFidelity;
    out.steps.push_back(std::move(c));
  }
  return out;
}

PaddingStep paddedStepAt(const ProtocolTrace& trace, std::int64_t n) {
  if (n < 1) throw DomainError("paddedStepAt: n must be >= 1");
  PaddingStep out{n, 0, n, 0.0, 0.0};
  for (const auto& s : trace.steps()) {
    if (s.n > n) break;
    double rate = 0.0;
    for (const auto& b : s.branches) rate += b.p * log2Dim(b.K);
    out.sourceN = s.n;
    out.discarded = n - s.n;
    out.sourceRate = rate / static_cast<double>(s.n);
  }
  out.rate = out.sourceRate * static_cast<double>(out.sourceN) / static_cast<double>(n);
  return out;
}

PaddedTrace discardPadding(const ProtocolTrace& trace, std::int64_t maxN) {
  if (maxN < 1) throw DomainError("discardPadding: maxN must be >= 1");
  PaddedTrace out;
  std::vector<TraceStep> steps;
  for (std::int64_t n = 1; n <= maxN; ++n) {
    const auto p = paddedStepAt(trace, n);
    TraceStep t{n, {BranchOutcome{1.0, 1.0, 1.0}}};
    if (p.sourceN > 0) {
      const auto it = std::find_if(trace.steps().begin(), trace.steps().end(),
                                   [&](const TraceStep& s) { return s.n == p.sourceN; });
      t.branches = it->branches;
    }
    steps.push_back(std::move(t));
    out.steps.push_back(p);
  }
  out.trace = ProtocolTrace(std::move(steps));
  return out;
}

}  // namespace distill
