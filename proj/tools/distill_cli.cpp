// distill: bound grids, protocol simulation against closed forms, operation
// classification, trace rate accounting, trace compilation and the
// invariant suite.
//
// Exit status: 0 success, 1 verification failure, 2 input error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "distill/bounds.hpp"
#include "distill/distillation.hpp"
#include "distill/errors.hpp"
#include "distill/io.hpp"
#include "distill/protocols.hpp"
#include "distill/states.hpp"
#include "distill/verify.hpp"

namespace {

using distill::io::OrderedJson;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  std::string emit = "csv";
  int precision = 12;

  [[nodiscard]] bool json() const { return emit == "json"; }
  [[nodiscard]] std::string num(double x) const { return distill::io::formatNumber(x, precision); }
  [[nodiscard]] OrderedJson jnum(double x) const {
    if (!std::isfinite(x)) return nullptr;
    return distill::io::rounded(x, precision);
  }
};

void addOutputOptions(CLI::App* cmd, Output& out, const std::string& defaultEmit) {
  out.emit = defaultEmit;
  cmd->add_option("--emit", out.emit, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--precision", out.precision, "Significant digits in printed numbers")
      ->check(CLI::Range(1, 17))
      ->capture_default_str();
}

std::string csvRow(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

const char* boolText(bool b) { return b ? "true" : "false"; }

// start:stop:step, inclusive of stop when it lies on the grid.
std::vector<double> parseGrid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad grid '" + spec + "': '" + item + "' is not a number");
    }
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw InputError("bad grid '" + spec + "': expected start:stop:step");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start) {
    throw InputError("bad grid '" + spec + "': need step > 0 and stop >= start");
  }
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1000000) throw InputError("bad grid '" + spec + "': too many points");
  std::vector<double> grid;
  for (long i = 0; i < count; ++i) {
    double x = start + static_cast<double>(i) * step;
    // snap accumulated representation error, e.g. 0.30000000000000004 -> 0.3
    x = distill::io::rounded(x, 15);
    grid.push_back(std::min(x, stop));
  }
  return grid;
}

std::vector<double> fidelityGrid(const std::string& spec) {
  auto grid = parseGrid(spec);
  for (double F : grid)
    if (F < 0.0 || F > 1.0) throw InputError("fidelity " + std::to_string(F) + " outside [0, 1]");
  return grid;
}

// bounds ---------------------------------------------------------------

struct BoundsArgs {
  std::vector<int> Ks{2};
  std::string grid = "0:1:0.1";
  Output out;
};

int runBounds(const BoundsArgs& a) {
  const auto grid = fidelityGrid(a.grid);
  OrderedJson rows = OrderedJson::array();
  if (!a.out.json()) {
    std::cout << "K,F,ef_lower,ef_upper,ppt_bound,hashing_raw,hashing_clamped\n";
  }
  for (int K : a.Ks) {
    if (K < 2) throw InputError("--K-list entries must be >= 2, got " + std::to_string(K));
    for (double F : grid) {
      const auto ef = distill::efBoundsIsotropic(K, F);
      const auto h = distill::hashingRate(K, F);
      if (a.out.json()) {
        OrderedJson r;
        r["K"] = K;
        r["F"] = a.out.jnum(F);
        r["ef_lower"] = a.out.jnum(ef.lower);
        r["ef_upper"] = a.out.jnum(ef.upper);
        r["ppt_bound"] = a.out.jnum(ef.pptBound);
        r["hashing_raw"] = a.out.jnum(h.raw);
        r["hashing_clamped"] = a.out.jnum(h.clamped);
        r["hashing_power_of_two"] = h.powerOfTwo;
        rows.push_back(std::move(r));
      } else {
        std::cout << csvRow({std::to_string(K), a.out.num(F), a.out.num(ef.lower), a.out.num(ef.upper),
                             a.out.num(ef.pptBound), a.out.num(h.raw), a.out.num(h.clamped)});
      }
    }
  }
  if (a.out.json()) std::cout << OrderedJson{{"rows", rows}}.dump(2) << '\n';
  return kExitOk;
}

// simulate -------------------------------------------------------------

struct SimulateArgs {
  int K = 4;
  int Kprime = 2;
  std::string grid = "0:1:0.1";
  std::string protocol = "1";
  std::size_t samples = 10000;
  std::uint64_t seed = 7;
  Output out;
};

struct SimRow {
  double closed = 0.0;
  double simulated = 0.0;
  double bound = 0.0;
  bool pass = false;
};

constexpr double kSimTolerance = 1e-9;

// A non-isotropic state with fidelity F: F·Φ⁺ + (1-F)·|0,1⟩⟨0,1|.
distill::DensityOperator skewedState(int K, double F) {
  distill::ComplexMatrix m = F * distill::phiPlusProjector(K);
  m(1, 1) += 1.0 - F;
  return distill::DensityOperator(m, distill::BipartiteLabel{K, K});
}

SimRow simulateOne(const SimulateArgs& a, double F) {
  using namespace distill;
  SimRow r;
  if (a.protocol == "1") {
    r.closed = protocol1Fidelity(a.K, a.Kprime, F);
    r.simulated = fidelity(*apply(protocol1Op(a.K, a.Kprime), isotropicState(a.K, F)).front().state);
    r.bound = static_cast<double>(a.Kprime) / a.K * F;
  } else if (a.protocol == "2") {
    r.closed = protocol2Fidelity(a.K, a.Kprime, F);
    r.simulated = fidelity(*apply(protocol2Op(a.K, a.Kprime), isotropicState(a.K, F)).front().state);
    r.bound = F;
  } else if (a.protocol == "reduce") {
    r.closed = reduceDimension(a.K, a.Kprime, F);
    r.simulated = fidelity(reduceDimension(a.K, a.Kprime, isotropicState(a.K, F)));
    r.bound = reductionBound(a.K, a.Kprime, F);
  } else {
    const auto rho = skewedState(a.K, F);
    r.closed = fidelity(exactTwirl(rho));
    const ComplexMatrix mc = monteCarloTwirl(rho, a.samples, a.seed);
    r.simulated = fidelity(DensityOperator((mc + mc.adjoint()) * 0.5, BipartiteLabel{a.K, a.K}));
    r.bound = F;
  }
  r.pass = std::abs(r.simulated - r.closed) <= kSimTolerance && r.closed >= r.bound - kSimTolerance;
  return r;
}

int runSimulate(const SimulateArgs& a) {
  if (a.K < 2) throw InputError("--K must be >= 2");
  if (a.protocol != "twirl" && (a.Kprime < 1 || a.Kprime > a.K)) {
    throw InputError("--Kprime must satisfy 1 <= K' <= K");
  }
  if (a.protocol == "2" && a.K % a.Kprime != 0) throw InputError("protocol 2 needs K' to divide K");
  if (a.protocol == "reduce" && a.Kprime >= a.K) throw InputError("reduce needs K' < K");
  const auto grid = fidelityGrid(a.grid);
  const int kp = a.protocol == "twirl" ? a.K : a.Kprime;

  bool allPass = true;
  OrderedJson rows = OrderedJson::array();
  if (!a.out.json()) std::cout << "K,Kprime,F_in,F_closed_form,F_simulated,bound,pass\n";
  for (double F : grid) {
    const auto r = simulateOne(a, F);
    allPass = allPass && r.pass;
    if (a.out.json()) {
      OrderedJson j;
      j["K"] = a.K;
      j["Kprime"] = kp;
      j["F_in"] = a.out.jnum(F);
      j["F_closed_form"] = a.out.jnum(r.closed);
      j["F_simulated"] = a.out.jnum(r.simulated);
      j["bound"] = a.out.jnum(r.bound);
      j["pass"] = r.pass;
      rows.push_back(std::move(j));
    } else {
      std::cout << csvRow({std::to_string(a.K), std::to_string(kp), a.out.num(F), a.out.num(r.closed),
                           a.out.num(r.simulated), a.out.num(r.bound), boolText(r.pass)});
    }
  }
  if (a.out.json()) {
    std::cout << OrderedJson{{"protocol", a.protocol}, {"rows", rows}, {"pass", allPass}}.dump(2) << '\n';
  }
  return allPass ? kExitOk : kExitFailed;
}

// classify -------------------------------------------------------------

struct ClassifyArgs {
  std::string path;
  Output out;
};

int runClassify(const ClassifyArgs& a) {
  using namespace distill;
  const auto desc = io::operationFromJson(io::readJsonFile(a.path));
  const auto& op = desc.op;

  bool cp = true;
  for (const auto& sub : op.subops()) cp = cp && isCompletelyPositive(sub, op.input());
  const bool tp = isTracePreserving(op);
  const double pptMin = pptChoiMinEigenvalue(op);
  const bool ppt = pptMin >= -kChoiTolerance;
  bool separable = false;
  std::string witnessSource = "none";
  if (desc.witness) {
    try {
      separable = verifySeparableForm(op, *desc.witness);
    } catch (const DimensionError& e) {
      throw io::SchemaError(std::string("witness: ") + e.what());
    }
    witnessSource = "given";
  } else if (const auto w = factorProductKraus(op)) {
    separable = verifySeparableForm(op, *w);
    witnessSource = "factored";
  }
  const char* cls = separable ? "separable" : ppt ? "ppt" : "unclassified";

  if (a.out.json()) {
    OrderedJson j;
    j["tp"] = tp;
    j["cp"] = cp;
    j["ppt"] = ppt;
    j["separable_verified"] = separable;
    j["class"] = cls;
    j["witness"] = witnessSource;
    j["branches"] = op.branchCount();
    j["ppt_choi_min_eigenvalue"] = a.out.jnum(pptMin);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "tp,cp,ppt,separable_verified,class,witness,branches,ppt_choi_min_eigenvalue\n"
              << csvRow({boolText(tp), boolText(cp), boolText(ppt), boolText(separable), cls,
                         witnessSource, std::to_string(op.branchCount()), a.out.num(pptMin)});
  }
  return kExitOk;
}

// rates ----------------------------------------------------------------

struct TraceArgs {
  std::string path;
  Output out;
};

int runRates(const TraceArgs& a) {
  using namespace distill;
  const auto trace = io::traceFromJson(io::readJsonFile(a.path));
  const auto report = rateReport(trace);
  const auto d1 = def1Rate(trace);
  const auto d2 = def2Evaluate(trace);
  const auto d2p = def2primeEvaluate(trace);
  const auto inf = infFidelityCheck(trace);
  const auto& o = a.out;

  if (o.json()) {
    OrderedJson j;
    j["def1_applicable"] = report.def1Applicable;
    j["def1_fidelity_condition"] = report.def1FidelityCondition;
    j["def1_rate"] = report.def1Rate ? o.jnum(*report.def1Rate) : OrderedJson(nullptr);
    j["def1_last_step_delta"] = o.jnum(d1.lastStepDelta);
    j["def1prime"] = report.def1Prime;
    j["def2_lower"] = o.jnum(report.def2Lower);
    j["def2_upper"] = o.jnum(report.def2Upper);
    j["def2prime_rate"] = o.jnum(report.def2primeRate);
    j["def2prime_residual"] = o.jnum(report.def2primeResidual);
    j["def2prime_condition"] = report.def2primeCondition;
    j["inf_fidelity"] = o.jnum(report.infFidelity);
    j["inf_fidelity_condition"] = report.infFidelityCondition;
    OrderedJson steps = OrderedJson::array();
    for (std::size_t i = 0; i < trace.size(); ++i) {
      OrderedJson s;
      s["n"] = trace.steps()[i].n;
      s["def1_rate"] = d1.applicable ? o.jnum(d1.perStepRate[i]) : OrderedJson(nullptr);
      s["def2_lower"] = o.jnum(d2.perStepLower[i]);
      s["def2_upper"] = o.jnum(d2.perStepUpper[i]);
      s["def2prime_rate"] = o.jnum(d2p.perStepRate[i]);
      s["def2prime_residual"] = o.jnum(d2p.perStepResidual[i]);
      s["inf_fidelity"] = o.jnum(inf.perStepMin[i]);
      steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "n,def1_rate,def2_lower,def2_upper,def2prime_rate,def2prime_residual,inf_fidelity\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
      std::cout << csvRow({std::to_string(trace.steps()[i].n),
                           d1.applicable ? o.num(d1.perStepRate[i]) : "",
                           o.num(d2.perStepLower[i]), o.num(d2.perStepUpper[i]),
                           o.num(d2p.perStepRate[i]), o.num(d2p.perStepResidual[i]),
                           o.num(inf.perStepMin[i])});
    }
  }
  return kExitOk;
}

// compile --------------------------------------------------------------

struct CompileArgs {
  std::string path;
  double pSlack = 0.1;
  double rateSlack = 0.01;
  std::vector<int> ks{1000};
  int exactLimit = 4096;
  Output out;
};

int runCompile(const CompileArgs& a) {
  using namespace distill;
  const auto raw = io::traceFromJson(io::readJsonFile(a.path));
  const bool normalized = !def1primeCheck(raw);
  const auto trace = normalized ? normalizeToPowersOfTwo(raw) : raw;
  const auto& o = a.out;

  OrderedJson runs = OrderedJson::array();
  if (!o.json()) {
    std::cout << "k,n,input_copies,log2_output_dim,achieved_rate,target_rate,failure_prob,tail,"
                 "fidelity,rate_bound,rate_bound_exact,limiting_rate\n";
  }
  for (int k : a.ks) {
    CompilerConfig cfg;
    cfg.pSlack = a.pSlack;
    cfg.rateSlack = a.rateSlack;
    cfg.k = k;
    cfg.exactLimit = a.exactLimit;
    const auto result = theorem3Compile(trace, cfg);
    OrderedJson steps = OrderedJson::array();
    for (const auto& st : result.steps) {
      const char* tail = st.tailMethod == TailMethod::Exact ? "exact" : "hoeffding";
      if (o.json()) {
        OrderedJson s;
        s["n"] = st.n;
        s["input_copies"] = st.inputCopies;
        s["log2_output_dim"] = o.jnum(st.log2OutputDim);
        s["achieved_rate"] = o.jnum(st.achievedRate);
        s["target_rate"] = o.jnum(st.targetRate);
        s["failure_prob"] = o.jnum(st.failureProb);
        s["tail"] = tail;
        s["fidelity"] = o.jnum(st.fidelity);
        s["rate_bound"] = o.jnum(st.rateBound);
        s["rate_bound_exact"] = st.rateBoundExact;
        s["limiting_rate"] = o.jnum(st.limitingRate);
        OrderedJson branches = OrderedJson::array();
        for (const auto& b : st.branches) {
          branches.push_back(OrderedJson{{"p", o.jnum(b.p)},
                                         {"p_prime", o.jnum(b.pPrime)},
                                         {"cap", o.jnum(b.cap)},
                                         {"r_prime", o.jnum(b.rPrime)},
                                         {"threshold", b.threshold},
                                         {"log2_factor", o.jnum(b.log2Factor)}});
        }
        s["branches"] = std::move(branches);
        steps.push_back(std::move(s));
      } else {
        std::cout << csvRow({std::to_string(k), std::to_string(st.n), std::to_string(st.inputCopies),
                             o.num(st.log2OutputDim), o.num(st.achievedRate), o.num(st.targetRate),
                             o.num(st.failureProb), tail, o.num(st.fidelity), o.num(st.rateBound),
                             st.rateBoundExact, o.num(st.limitingRate)});
      }
    }
    if (o.json()) runs.push_back(OrderedJson{{"k", k}, {"steps", std::move(steps)}});
  }
  if (o.json()) {
    OrderedJson j;
    j["normalized_to_powers_of_two"] = normalized;
    j["p_slack"] = o.jnum(a.pSlack);
    j["rate_slack"] = o.jnum(a.rateSlack);
    j["compiled"] = std::move(runs);
    std::cout << j.dump(2) << '\n';
  }
  return kExitOk;
}

// verify ---------------------------------------------------------------

struct VerifyArgs {
  distill::VerifyOptions options;
  std::string emit = "text";
};

int runVerify(const VerifyArgs& a) {
  const auto results = distill::runVerification(a.options);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed();
  if (a.emit == "json") {
    OrderedJson suites = OrderedJson::array();
    for (const auto& r : results) {
      suites.push_back(OrderedJson{{"name", r.name},
                                   {"checks", r.checks},
                                   {"failures", r.failures},
                                   {"details", r.details}});
    }
    std::cout << OrderedJson{{"seed", a.options.seed}, {"suites", suites}, {"pass", ok}}.dump(2) << '\n';
  } else {
    std::cout << "seed " << a.options.seed << '\n' << distill::formatReport(results);
  }
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement distillation bounds, protocol simulation and rate accounting"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* cBounds = app.add_subcommand("bounds", "E_f, p.p.t. and hashing bounds on a (K, F) grid");
  cBounds->add_option("--K-list", bounds.Ks, "Local dimensions")->delimiter(',')->capture_default_str();
  cBounds->add_option("--F-grid", bounds.grid, "Fidelity grid start:stop:step")->capture_default_str();
  addOutputOptions(cBounds, bounds.out, "csv");

  SimulateArgs sim;
  auto* cSim = app.add_subcommand("simulate", "Density-operator simulation against closed forms");
  cSim->add_option("--K", sim.K, "Input local dimension")->capture_default_str();
  cSim->add_option("--Kprime", sim.Kprime, "Output local dimension")->capture_default_str();
  cSim->add_option("--F-grid", sim.grid, "Fidelity grid start:stop:step")->capture_default_str();
  cSim->add_option("--protocol", sim.protocol, "Protocol")
      ->check(CLI::IsMember({"1", "2", "reduce", "twirl"}))
      ->capture_default_str();
  cSim->add_option("--samples", sim.samples, "Haar samples for the twirl")->capture_default_str();
  cSim->add_option("--seed", sim.seed, "Seed for Haar sampling")->capture_default_str();
  addOutputOptions(cSim, sim.out, "csv");

  ClassifyArgs classify;
  auto* cClassify = app.add_subcommand("classify", "Check an operation descriptor for tp/cp/ppt/separable");
  cClassify->add_option("operation", classify.path, "Operation JSON file")->required();
  addOutputOptions(cClassify, classify.out, "json");

  TraceArgs rates;
  auto* cRates = app.add_subcommand("rates", "Rate accounting for a protocol trace");
  cRates->add_option("trace", rates.path, "Trace JSON file")->required();
  addOutputOptions(cRates, rates.out, "json");

  CompileArgs compile;
  auto* cCompile = app.add_subcommand("compile", "Compile a trace through tensor powers and hashing");
  cCompile->add_option("trace", compile.path, "Trace JSON file")->required();
  cCompile->add_option("--p-slack", compile.pSlack, "p' = (1 - slack) p")->capture_default_str();
  cCompile->add_option("--rate-slack", compile.rateSlack, "R' = (1 - slack) cap")->capture_default_str();
  cCompile->add_option("--k-list", compile.ks, "Tensor powers")->delimiter(',')->capture_default_str();
  cCompile->add_option("--exact-limit", compile.exactLimit, "Largest k with an exact failure tail")
      ->capture_default_str();
  addOutputOptions(cCompile, compile.out, "json");

  VerifyArgs verify;
  auto* cVerify = app.add_subcommand("verify", "Run the invariant suite");
  cVerify->add_option("--suite", verify.options.suites, "Suites to run (default all)")
      ->delimiter(',')
      ->check(CLI::IsMember(distill::suiteNames()));
  cVerify->add_option("--seed", verify.options.seed, "Seed")->capture_default_str();
  cVerify->add_option("--perturb-protocol1", verify.options.protocol1Perturbation,
                      "Offset added to the protocol-1 closed form (harness self-test)");
  cVerify->add_option("--emit", verify.emit, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (cBounds->parsed()) return runBounds(bounds);
    if (cSim->parsed()) return runSimulate(sim);
    if (cClassify->parsed()) return runClassify(classify);
    if (cRates->parsed()) return runRates(rates);
    if (cCompile->parsed()) return runCompile(compile);
    if (cVerify->parsed()) return runVerify(verify);
  } catch (const std::exception& e) {
    // schema, domain and configuration errors all surface here
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
