#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "distill/errors.hpp"
#include "distill/kernels.hpp"
#include "distill/protocols.hpp"
#include "distill/random.hpp"
#include "distill/states.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

using namespace distill;
using testing::requireClose;

namespace {

double simulatedFidelity(const QuantumOperation& op, const DensityOperator& rho) {
  const auto out = apply(op, rho);
  REQUIRE(out.size() == 1);
  return fidelity(*out[0].state);
}

// Protocol 1 by explicit enumeration of the two parties' outcomes: keep the
// block when both project successfully, replace failed shares with I/K'.
double protocol1Oracle(int K, int Kp, double F) {
  const auto rho = oracle::isotropic(K, F);
  const ComplexMatrix P = ComplexMatrix::Identity(K, K).topRows(Kp);
  ComplexMatrix Q = ComplexMatrix::Zero(K - Kp, K);
  for (int y = Kp; y < K; ++y) Q(y - Kp, y) = 1.0;
  const ComplexMatrix mixed = ComplexMatrix::Identity(Kp, Kp) / Kp;
  ComplexMatrix out = oracle::kron(P, P) * rho * oracle::kron(P, P).adjoint();
  if (Kp < K) {
    // Alice fails: her share is replaced, Bob's conditional state survives
    const ComplexMatrix QP = oracle::kron(Q, P);
    const ComplexMatrix afail = QP * rho * QP.adjoint();
    out += oracle::kron(mixed, oracle::traceOutA(afail, K - Kp, Kp));
    const ComplexMatrix PQ = oracle::kron(P, Q);
    const ComplexMatrix bfail = PQ * rho * PQ.adjoint();
    out += oracle::kron(oracle::traceOutB(bfail, Kp, K - Kp), mixed);
    const ComplexMatrix QQ = oracle::kron(Q, Q);
    out += (QQ * rho * QQ.adjoint()).trace().real() * oracle::kron(mixed, mixed);
  }
  return oracle::overlap(out, Kp);
}

}  // namespace

TEST_CASE("protocol 1 fixed values") {
  CHECK(protocol1Fidelity(4, 2, 1.0) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(protocol1Fidelity(4, 2, 1.0 / 16.0) == doctest::Approx(0.25).epsilon(1e-14));
  for (int K = 2; K <= 6; ++K) CHECK(protocol1Fidelity(K, K, 0.3) == doctest::Approx(0.3));

  const auto kept = apply(protocol1Op(4, 2, BranchMode::KeepBranches), phiPlusState(4));
  CHECK(kept[0].probability == doctest::Approx(0.5));
  CHECK(fidelity(*kept[0].state) == doctest::Approx(1.0));
  CHECK(simulatedFidelity(protocol1Op(4, 2), phiPlusState(4)) == doctest::Approx(0.625));

  const auto random = apply(protocol1Op(4, 2), DensityOperator::maximallyMixed({4, 4}));
  requireClose(random[0].state->matrix(), ComplexMatrix::Identity(4, 4) / 4.0, 1e-15);

  const auto full = apply(protocol1Op(3, 3, BranchMode::KeepBranches), isotropicState(3, 0.4));
  REQUIRE(full.size() == 1);
  CHECK(full[0].probability == doctest::Approx(1.0));
}

TEST_CASE("protocol 1 closed form matches simulation and the enumeration oracle") {
  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      const auto op = protocol1Op(K, Kp);
      CHECK(isTracePreserving(op));
      for (int i = 0; i <= 10; ++i) {
        const double F = i / 10.0;
        CAPTURE(K);
        CAPTURE(Kp);
        CAPTURE(F);
        const double closed = protocol1Fidelity(K, Kp, F);
        CHECK(std::abs(simulatedFidelity(op, isotropicState(K, F)) - closed) <= 1e-9);
        CHECK(std::abs(protocol1Oracle(K, Kp, F) - closed) <= 1e-12);
        CHECK(closed >= static_cast<double>(Kp) / K * F - 1e-15);
        CHECK(closed <= 1.0 + 1e-15);
      }
    }
  CHECK_THROWS_AS((void)protocol1Op(3, 4), DomainError);
  CHECK_THROWS_AS((void)protocol1Fidelity(1, 1, 1.0), DomainError);
  CHECK_THROWS_AS((void)protocol1Fidelity(4, 2, 1.5), DomainError);
}

TEST_CASE("protocol 2") {
  CHECK(protocol2Fidelity(4, 2, 1.0) == 1.0);
  CHECK(protocol2Fidelity(4, 2, 1.0 / 16.0) == doctest::Approx(0.25).epsilon(1e-15));
  for (double F : {0.0, 0.5, 1.0}) {
    const auto out = apply(protocol2Op(6, 3), isotropicState(6, F));
    requireClose(out[0].state->matrix(), isotropicState(3, protocol2Fidelity(6, 3, F)).matrix(), 1e-9);
  }
  for (int K = 2; K <= 9; ++K)
    for (int Kp = 1; Kp <= K; ++Kp) {
      if (K % Kp) continue;
      const auto op = protocol2Op(K, Kp);
      for (int i = 0; i <= 10; ++i) {
        const double F = i / 10.0;
        const double closed = protocol2Fidelity(K, Kp, F);
        CHECK(std::abs(simulatedFidelity(op, isotropicState(K, F)) - closed) <= 1e-9);
        CHECK(closed >= F - 1e-15);
      }
    }
  CHECK_THROWS_AS((void)protocol2Op(6, 4), DomainError);
  CHECK_THROWS_AS((void)protocol2Fidelity(6, 4, 0.5), DomainError);
}

TEST_CASE("twirl") {
  Rng rng = streamRng(41, 0);
  for (int K = 2; K <= 4; ++K) {
    const auto iso = isotropicState(K, 0.6);
    requireClose(exactTwirl(iso).matrix(), iso.matrix(), 1e-14);
    const auto rho = randomDensity({K, K}, rng);
    const auto tw = exactTwirl(rho);
    CHECK(std::abs(fidelity(tw) - fidelity(rho)) <= 1e-12);
    for (int c = 0; c < 100; ++c) {
      const auto u = haarUnitary(K, rng);
      const ComplexMatrix w = kernels::kron(u, u.conjugate());
      CHECK(maxAbsDifference(w * tw.matrix() * w.adjoint(), tw.matrix()) <= 1e-9);
    }
  }
  ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
  zero(0, 0) = 1.0;
  const DensityOperator ket00(zero, BipartiteLabel{2, 2});
  requireClose(exactTwirl(ket00).matrix(), isotropicState(2, 0.5).matrix(), 1e-15);

  for (int K : {2, 3}) {
    const auto rho = randomDensity({K, K}, rng);
    CHECK(maxAbsDifference(monteCarloTwirl(rho, 10000, 5), exactTwirl(rho).matrix()) <= 1e-2);
  }
  CHECK_THROWS_AS((void)exactTwirl(DensityOperator::maximallyMixed({2, 3})), LabelError);
}

TEST_CASE("dimension reduction") {
  const auto plan = makeReductionPlan(5, 2);
  CHECK(plan.stage1Target == 4);
  CHECK(plan.guaranteedFidelityFactor == doctest::Approx(0.8));
  CHECK(reductionBound(4, 2, 1.0) == doctest::Approx(1.0));
  CHECK(fidelity(reduceDimension(4, 2, isotropicState(4, 1.0))) >= 1.0 - 1e-12);

  for (int K = 2; K <= 6; ++K)
    for (int Kp = 1; Kp < K; ++Kp) {
      const auto p = makeReductionPlan(K, Kp);
      CHECK(p.stage1Target % Kp == 0);
      CHECK(p.guaranteedFidelityFactor >= static_cast<double>(std::max(K - Kp, Kp)) / K - 1e-15);
      for (int i = 0; i <= 10; ++i) {
        const double F = i / 10.0;
        const double sim = fidelity(reduceDimension(K, Kp, isotropicState(K, F)));
        CHECK(sim >= reductionBound(K, Kp, F) - 1e-12);
        CHECK(reductionBound(K, Kp, F) >= reductionBoundCoarse(K, Kp, F) - 1e-15);
        CHECK(std::abs(sim - reduceDimension(K, Kp, F)) <= 1e-9);
      }
    }
  CHECK(fidelity(reduceDimension(3, 2, isotropicState(3, 0.0))) >= 0.0);
  CHECK_THROWS_AS((void)reduceDimension(3, 3, 0.5), DomainError);
}
