#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "distill/bounds.hpp"
#include "distill/errors.hpp"
#include "distill/random.hpp"
#include "distill/states.hpp"
#include "support/oracles.hpp"

using namespace distill;
using oracle::Dec50;

namespace {

double hashingOracle(int K, const Dec50& F) {
  const Dec50 k = K;
  Dec50 h = oracle::log2(k);
  if (F > 0) h += F * oracle::log2(F);
  if (F < 1) h += (1 - F) * oracle::log2((1 - F) / (k * k - 1));
  return static_cast<double>(h);
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binaryEntropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binaryEntropy(0.0) == 0.0);
  CHECK(binaryEntropy(1.0) == 0.0);
  const double h09 = static_cast<double>(oracle::binaryEntropy(Dec50("0.9")));
  CHECK(h09 == doctest::Approx(0.46899559358928).epsilon(1e-13));
  CHECK(std::abs(binaryEntropy(0.9) - h09) <= 1e-15);
  for (int i = 1; i < 100; ++i) {
    const Dec50 F = Dec50(i) / 100;
    CHECK(std::abs(binaryEntropy(i / 100.0) - static_cast<double>(oracle::binaryEntropy(F))) <= 1e-15);
  }
  // concavity
  for (int i = 1; i < 100; ++i) {
    const double second = binaryEntropy((i - 1) / 100.0) - 2.0 * binaryEntropy(i / 100.0) +
                          binaryEntropy((i + 1) / 100.0);
    CHECK(second <= 0.0);
  }
  CHECK_THROWS_AS((void)binaryEntropy(1.1), DomainError);
}

TEST_CASE("entanglement of formation bounds") {
  for (int K = 2; K <= 8; ++K) {
    const auto one = efBoundsIsotropic(K, 1.0);
    CHECK(one.lower == doctest::Approx(std::log2(K)));
    CHECK(one.upper == doctest::Approx(std::log2(K)));
    CHECK(efBoundsIsotropic(K, 1.0 / K).upper == doctest::Approx(0.0));
    CHECK(pptBoundIsotropic(K, 1.0) == doctest::Approx(std::log2(K)));
    CHECK(std::abs(pptBoundIsotropic(K, 1.0 / K)) <= 1e-14);
    for (int i = 0; i <= 20; ++i) {
      const double F = i / 20.0;
      const auto b = efBoundsIsotropic(K, F);
      CHECK(b.lower <= b.upper + 1e-12);
      const double gap = pptBoundIsotropic(K, F) - (F * std::log2(K) - binaryEntropy(F));
      CHECK(std::abs(gap - (1.0 - F) * std::log2(K / (K - 1.0))) <= 1e-12);
    }
  }
  const auto b = efBoundsIsotropic(2, 0.9);
  CHECK(b.lower == doctest::Approx(0.9 - 0.46899559358928).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(pptBoundIsotropic(2, 0.9) == doctest::Approx(0.531004406410719).epsilon(1e-12));

  const auto k1 = efBoundsIsotropic(1, 1.0);
  CHECK(k1.lower == 0.0);
  CHECK(k1.upper == 0.0);
  CHECK(efLowerBound(std::ldexp(1.0, 120), 1.0) == doctest::Approx(120.0));
  CHECK_THROWS_AS((void)pptBoundIsotropic(1, 1.0), DomainError);
  CHECK_THROWS_AS((void)efBoundsIsotropic(0, 1.0), DomainError);
}

TEST_CASE("hashing rate") {
  CHECK(hashingRate(2, 0.9).raw == doctest::Approx(hashingOracle(2, Dec50("0.9"))).epsilon(1e-14));
  CHECK(hashingRate(2, 0.9).raw == doctest::Approx(0.37252).epsilon(1e-5));
  for (int K : {2, 4, 8, 16}) {
    CHECK(hashingRate(K, 1.0).raw == std::log2(static_cast<double>(K)));
    CHECK(hashingRate(K, 1.0).powerOfTwo);
    for (int i = 1; i < 20; ++i) {
      const double F = i / 20.0;
      const auto h = hashingRate(K, F);
      CHECK(std::abs(h.raw - hashingOracle(K, Dec50(i) / 20)) <= 1e-13);
      CHECK(h.raw >= (2 * F - 1) * std::log2(K) - binaryEntropy(F) - 1e-15);
      CHECK(h.clamped == std::max(0.0, h.raw));
    }
  }
  CHECK_FALSE(hashingRate(6, 0.9).powerOfTwo);
}

TEST_CASE("numerical entanglement of formation") {
  EfEstimateOptions opt;
  opt.seed = 3;
  CHECK(efNumericEstimate(phiPlusState(2), opt) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(efNumericEstimate(isotropicState(2, 0.5), opt) <= 1e-4);

  const auto start = std::chrono::steady_clock::now();
  for (double F : {0.5, 0.7, 0.9, 1.0}) {
    const auto b = efBoundsIsotropic(2, F);
    const double est = efNumericEstimate(isotropicState(2, F), opt);
    CAPTURE(F);
    CHECK(est >= b.lower - 1e-6);
    CHECK(est <= b.upper + 1e-4);
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 120.0);

  // same seed, same answer
  CHECK(efNumericEstimate(isotropicState(2, 0.8), opt) == efNumericEstimate(isotropicState(2, 0.8), opt));

  // product states carry no entanglement
  Rng rng = streamRng(51, 0);
  const auto prod = tensorStates(DensityOperator::fromPure(randomPureVector(2, rng), BipartiteLabel{2, 1}),
                                 DensityOperator::fromPure(randomPureVector(3, rng), BipartiteLabel{1, 3}));
  CHECK(efNumericEstimate(prod, opt) <= 1e-6);
  CHECK(entanglementEntropy(phiPlus(3), {3, 3}) == doctest::Approx(std::log2(3.0)));
  CHECK_THROWS_AS((void)efNumericEstimate(DensityOperator::maximallyMixed({3, 6}), opt), DimensionError);
}
