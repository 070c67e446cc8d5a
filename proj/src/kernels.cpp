#include "distill/kernels.hpp"

#include <cmath>
#include <limits>

#include <omp.h>

#include "distill/errors.hpp"
#include "distill/random.hpp"

namespace distill::kernels {

namespace {

constexpr std::size_t kTwirlBlock = 64;

void requireSameShape(std::span<const ComplexMatrix> kraus) {
  if (kraus.empty()) throw DimensionError("empty Kraus list");
  for (const auto& k : kraus) {
    if (k.rows() != kraus.front().rows() || k.cols() != kraus.front().cols()) {
      throw DimensionError("Kraus operators differ in shape");
    }
  }
}

void requireFactor(const ComplexMatrix& m, int dimA, int dimB) {
  if (m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(dimA) * dimB) {
    throw DimensionError("matrix does not factor as " + std::to_string(dimA) + "x" +
                         std::to_string(dimB));
  }
}

void requireMultinomial(int k, std::span<const double> probs, std::span<const int> thresholds) {
  if (k < 0) throw DomainError("multinomialShortfall: negative k");
  if (probs.empty() || probs.size() != thresholds.size()) {
    throw DimensionError("multinomialShortfall: probs/thresholds size mismatch");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw DomainError("multinomialShortfall: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("multinomialShortfall: probabilities do not sum to 1");
}

std::vector<double> logFactorials(int k) {
  std::vector<double> lf(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) lf[i] = std::lgamma(static_cast<double>(i) + 1.0);
  return lf;
}

// Binomial(m, q) mass at n, with exact handling of q ∈ {0, 1}.
double binomialPmf(const std::vector<double>& lf, int m, int n, double q, double logQ,
                   double logNotQ) {
  if (q <= 0.0) return n == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return n == m ? 1.0 : 0.0;
  return std::exp(lf[m] - lf[n] - lf[m - n] + n * logQ + (m - n) * logNotQ);
}

// Conditional success probability of branch j given branches < j are done.
double conditionalProb(std::span<const double> probs, std::size_t j) {
  double remaining = 0.0;
  for (std::size_t l = j; l < probs.size(); ++l) remaining += probs[l];
  if (remaining <= 0.0) return 0.0;
  return std::min(1.0, probs[j] / remaining);
}

}  // namespace

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  ComplexMatrix out(ar * br, ac * bc);
#pragma omp parallel for collapse(2) schedule(static)
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j) out.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return out;
}

ComplexMatrix krausSum(std::span<const ComplexMatrix> kraus, const ComplexMatrix& rho) {
  requireSameShape(kraus);
  if (kraus.front().cols() != rho.rows() || rho.rows() != rho.cols()) {
    throw DimensionError("krausSum: Kraus input dimension does not match state");
  }
  const auto n = static_cast<std::ptrdiff_t>(kraus.size());
  std::vector<ComplexMatrix> terms(kraus.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const ComplexMatrix left = kraus[j] * rho;
    terms[j] = left * kraus[j].adjoint();
  }
  ComplexMatrix out = ComplexMatrix::Zero(kraus.front().rows(), kraus.front().rows());
  for (const auto& t : terms) out += t;
  return out;
}

ComplexMatrix superoperator(std::span<const ComplexMatrix> kraus) {
  requireSameShape(kraus);
  const Eigen::Index r = kraus.front().rows(), c = kraus.front().cols();
  const auto n = static_cast<std::ptrdiff_t>(kraus.size());
  std::vector<ComplexMatrix> terms(kraus.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    ComplexMatrix t(r * r, c * c);
    const ComplexMatrix conj = kraus[j].conjugate();
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index k = 0; k < c; ++k) t.block(i * r, k * c, r, c) = kraus[j](i, k) * conj;
    terms[j] = std::move(t);
  }
  ComplexMatrix out = ComplexMatrix::Zero(r * r, c * c);
  for (const auto& t : terms) out += t;
  return out;
}

ComplexMatrix partialTraceB(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(dimA, dimA);
#pragma omp parallel for collapse(2) schedule(static)
  for (int a = 0; a < dimA; ++a)
    for (int a2 = 0; a2 < dimA; ++a2) {
      Complex s = 0.0;
      for (int b = 0; b < dimB; ++b) s += m(a * dimB + b, a2 * dimB + b);
      out(a, a2) = s;
    }
  return out;
}

ComplexMatrix partialTraceA(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(dimB, dimB);
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < dimB; ++b)
    for (int b2 = 0; b2 < dimB; ++b2) {
      Complex s = 0.0;
      for (int a = 0; a < dimA; ++a) s += m(a * dimB + b, a * dimB + b2);
      out(b, b2) = s;
    }
  return out;
}

ComplexMatrix partialTransposeB(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(m.rows(), m.cols());
#pragma omp parallel for collapse(2) schedule(static)
  for (int a = 0; a < dimA; ++a)
    for (int a2 = 0; a2 < dimA; ++a2)
      out.block(a * dimB, a2 * dimB, dimB, dimB) =
          m.block(a * dimB, a2 * dimB, dimB, dimB).transpose();
  return out;
}

ComplexMatrix partialTransposeA(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(m.rows(), m.cols());
#pragma omp parallel for collapse(2) schedule(static)
  for (int a = 0; a < dimA; ++a)
    for (int a2 = 0; a2 < dimA; ++a2)
      out.block(a * dimB, a2 * dimB, dimB, dimB) = m.block(a2 * dimB, a * dimB, dimB, dimB);
  return out;
}

ComplexMatrix haarTwirlAverage(const ComplexMatrix& rho, int K, std::size_t samples,
                               std::uint64_t seed) {
  requireFactor(rho, K, K);
  if (samples == 0) throw DomainError("haarTwirlAverage: zero samples");
  const std::size_t blocks = (samples + kTwirlBlock - 1) / kTwirlBlock;
  std::vector<ComplexMatrix> partial(blocks, ComplexMatrix::Zero(rho.rows(), rho.cols()));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(blocks); ++blk) {
    const std::size_t begin = static_cast<std::size_t>(blk) * kTwirlBlock;
    const std::size_t end = std::min(samples, begin + kTwirlBlock);
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = streamRng(seed, i);
      const ComplexMatrix u = haarUnitary(K, rng);
      const ComplexMatrix w = kron(u, u.conjugate());
      partial[blk] += w * rho * w.adjoint();
    }
  }
  ComplexMatrix total = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& p : partial) total += p;
  return total / static_cast<double>(samples);
}

double multinomialShortfall(int k, std::span<const double> probs,
                            std::span<const int> thresholds) {
  requireMultinomial(k, probs, thresholds);
  const auto lf = logFactorials(k);
  std::vector<double> ok(static_cast<std::size_t>(k) + 1, 0.0);
  ok[k] = 1.0;
  double fail = 0.0;
  const std::size_t last = probs.size() - 1;

  for (std::size_t j = 0; j < last; ++j) {
    const double q = conditionalProb(probs, j);
    const double logQ = q > 0.0 ? std::log(q) : 0.0;
    const double logNotQ = q < 1.0 ? std::log1p(-q) : 0.0;
    const int t = thresholds[j];

    std::vector<double> failPart(ok.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int m = 0; m <= k; ++m) {
      if (ok[m] == 0.0) continue;
      double s = 0.0;
      for (int n = 0; n < std::min(t, m + 1); ++n) s += binomialPmf(lf, m, n, q, logQ, logNotQ);
      failPart[m] = ok[m] * s;
    }
    for (double f : failPart) fail += f;

    // gather form: next[r] = Σ_{m ≥ r, m - r ≥ t} ok[m] · pmf(m, m - r)
    std::vector<double> next(ok.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int r = 0; r <= k; ++r) {
      double s = 0.0;
      for (int m = r + std::max(t, 0); m <= k; ++m) {
        if (ok[m] == 0.0) continue;
        s += ok[m] * binomialPmf(lf, m, m - r, q, logQ, logNotQ);
      }
      next[r] = s;
    }
    ok.swap(next);
  }
  for (int m = 0; m <= k; ++m)
    if (m < thresholds[last]) fail += ok[m];
  return std::min(1.0, fail);
}

namespace reference {

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

ComplexMatrix krausSum(std::span<const ComplexMatrix> kraus, const ComplexMatrix& rho) {
  requireSameShape(kraus);
  const Eigen::Index r = kraus.front().rows(), c = kraus.front().cols();
  if (c != rho.rows()) throw DimensionError("krausSum: dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(r, r);
  for (const auto& K : kraus)
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j) {
        Complex s = 0.0;
        for (Eigen::Index x = 0; x < c; ++x)
          for (Eigen::Index y = 0; y < c; ++y) s += K(i, x) * rho(x, y) * std::conj(K(j, y));
        out(i, j) += s;
      }
  return out;
}

ComplexMatrix superoperator(std::span<const ComplexMatrix> kraus) {
  requireSameShape(kraus);
  const Eigen::Index r = kraus.front().rows(), c = kraus.front().cols();
  ComplexMatrix out = ComplexMatrix::Zero(r * r, c * c);
  // (K ρ K†)_{ij} = Σ_{xy} K_{ix} ρ_{xy} conj(K_{jy})
  for (const auto& K : kraus)
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index x = 0; x < c; ++x)
          for (Eigen::Index y = 0; y < c; ++y) out(i * r + j, x * c + y) += K(i, x) * std::conj(K(j, y));
  return out;
}

ComplexMatrix partialTraceB(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out = ComplexMatrix::Zero(dimA, dimA);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (r % dimB == c % dimB) out(r / dimB, c / dimB) += m(r, c);
  return out;
}

ComplexMatrix partialTraceA(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out = ComplexMatrix::Zero(dimB, dimB);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (r / dimB == c / dimB) out(r % dimB, c % dimB) += m(r, c);
  return out;
}

ComplexMatrix partialTransposeB(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < dimA; ++a)
    for (int b = 0; b < dimB; ++b)
      for (int a2 = 0; a2 < dimA; ++a2)
        for (int b2 = 0; b2 < dimB; ++b2) out(a * dimB + b, a2 * dimB + b2) = m(a * dimB + b2, a2 * dimB + b);
  return out;
}

ComplexMatrix partialTransposeA(const ComplexMatrix& m, int dimA, int dimB) {
  requireFactor(m, dimA, dimB);
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < dimA; ++a)
    for (int b = 0; b < dimB; ++b)
      for (int a2 = 0; a2 < dimA; ++a2)
        for (int b2 = 0; b2 < dimB; ++b2) out(a * dimB + b, a2 * dimB + b2) = m(a2 * dimB + b, a * dimB + b2);
  return out;
}

ComplexMatrix haarTwirlAverage(const ComplexMatrix& rho, int K, std::size_t samples,
                               std::uint64_t seed) {
  requireFactor(rho, K, K);
  if (samples == 0) throw DomainError("haarTwirlAverage: zero samples");
  ComplexMatrix total = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t i = 0; i < samples; ++i) {
    Rng rng = streamRng(seed, i);
    const ComplexMatrix u = haarUnitary(K, rng);
    const ComplexMatrix w = kron(u, u.conjugate());
    total += w * rho * w.adjoint();
  }
  return total / static_cast<double>(samples);
}

double multinomialShortfall(int k, std::span<const double> probs,
                            std::span<const int> thresholds) {
  requireMultinomial(k, probs, thresholds);
  const auto lf = logFactorials(k);
  std::vector<double> ok(static_cast<std::size_t>(k) + 1, 0.0);
  ok[k] = 1.0;
  double fail = 0.0;
  const std::size_t last = probs.size() - 1;
  for (std::size_t j = 0; j < last; ++j) {
    const double q = conditionalProb(probs, j);
    const double logQ = q > 0.0 ? std::log(q) : 0.0;
    const double logNotQ = q < 1.0 ? std::log1p(-q) : 0.0;
    std::vector<double> next(ok.size(), 0.0);
    for (int m = 0; m <= k; ++m) {
      if (ok[m] == 0.0) continue;
      for (int n = 0; n <= m; ++n) {
        const double w = ok[m] * binomialPmf(lf, m, n, q, logQ, logNotQ);
        if (n < thresholds[j]) fail += w;
        else next[m - n] += w;
      }
    }
    ok.swap(next);
  }
  for (int m = 0; m <= k; ++m)
    if (m < thresholds[last]) fail += ok[m];
  return std::min(1.0, fail);
}

}  // namespace reference

}  // namespace distill::kernels
