#include "distill/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "distill/errors.hpp"
#include "distill/random.hpp"
#include "distill/states.hpp"

namespace distill {

namespace {

double checkedFidelity(double F, const char* what) {
  if (!(F >= -kFidelitySlack && F <= 1.0 + kFidelitySlack)) {
    throw DomainError(std::string(what) + ": F=" + std::to_string(F) + " outside [0, 1]");
  }
  return std::clamp(F, 0.0, 1.0);
}

void requireK(int K, int min, const char* what) {
  if (K < min) throw DomainError(std::string(what) + ": K=" + std::to_string(K) + " too small");
}

bool isPowerOfTwo(int K) { return K > 0 && (K & (K - 1)) == 0; }

constexpr double kLog2e = std::numbers::log2e;

// Ensemble members are the columns of basis · Uᵀ, where basis holds √λ_i e_i.
struct EnsembleProblem {
  BipartiteLabel label;
  ComplexMatrix basis;  // d x r
  int members = 0;

  ComplexMatrix members_of(const ComplexMatrix& u) const { return basis * u.transpose(); }

  // Σ_j p_j S(tr_B ψ_j) in bits; optionally the Euclidean gradient ∂f/∂Ū.
  double evaluate(const ComplexMatrix& u, ComplexMatrix* grad) const {
    const ComplexMatrix psi = members_of(u);
    ComplexMatrix g;
    if (grad) g = ComplexMatrix::Zero(psi.rows(), psi.cols());
    double f = 0.0;
    for (Eigen::Index j = 0; j < psi.cols(); ++j) {
      ComplexMatrix m(label.dimA, label.dimB);
      for (int a = 0; a < label.dimA; ++a)
        for (int b = 0; b < label.dimB; ++b) m(a, b) = psi(label.index(a, b), j);
      const ComplexMatrix sigma = m * m.adjoint();
      const double p = sigma.trace().real();
      if (p <= 0.0) continue;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sigma);
      const auto& mu = eig.eigenvalues();
      double h = xlog2x(p);
      for (Eigen::Index k = 0; k < mu.size(); ++k) h -= xlog2x(std::max(mu(k), 0.0));
      f += h;
      if (grad) {
        // ∂h/∂M̄ = L·M with L = -log2(σ/p)
        Eigen::VectorXd logs(mu.size());
        for (Eigen::Index k = 0; k < mu.size(); ++k)
          logs(k) = -std::log2(std::max(mu(k), 1e-300) / p);
        const ComplexMatrix L = eig.eigenvectors() * logs.asDiagonal() * eig.eigenvectors().adjoint();
        const ComplexMatrix lm = L * m;
        for (int a = 0; a < label.dimA; ++a)
          for (int b = 0; b < label.dimB; ++b) g(label.index(a, b), j) = lm(a, b);
      }
    }
    if (grad) *grad = g.transpose() * basis.conjugate();
    return f;
  }
};

ComplexMatrix retract(const ComplexMatrix& y) {
  Eigen::HouseholderQR<ComplexMatrix> qr(y);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(y.rows(), y.cols());
  const ComplexMatrix r = qr.matrixQR().topRows(y.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

double descend(const EnsembleProblem& problem, ComplexMatrix u, int iterations) {
  ComplexMatrix egrad;
  double f = problem.evaluate(u, &egrad);
  double step = 0.5;
  for (int it = 0; it < iterations; ++it) {
    const ComplexMatrix uhg = u.adjoint() * egrad;
    const ComplexMatrix rgrad = egrad - u * ((uhg + uhg.adjoint()) * 0.5);
    const double g2 = rgrad.squaredNorm();
    if (g2 < 1e-28) break;
    step = std::min(step * 2.0, 1e3);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const ComplexMatrix candidate = retract(u - step * rgrad);
      const double fc = problem.evaluate(candidate, nullptr);
      if (fc <= f - 1e-4 * step * g2) {
        u = candidate;
        f = problem.evaluate(u, &egrad);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return f;
}

}  // namespace

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

double binaryEntropy(double F) {
  F = checkedFidelity(F, "binaryEntropy");
  return -xlog2x(F) - xlog2x(1.0 - F);
}

double pptBoundIsotropic(int K, double F) {
  requireK(K, 2, "pptBoundIsotropic");
  F = checkedFidelity(F, "pptBoundIsotropic");
  return std::log2(static_cast<double>(K)) + xlog2x(F) + xlog2x(1.0 - F) -
         (1.0 - F) * std::log2(static_cast<double>(K - 1));
}

EfBounds efBoundsIsotropic(int K, double F) {
  requireK(K, 1, "efBoundsIsotropic");
  F = checkedFidelity(F, "efBoundsIsotropic");
  EfBounds out{K, F, 0.0, 0.0, 0.0};
  if (K == 1) return out;
  out.lower = efLowerBound(K, F);
  out.upper = efUpperBound(K, F);
  out.pptBound = pptBoundIsotropic(K, F);
  return out;
}

double efLowerBound(double K, double F) {
  if (!(K >= 1.0)) throw DomainError("efLowerBound: K must be >= 1");
  F = checkedFidelity(F, "efLowerBound");
  if (K == 1.0) return 0.0;
  return std::max(0.0, F * std::log2(K) - binaryEntropy(F));
}

double efUpperBound(double K, double F) {
  if (!(K >= 1.0)) throw DomainError("efUpperBound: K must be >= 1");
  F = checkedFidelity(F, "efUpperBound");
  if (K == 1.0 || F * K < 1.0) return 0.0;
  const double logK = std::log2(K);
  return std::min(F * logK, (F * K - 1.0) / (K - 1.0) * logK);
}

HashingRate hashingRate(int K, double F) {
  requireK(K, 2, "hashingRate");
  F = checkedFidelity(F, "hashingRate");
  const double k2 = static_cast<double>(K) * K;
  const double raw = std::log2(static_cast<double>(K)) + xlog2x(F) + xlog2x(1.0 - F) -
                     (1.0 - F) * std::log2(k2 - 1.0);
  return HashingRate{raw, std::max(0.0, raw), isPowerOfTwo(K)};
}

double entanglementEntropy(const ComplexVector& psi, BipartiteLabel label) {
  if (psi.size() != label.total()) throw DimensionError("entanglementEntropy: size mismatch");
  ComplexMatrix m(label.dimA, label.dimB);
  for (int a = 0; a < label.dimA; ++a)
    for (int b = 0; b < label.dimB; ++b) m(a, b) = psi(label.index(a, b));
  const ComplexMatrix sigma = m * m.adjoint();
  const double p = sigma.trace().real();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sigma, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
    s -= xlog2x(std::max(eig.eigenvalues()(k), 0.0) / p);
  return s;
}

double efNumericEstimate(const DensityOperator& rho, const EfEstimateOptions& options) {
  const auto& label = rho.bipartite();
  if (label.total() > 16) {
    throw DimensionError("efNumericEstimate: total dimension " + std::to_string(label.total()) +
                         " exceeds 16");
  }
  if (options.iterations < 0 || options.restarts < 1) throw ConfigError("efNumericEstimate: bad budget");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho.matrix());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    if (eig.eigenvalues()(i) > 1e-13) kept.push_back(i);
  const int rank = static_cast<int>(kept.size());
  const int d = label.total();

  if (rank == 1) return entanglementEntropy(eig.eigenvectors().col(kept.front()), label);

  EnsembleProblem problem{label, ComplexMatrix(d, rank), 0};
  for (int i = 0; i < rank; ++i)
    problem.basis.col(i) = eig.eigenvectors().col(kept[i]) * std::sqrt(eig.eigenvalues()(kept[i]));
  problem.members = options.ensembleSize > 0 ? options.ensembleSize : std::min(d * d + 1, 2 * rank + 2);
  if (problem.members < rank) throw ConfigError("efNumericEstimate: ensemble smaller than rank");

  std::vector<double> best(static_cast<std::size_t>(options.restarts));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng = streamRng(options.seed, static_cast<std::uint64_t>(r));
    best[r] = descend(problem, randomIsometry(problem.members, rank, rng), options.iterations);
  }
  return *std::min_element(best.begin(), best.end());
}

}  // namespace distill
