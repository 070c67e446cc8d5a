#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's numerical routines; each oracle takes a different route to the
// same quantity (basis-vector sandwiches instead of index arithmetic, exact
// rationals instead of floating tails, 50-digit entropies).

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Dec50 = boost::multiprecision::cpp_dec_float_50;
using Rational = boost::multiprecision::cpp_rational;

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

inline Matrix ket(int dim, int i) {
  Matrix v = Matrix::Zero(dim, 1);
  v(i, 0) = 1.0;
  return v;
}

// Σ_b (I ⊗ ⟨b|) ρ (I ⊗ |b⟩)
inline Matrix traceOutB(const Matrix& rho, int dA, int dB) {
  Matrix out = Matrix::Zero(dA, dA);
  const Matrix id = Matrix::Identity(dA, dA);
  for (int b = 0; b < dB; ++b) {
    const Matrix e = kron(id, ket(dB, b));
    out += e.adjoint() * rho * e;
  }
  return out;
}

inline Matrix traceOutA(const Matrix& rho, int dA, int dB) {
  Matrix out = Matrix::Zero(dB, dB);
  const Matrix id = Matrix::Identity(dB, dB);
  for (int a = 0; a < dA; ++a) {
    const Matrix e = kron(ket(dA, a), id);
    out += e.adjoint() * rho * e;
  }
  return out;
}

// Σ_{b,b'} (I ⊗ |b⟩⟨b'|) ρ (I ⊗ |b⟩⟨b'|)
inline Matrix transposeB(const Matrix& rho, int dA, int dB) {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  const Matrix id = Matrix::Identity(dA, dA);
  for (int b = 0; b < dB; ++b)
    for (int c = 0; c < dB; ++c) {
      const Matrix e = kron(id, ket(dB, b) * ket(dB, c).adjoint());
      out += e * rho * e;
    }
  return out;
}

inline Matrix phiPlusProjector(int K) {
  Matrix v = Matrix::Zero(K * K, 1);
  for (int i = 0; i < K; ++i) v(i * K + i, 0) = 1.0 / std::sqrt(static_cast<double>(K));
  return v * v.adjoint();
}

// F·Φ + (1-F)/(K²-1)·(I - Φ)
inline Matrix isotropic(int K, double F) {
  const Matrix phi = phiPlusProjector(K);
  const Matrix id = Matrix::Identity(K * K, K * K);
  if (K == 1) return id;
  return F * phi + (1.0 - F) / (K * K - 1.0) * (id - phi);
}

inline double overlap(const Matrix& rho, int K) {
  return (phiPlusProjector(K) * rho).trace().real();
}

inline Dec50 log2(const Dec50& x) { return boost::multiprecision::log(x) / boost::multiprecision::log(Dec50(2)); }

inline Dec50 binaryEntropy(const Dec50& F) {
  Dec50 h = 0;
  if (F > 0) h -= F * log2(F);
  if (F < 1) h -= (1 - F) * log2(1 - F);
  return h;
}

// P(N < t) for N ~ Binomial(k, num/den), exactly.
inline Rational binomialLower(int k, int t, std::int64_t num, std::int64_t den) {
  using boost::multiprecision::cpp_int;
  const Rational p{cpp_int(num), cpp_int(den)};
  const Rational q = 1 - p;
  Rational sum = 0;
  cpp_int choose = 1;
  for (int n = 0; n < t && n <= k; ++n) {
    if (n > 0) choose = choose * (k - n + 1) / n;
    Rational term(choose);
    for (int i = 0; i < n; ++i) term *= p;
    for (int i = 0; i < k - n; ++i) term *= q;
    sum += term;
  }
  return sum;
}

// P(N1 < t1 or N2 < t2) for a two-outcome split with P(outcome 1) = num/den.
inline Rational twoOutcomeShortfall(int k, int t1, int t2, std::int64_t num, std::int64_t den) {
  using boost::multiprecision::cpp_int;
  const Rational p{cpp_int(num), cpp_int(den)};
  Rational fail = 0;
  cpp_int choose = 1;
  for (int n = 0; n <= k; ++n) {
    if (n > 0) choose = choose * (k - n + 1) / n;
    if (n >= t1 && k - n >= t2) continue;
    Rational term(choose);
    for (int i = 0; i < n; ++i) term *= p;
    for (int i = 0; i < k - n; ++i) term *= (1 - p);
    fail += term;
  }
  return fail;
}

inline double toDouble(const Rational& r) { return static_cast<double>(r); }

}  // namespace oracle
