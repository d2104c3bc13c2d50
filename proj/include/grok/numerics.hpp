#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "grok/matrix.hpp"
#include "grok/rng.hpp"

namespace grok {

// Row-wise softmax with per-row max subtraction.
inline RealMatrix softmax_rows(const RealMatrix& m) {
  RealMatrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* src = m.row(i);
    double* dst = out.row(i);
    double mx = src[0];
    for (std::size_t j = 1; j < m.cols; ++j) mx = std::max(mx, src[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) {
      dst[j] = std::exp(src[j] - mx);
      sum += dst[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < m.cols; ++j) dst[j] *= inv;
  }
  return out;
}

// In-place softmax over a raw row, returning nothing. Used by the attention
// kernels, which hold scores in per-pair arrays rather than one matrix.
inline void softmax_span(double* v, std::size_t n) {
  double mx = v[0];
  for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, v[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = std::exp(v[j] - mx);
    sum += v[j];
  }
  const double inv = 1.0 / sum;
  for (std::size_t j = 0; j < n; ++j) v[j] *= inv;
}

struct NormStats {
  double mean = 0.0;     // 0 for RMS
  double inv_std = 0.0;  // 1/sqrt(var+eps), or 1/sqrt(ms+eps) for RMS
};

// Standardize z in place: (z - mean)/sqrt(var+eps), population variance.
inline NormStats layer_standardize(double* z, std::size_t n, double eps) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += z[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = z[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + eps);
  for (std::size_t i = 0; i < n; ++i) z[i] = (z[i] - mean) * inv_std;
  return {mean, inv_std};
}

// z / sqrt(mean(z^2)+eps), in place. No centering.
inline NormStats rms_standardize(double* z, std::size_t n, double eps) {
  double ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) ms += z[i] * z[i];
  ms /= static_cast<double>(n);
  const double inv = 1.0 / std::sqrt(ms + eps);
  for (std::size_t i = 0; i < n; ++i) z[i] *= inv;
  return {0.0, inv};
}

// LN(z) = (z - E[z]) / sqrt(Var[z] + eps) * gamma + beta, population variance.
inline std::vector<double> normalize_layer(const std::vector<double>& z,
                                           const std::vector<double>& gamma,
                                           const std::vector<double>& beta, double eps) {
  if (gamma.size() != z.size() || beta.size() != z.size())
    throw std::invalid_argument("normalize_layer: size mismatch");
  std::vector<double> out = z;
  layer_standardize(out.data(), out.size(), eps);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * gamma[i] + beta[i];
  return out;
}

// RMSNorm(z) = z / sqrt(mean(z^2) + eps) * gamma.
inline std::vector<double> normalize_rms(const std::vector<double>& z,
                                         const std::vector<double>& gamma, double eps) {
  if (gamma.size() != z.size())
    throw std::invalid_argument("normalize_rms: size mismatch");
  std::vector<double> out = z;
  rms_standardize(out.data(), out.size(), eps);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= gamma[i];
  return out;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Fine for the
// d<=128 spectra this project works with.
inline std::vector<double> symmetric_eigenvalues(RealMatrix a) {
  if (a.rows != a.cols) throw std::invalid_argument("symmetric_eigenvalues: non-square input");
  const std::size_t n = a.rows;
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};

  double scale = 0.0;
  for (double v : a.data) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return std::vector<double>(n, 0.0);
  const double tol = 1e-15 * scale;

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * static_cast<double>(n)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= tol * 1e-3) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

// Singular values of a square matrix, descending, obtained from the symmetric
// eigenproblem of Z*Z^T followed by sqrt(|lambda|).
inline std::vector<double> sym_singular_values(const RealMatrix& z) {
  if (z.rows != z.cols) throw std::invalid_argument("sym_singular_values: non-square input");
  RealMatrix zzt;
  matmul_nt(z, z, zzt);
  std::vector<double> eig = symmetric_eigenvalues(std::move(zzt));
  for (double& v : eig) v = std::sqrt(std::fabs(v));
  std::sort(eig.begin(), eig.end(), std::greater<double>());
  return eig;
}

// Magnitudes of the DFT of real input along the row dimension: entry (k, j) is
// |sum_n w[n,j] * exp(-2*pi*i*k*n/P)| for k = 0..floor(P/2). Direct O(P^2)
// summation with exact mod-P twiddles; P here is small (<= 113) and prime.
inline RealMatrix real_dft_magnitudes(const RealMatrix& w) {
  const std::size_t p = w.rows;
  const std::size_t kmax = p / 2 + 1;
  std::vector<double> cos_tab(p), sin_tab(p);
  const double two_pi = 6.283185307179586476925287;
  for (std::size_t m = 0; m < p; ++m) {
    const double ang = -two_pi * static_cast<double>(m) / static_cast<double>(p);
    cos_tab[m] = std::cos(ang);
    sin_tab[m] = std::sin(ang);
  }
  RealMatrix out(kmax, w.cols);
  for (std::size_t k = 0; k < kmax; ++k) {
    for (std::size_t j = 0; j < w.cols; ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t n = 0; n < p; ++n) {
        const std::size_t m = (k * n) % p;
        const double v = w(n, j);
        re += v * cos_tab[m];
        im += v * sin_tab[m];
      }
      out(k, j) = std::sqrt(re * re + im * im);
    }
  }
  return out;
}

// n i.i.d. draws from Normal(mean, std) rejected outside [lo, hi].
inline std::vector<double> sample_truncated_normal(RngStream& rng, double mean, double std_dev,
                                                   double lo, double hi, std::size_t n) {
  if (!(lo < hi)) throw std::invalid_argument("sample_truncated_normal: lo must be < hi");
  if (!(std_dev > 0.0)) throw std::invalid_argument("sample_truncated_normal: std must be > 0");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x;
    do {
      x = mean + std_dev * rng.normal();
    } while (x < lo || x > hi);
    out[i] = x;
  }
  return out;
}

}  // namespace grok
