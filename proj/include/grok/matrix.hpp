#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace grok {

// Dense row-major matrix of 64-bit floats. All model tensors, activations
// and metric inputs use this one type; vectors are 1xN matrices.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static RealMatrix zeros(std::size_t r, std::size_t c) { return RealMatrix(r, c); }

  static RealMatrix identity(std::size_t n) {
    RealMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  std::size_t size() const { return data.size(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const RealMatrix& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline RealMatrix transpose(const RealMatrix& a) {
  RealMatrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

// C = A * B. The k-major inner loop keeps every per-element reduction in a
// fixed sequential order, so results are reproducible bit-for-bit.
inline void matmul(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
  assert(a.cols == b.rows);
  if (c.rows != a.rows || c.cols != b.cols) c = RealMatrix(a.rows, b.cols);
  const std::size_t m = a.rows, k = a.cols, n = b.cols;
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* ai = a.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const double av = ai[l];
      const double* bl = b.row(l);
      for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
    }
  }
}

// C = A * B^T.
inline void matmul_nt(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
  assert(a.cols == b.cols);
  if (c.rows != a.rows || c.cols != b.rows) c = RealMatrix(a.rows, b.rows);
  const std::size_t m = a.rows, k = a.cols, n = b.rows;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = s;
    }
  }
}

// C += A^T * B, used for weight gradients (sum of outer products over rows).
inline void matmul_tn_acc(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
  assert(a.rows == b.rows);
  assert(c.rows == a.cols && c.cols == b.cols);
  const std::size_t m = a.rows, ka = a.cols, n = b.cols;
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (std::size_t l = 0; l < ka; ++l) {
      const double av = ai[l];
      double* cl = c.row(l);
      for (std::size_t j = 0; j < n; ++j) cl[j] += av * bi[j];
    }
  }
}

inline void add_inplace(RealMatrix& a, const RealMatrix& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline RealMatrix add(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix c = a;
  add_inplace(c, b);
  return c;
}

inline void scale_inplace(RealMatrix& a, double s) {
  for (double& v : a.data) v *= s;
}

inline double frobenius_norm_sq(const RealMatrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return s;
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace grok
