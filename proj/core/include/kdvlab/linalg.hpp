#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace kdvlab {

// 2x2 real matrix, row major.
struct Mat2 {
  double a00 = 0, a01 = 0, a10 = 0, a11 = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
  }
  Mat2 transpose() const { return {a00, a10, a01, a11}; }
  double frobenius_sq() const { return a00 * a00 + a01 * a01 + a10 * a10 + a11 * a11; }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a00 * b.a00 + a.a01 * b.a10, a.a00 * b.a01 + a.a01 * b.a11,
          a.a10 * b.a00 + a.a11 * b.a10, a.a10 * b.a01 + a.a11 * b.a11};
}
inline Mat2 operator*(double s, const Mat2& m) {
  return {s * m.a00, s * m.a01, s * m.a10, s * m.a11};
}
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a00 + b.a00, a.a01 + b.a01, a.a10 + b.a10, a.a11 + b.a11};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
}

// Dense row-major matrix; just enough for the averaging pipeline.
struct DenseMat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  DenseMat() = default;
  DenseMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  // max_{ij} |A_ij - A_ji|; meaningful for square matrices only.
  double asymmetry() const {
    assert(rows == cols);
    double m = 0;
    for (int i = 0; i < rows; ++i)
      for (int j = i + 1; j < cols; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }
  void symmetrize() {
    assert(rows == cols);
    for (int i = 0; i < rows; ++i)
      for (int j = i + 1; j < cols; ++j) {
        const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = v;
        (*this)(j, i) = v;
      }
  }
  double max_abs_diff(const DenseMat& o) const {
    assert(rows == o.rows && cols == o.cols);
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - o.a[i]));
    return m;
  }
};

// Fixed-order pairwise tree reduction. Summation order depends only on the
// number of terms, never on scheduling, so concurrent producers stay
// bit-reproducible as long as they fill `terms` by index.
inline double pairwise_sum(std::vector<double> terms) {
  if (terms.empty()) return 0.0;
  size_t n = terms.size();
  while (n > 1) {
    const size_t h = n / 2;
    for (size_t i = 0; i < h; ++i) terms[i] = terms[2 * i] + terms[2 * i + 1];
    if (n % 2) terms[h] = terms[n - 1];
    n = h + n % 2;
  }
  return terms[0];
}

// Pairwise tree sum over Q vectors of common dimension d, laid out row-major
// (terms[q*d + i]). Reduces along q for every component i.
inline std::vector<double> pairwise_sum_rows(std::vector<double> terms, size_t q, size_t d) {
  assert(terms.size() == q * d);
  if (q == 0) return std::vector<double>(d, 0.0);
  size_t n = q;
  while (n > 1) {
    const size_t h = n / 2;
    for (size_t i = 0; i < h; ++i)
      for (size_t c = 0; c < d; ++c)
        terms[i * d + c] = terms[2 * i * d + c] + terms[(2 * i + 1) * d + c];
    if (n % 2)
      for (size_t c = 0; c < d; ++c) terms[h * d + c] = terms[(n - 1) * d + c];
    n = h + n % 2;
  }
  terms.resize(d);
  return terms;
}

}  // namespace kdvlab
