#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "multijet.hpp"
#include "scalar.hpp"

namespace blaschke {

// Row-major dense matrix over any field-like element type, including jets.
// Sized for the pipeline's n <= 7 systems; no ambitions beyond that.
template <class T>
struct DMat {
  int rows = 0, cols = 0;
  std::vector<T> a;

  DMat() = default;
  DMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
  DMat(int r, int c, const T& fill)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  T& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const T& operator()(int r, int c) const {
    return a[static_cast<std::size_t>(r) * cols + c];
  }
};

namespace detail {

inline double pivot_weight(double x) { return std::fabs(x); }
inline double pivot_weight(const Rational& x) {
  return std::fabs(x.convert_to<double>());
}
template <class S>
double pivot_weight(const MultiJet<S>& x) {
  return pivot_weight(x.value());
}

}  // namespace detail

// Determinant by Gaussian elimination with partial pivoting on the magnitude
// of the element (constant term for jets). Exact over rationals. The final
// column never pivots, so a bordered matrix [J | v] with full-rank J reduces
// even when v is tangent.
template <class T>
T determinant(DMat<T> m) {
  require(m.rows == m.cols, ErrorKind::bad_argument, "determinant of non-square");
  const int n = m.rows;
  bool negate = false;
  for (int k = 0; k + 1 < n; ++k) {
    int piv = k;
    double best = detail::pivot_weight(m(k, k));
    for (int r = k + 1; r < n; ++r) {
      double w = detail::pivot_weight(m(r, k));
      if (w > best) {
        best = w;
        piv = r;
      }
    }
    if (best == 0.0) fail(ErrorKind::rank_deficient, "singular matrix in determinant");
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(m(k, c), m(piv, c));
      negate = !negate;
    }
    for (int r = k + 1; r < n; ++r) {
      T f = m(r, k) / m(k, k);
      for (int c = k; c < n; ++c) m(r, c) -= f * m(k, c);
    }
  }
  T det = m(0, 0);
  for (int k = 1; k < n; ++k) det = det * m(k, k);
  if (negate) det = -det;
  return det;
}

// Solve A X = B in place (Gauss-Jordan, partial pivoting). A is m x m, B is
// m x k; returns X. Works over scalars and jets with invertible constant part.
template <class T>
DMat<T> solve_linear(DMat<T> A, DMat<T> B) {
  require(A.rows == A.cols && A.rows == B.rows, ErrorKind::bad_argument,
          "solve_linear shape mismatch");
  const int n = A.rows, k = B.cols;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = detail::pivot_weight(A(col, col));
    for (int r = col + 1; r < n; ++r) {
      double w = detail::pivot_weight(A(r, col));
      if (w > best) {
        best = w;
        piv = r;
      }
    }
    if (best == 0.0) fail(ErrorKind::rank_deficient, "singular linear system");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(A(col, c), A(piv, c));
      for (int c = 0; c < k; ++c) std::swap(B(col, c), B(piv, c));
    }
    T inv = A(col, col);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      T f = A(r, col) / inv;
      for (int c = col; c < n; ++c) A(r, c) -= f * A(col, c);
      for (int c = 0; c < k; ++c) B(r, c) -= f * B(col, c);
    }
  }
  DMat<T> X(n, k);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < k; ++c) X(r, c) = B(r, c) / A(r, r);
  return X;
}

template <class T>
DMat<T> identity_like(int n, const T& one, const T& zero) {
  DMat<T> I(n, n, zero);
  for (int i = 0; i < n; ++i) I(i, i) = one;
  return I;
}

// ---- double-precision gates (Eigen) ----------------------------------------

inline Eigen::MatrixXd to_eigen(const DMat<double>& m) {
  Eigen::MatrixXd e(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) e(r, c) = m(r, c);
  return e;
}

inline double min_singular_value(const DMat<double>& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  return svd.singularValues().minCoeff();
}

inline std::vector<double> symmetric_eigenvalues(const DMat<double>& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
  std::vector<double> ev(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
  return ev;
}

enum class Definiteness { positive, negative, indefinite };

inline Definiteness classify_definiteness(const DMat<double>& m, double tol = 1e-12) {
  auto ev = symmetric_eigenvalues(m);
  bool pos = true, neg = true;
  for (double x : ev) {
    if (x <= tol) pos = false;
    if (x >= -tol) neg = false;
  }
  if (pos) return Definiteness::positive;
  if (neg) return Definiteness::negative;
  return Definiteness::indefinite;
}

// Least squares via column-pivoted QR; returns the solution matrix and the
// max-norm of the residual A X - B.
inline std::pair<DMat<double>, double> lstsq_qr(const DMat<double>& A,
                                                const DMat<double>& B) {
  Eigen::MatrixXd ea = to_eigen(A), eb = to_eigen(B);
  Eigen::MatrixXd x = ea.colPivHouseholderQr().solve(eb);
  double resid = (ea * x - eb).cwiseAbs().maxCoeff();
  DMat<double> X(static_cast<int>(x.rows()), static_cast<int>(x.cols()));
  for (int r = 0; r < X.rows; ++r)
    for (int c = 0; c < X.cols; ++c) X(r, c) = x(r, c);
  return {X, resid};
}

// Exact-arithmetic least squares through the normal equations (QR would leave
// the rationals). The systems it sees are consistent, so the residual is the
// verification output, not a conditioning hazard.
template <class T>
std::pair<DMat<T>, T> lstsq_normal(const DMat<T>& A, const DMat<T>& B) {
  const int m = A.rows, n = A.cols, k = B.cols;
  DMat<T> AtA(n, n, T(0)), AtB(n, k, T(0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < m; ++r) AtA(i, j) += A(r, i) * A(r, j);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < m; ++r) AtB(i, c) += A(r, i) * B(r, c);
  DMat<T> X = solve_linear(AtA, AtB);
  T resid(0);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < k; ++c) {
      T acc(0);
      for (int j = 0; j < n; ++j) acc += A(r, j) * X(j, c);
      T dev = scalar_traits<T>::abs(acc - B(r, c));
      if (resid < dev) resid = dev;
    }
  return {X, resid};
}

}  // namespace blaschke
