#pragma once

#include <span>
#include <utility>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"
#include "linalg.hpp"
#include "multijet.hpp"
#include "scalar.hpp"

namespace blaschke {

template <class T>
struct Tensor3 {
  int n = 0;
  std::vector<T> v;
  Tensor3() = default;
  explicit Tensor3(int n_) : n(n_), v(static_cast<std::size_t>(n_) * n_ * n_) {}
  T& operator()(int a, int b, int c) { return v[(static_cast<std::size_t>(a) * n + b) * n + c]; }
  const T& operator()(int a, int b, int c) const {
    return v[(static_cast<std::size_t>(a) * n + b) * n + c];
  }
};

template <class T>
struct Tensor4 {
  int n = 0;
  std::vector<T> v;
  Tensor4() = default;
  explicit Tensor4(int n_)
      : n(n_), v(static_cast<std::size_t>(n_) * n_ * n_ * n_) {}
  T& operator()(int a, int b, int c, int d) {
    return v[((static_cast<std::size_t>(a) * n + b) * n + c) * n + d];
  }
  const T& operator()(int a, int b, int c, int d) const {
    return v[((static_cast<std::size_t>(a) * n + b) * n + c) * n + d];
  }
};

template <class T>
struct Tensor5 {
  int n = 0;
  std::vector<T> v;
  Tensor5() = default;
  explicit Tensor5(int n_)
      : n(n_), v(static_cast<std::size_t>(n_) * n_ * n_ * n_ * n_) {}
  T& operator()(int a, int b, int c, int d, int e) {
    return v[(((static_cast<std::size_t>(a) * n + b) * n + c) * n + d) * n + e];
  }
  const T& operator()(int a, int b, int c, int d, int e) const {
    return v[(((static_cast<std::size_t>(a) * n + b) * n + c) * n + d) * n + e];
  }
};

struct PipelineOptions {
  int jet_order = 5;
  double tol_solve = 1e-9;  // Weingarten tangency gate
};

// Pointwise metric data. christoffel(k,i,j) is the Levi-Civita symbol of h
// with upper index k; dh(k,i,j) = d_k h_ij; d2h(l,k,i,j) = d_l d_k h_ij.
template <class S>
struct MetricData {
  DMat<S> h, h_inv;
  S det_h = S(0);
  Tensor3<S> christoffel;
  Tensor3<S> dh;
  Tensor4<S> d2h;
};

// Every pointwise invariant of the immersion at one chart point.
// Index conventions (all coordinate-frame components):
//   shape(j,i)              S^j_i, column i is the image of d_i
//   induced(k,i,j)          induced connection coefficients
//   difference(k,i,j)       K^k_ij = induced - christoffel
//   cubic(i,j,k)            C_ijk = h_kl K^l_ij (totally symmetric)
//   curvature(l,k,i,j)      R(d_i,d_j)d_k = R^l_kij d_l
//   nabla_k(l,m,i,j)        (nabla_m K)^l_ij
//   nabla2_k(l,w,z,i,j)     second covariant derivative, outer slot w
//   nabla_ricci(m,i,j)      (nabla_m Ric)_ij
template <class S>
struct BlaschkeData {
  int n = 0;
  int jet_order = 0;
  MetricData<S> metric;
  std::vector<S> normal;  // affine normal, ambient components
  DMat<S> d_normal;       // d_normal(i,a) = d_i of normal component a
  DMat<S> shape;
  S mean_curvature = S(0);
  Tensor3<S> induced;
  Tensor3<S> difference;
  Tensor3<S> cubic;
  Tensor4<S> curvature;
  DMat<S> ricci;
  Tensor4<S> nabla_k;
  bool has_second_derivatives = false;  // jet order >= 5 fields below
  Tensor5<S> nabla2_k;
  Tensor3<S> nabla_ricci;

  // Solve/consistency diagnostics, as plain doubles (exact zeros collapse).
  double immersion_min_sv = 0;
  double metric_min_eigenvalue = 0;
  double weingarten_residual = 0;
  double equiaffine_residual = 0;  // |g - h| from the Gauss decomposition
  double volume_residual = 0;      // |det(dx,xi)^2/det h - 1|
  double metricity_residual = 0;
  double cubic_symmetry_residual = 0;
  double apolarity_residual = 0;
};

namespace detail {

template <class S>
using JetVec = std::vector<MultiJet<S>>;

template <class S>
JetVec<S> truncate_all(const JetVec<S>& v, int order) {
  JetVec<S> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

// Shared first stage: second form, normalized metric, inverse, Christoffel
// symbols and affine normal, all as jets. Requires jet order >= 3.
template <class S>
struct MetricStage {
  int n = 0, d = 0;
  JetVec<S> dx;                    // order d-1 (outer index i, flattened a)
  std::vector<JetVec<S>> ddx;      // ddx[i][j] stored i*n+j, components a; order d-2
  DMat<MultiJet<S>> h;             // order d-2
  DMat<MultiJet<S>> h_inv;         // order d-2
  MultiJet<S> det_h;               // order d-2
  Tensor3<MultiJet<S>> christoffel;  // order d-3
  JetVec<S> normal;                // order d-3
  double immersion_min_sv = 0;
};

template <class S>
MetricStage<S> metric_stage(const JetVec<S>& x) {
  MetricStage<S> st;
  const int n = x[0].num_vars();
  const int d = x[0].order();
  require(static_cast<int>(x.size()) == n + 1, ErrorKind::bad_argument,
          "expected n+1 ambient jets of n variables");
  require(d >= 3, ErrorKind::insufficient_order,
          "metric/normal stage needs jet order >= 3");
  st.n = n;
  st.d = d;
  const int w2 = d - 2, w3 = d - 3;

  st.dx.reserve(static_cast<std::size_t>(n) * (n + 1));
  for (int i = 0; i < n; ++i)
    for (int a = 0; a <= n; ++a) st.dx.push_back(x[a].derivative(i));
  auto dxj = [&](int i, int a) -> const MultiJet<S>& {
    return st.dx[static_cast<std::size_t>(i) * (n + 1) + a];
  };

  // Immersion gate on the Jacobian values.
  {
    DMat<double> J(n + 1, n);
    for (int a = 0; a <= n; ++a)
      for (int i = 0; i < n; ++i) J(a, i) = to_double(dxj(i, a).value());
    st.immersion_min_sv = min_singular_value(J);
    require(st.immersion_min_sv > 1e-10, ErrorKind::rank_deficient,
            "chart differential is rank deficient at this point");
  }

  st.ddx.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto& cell = st.ddx[static_cast<std::size_t>(i) * n + j];
      cell.reserve(n + 1);
      for (int a = 0; a <= n; ++a) cell.push_back(dxj(i, a).derivative(j));
    }

  // Second form G_ij = det(d_1 x, ..., d_n x, d_i d_j x), then the
  // unimodular-invariant normalization h = |det G|^(-1/(n+2)) G.
  DMat<MultiJet<S>> G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      DMat<MultiJet<S>> M(n + 1, n + 1);
      for (int a = 0; a <= n; ++a) {
        for (int c = 0; c < n; ++c) M(a, c) = dxj(c, a).truncated(w2);
        M(a, n) = st.ddx[static_cast<std::size_t>(i) * n + j][a].truncated(w2);
      }
      G(i, j) = determinant(std::move(M));
    }

  {
    DMat<double> Gv(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Gv(i, j) = to_double(G(i, j).value());
    if (classify_definiteness(Gv) != Definiteness::positive)
      fail(ErrorKind::not_definite,
           "second form is not positive definite at this point");
  }

  DMat<MultiJet<S>> Gm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Gm(i, j) = G(i, j);
  MultiJet<S> detG = determinant(std::move(Gm));
  require(detG.value() > S(0), ErrorKind::not_definite,
          "vanishing second-form determinant");
  MultiJet<S> f = pow_r(detG, -1, n + 2);
  st.h = DMat<MultiJet<S>>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) st.h(i, j) = f * G(i, j);

  {
    DMat<MultiJet<S>> hm = st.h;
    st.det_h = determinant(std::move(hm));
  }

  st.h_inv = solve_linear(
      st.h, identity_like(n, MultiJet<S>::constant(S(1), n, w2),
                          MultiJet<S>::constant(S(0), n, w2)));

  // Christoffel symbols of h at order d-3.
  st.christoffel = Tensor3<MultiJet<S>>(n);
  {
    // dh[k](i,j) jets at order d-3
    std::vector<DMat<MultiJet<S>>> dh(n, DMat<MultiJet<S>>(n, n));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dh[k](i, j) = st.h(i, j).derivative(k);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          MultiJet<S> acc = MultiJet<S>::constant(S(0), n, w3);
          for (int l = 0; l < n; ++l)
            acc = acc + st.h_inv(k, l).truncated(w3) *
                            (dh[i](j, l) + dh[j](i, l) - dh[l](i, j));
          st.christoffel(k, i, j) = acc / scalar_traits<S>::from_int(2);
        }
  }

  // Affine normal xi = (1/n) h^ij (dd_ij x - christoffel^k_ij d_k x).
  st.normal.reserve(n + 1);
  for (int a = 0; a <= n; ++a) {
    MultiJet<S> acc = MultiJet<S>::constant(S(0), n, w3);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        MultiJet<S> t = st.ddx[static_cast<std::size_t>(i) * n + j][a].truncated(w3);
        for (int k = 0; k < n; ++k)
          t = t - st.christoffel(k, i, j) * dxj(k, a).truncated(w3);
        acc = acc + st.h_inv(i, j).truncated(w3) * t;
      }
    st.normal.push_back(acc / scalar_traits<S>::from_int(n));
  }
  return st;
}

}  // namespace detail

// Second fundamental form matrix and its definiteness at a point.
template <class S>
std::pair<DMat<S>, Definiteness> second_form(const Chart& chart,
                                             std::span<const S> u) {
  auto x = eval_chart(chart, u, 2);
  {
    // rank gate first: a collapsed Jacobian makes the form meaningless
    DMat<double> J(chart.dim + 1, chart.dim);
    std::vector<int> alpha(chart.dim, 0);
    for (int a = 0; a <= chart.dim; ++a)
      for (int i = 0; i < chart.dim; ++i) {
        std::fill(alpha.begin(), alpha.end(), 0);
        alpha[i] = 1;
        J(a, i) = to_double(x[a].partial(std::span<const int>(alpha)));
      }
    require(min_singular_value(J) > 1e-10, ErrorKind::rank_deficient,
            "chart differential is rank deficient at this point");
  }
  DMat<S> G = detail::second_form_from_jets<S>(x);
  DMat<double> Gv(chart.dim, chart.dim);
  for (int i = 0; i < chart.dim; ++i)
    for (int j = 0; j < chart.dim; ++j) Gv(i, j) = to_double(G(i, j));
  return {std::move(G), classify_definiteness(Gv)};
}

// Full pipeline over raw ambient jets (n+1 jets in n variables). The chart
// wrapper below is the usual entry; this one exists so tests can push
// affinely transformed jets through the identical code path.
template <class S>
BlaschkeData<S> full_invariants_from_jets(const detail::JetVec<S>& x,
                                          const PipelineOptions& opts = {}) {
  using T = scalar_traits<S>;
  const int d = x[0].order();
  require(d >= 4, ErrorKind::insufficient_order,
          "full invariants need jet order >= 4");
  auto st = detail::metric_stage(x);
  const int n = st.n;
  const int w3 = d - 3, w4 = d - 4;

  BlaschkeData<S> out;
  out.n = n;
  out.jet_order = d;
  out.immersion_min_sv = st.immersion_min_sv;

  auto dxj = [&](int i, int a) -> const MultiJet<S>& {
    return st.dx[static_cast<std::size_t>(i) * (n + 1) + a];
  };

  // ---- metric block -----------------------------------------------------
  out.metric.h = DMat<S>(n, n);
  out.metric.h_inv = DMat<S>(n, n);
  out.metric.dh = Tensor3<S>(n);
  out.metric.d2h = Tensor4<S>(n);
  out.metric.christoffel = Tensor3<S>(n);
  out.metric.det_h = st.det_h.value();
  {
    std::vector<int> alpha(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        out.metric.h(i, j) = st.h(i, j).value();
        out.metric.h_inv(i, j) = st.h_inv(i, j).value();
        for (int k = 0; k < n; ++k) {
          std::fill(alpha.begin(), alpha.end(), 0);
          alpha[k] = 1;
          out.metric.dh(k, i, j) = st.h(i, j).partial(std::span<const int>(alpha));
          for (int l = 0; l < n; ++l) {
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[k] += 1;
            alpha[l] += 1;
            out.metric.d2h(l, k, i, j) =
                st.h(i, j).partial(std::span<const int>(alpha));
          }
        }
        for (int k = 0; k < n; ++k)
          out.metric.christoffel(k, i, j) = st.christoffel(k, i, j).value();
      }
  }
  {
    DMat<double> hv(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) hv(i, j) = to_double(out.metric.h(i, j));
    auto ev = symmetric_eigenvalues(hv);
    out.metric_min_eigenvalue = ev.front();
    require(out.metric_min_eigenvalue > 1e-10, ErrorKind::not_definite,
            "affine metric is not positive definite");
  }

  // metricity: nabla h = 0 componentwise
  {
    S worst(0);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          S acc = out.metric.dh(k, i, j);
          for (int l = 0; l < n; ++l)
            acc -= out.metric.christoffel(l, k, i) * out.metric.h(l, j) +
                   out.metric.christoffel(l, k, j) * out.metric.h(i, l);
          S a = T::abs(acc);
          if (worst < a) worst = a;
        }
    out.metricity_residual = to_double(worst);
  }

  // ---- affine normal and shape operator ---------------------------------
  out.normal.resize(n + 1);
  out.d_normal = DMat<S>(n, n + 1);
  for (int a = 0; a <= n; ++a) {
    out.normal[a] = st.normal[a].value();
    for (int i = 0; i < n; ++i)
      out.d_normal(i, a) = st.normal[a].derivative(i).value();
  }

  // volume compatibility: det(d_1 x, ..., d_n x, xi)^2 = det h
  {
    DMat<S> M(n + 1, n + 1);
    for (int a = 0; a <= n; ++a) {
      for (int i = 0; i < n; ++i) M(a, i) = dxj(i, a).value();
      M(a, n) = out.normal[a];
    }
    S det = determinant(std::move(M));
    S ratio = det * det / st.det_h.value();
    out.volume_residual = to_double(T::abs(ratio - S(1)));
  }

  // Weingarten: d_i xi = -S^j_i d_j x, overdetermined by one row; the
  // residual certifies that xi is equiaffine (no normal component).
  {
    if constexpr (T::is_exact) {
      DMat<S> A(n + 1, n), B(n + 1, n);
      for (int a = 0; a <= n; ++a)
        for (int i = 0; i < n; ++i) {
          A(a, i) = dxj(i, a).value();
          B(a, i) = -out.d_normal(i, a);
        }
      auto [X, resid] = lstsq_normal(A, B);
      out.shape = std::move(X);
      out.weingarten_residual = to_double(resid);
    } else {
      DMat<double> A(n + 1, n), B(n + 1, n);
      for (int a = 0; a <= n; ++a)
        for (int i = 0; i < n; ++i) {
          A(a, i) = to_double(dxj(i, a).value());
          B(a, i) = -to_double(out.d_normal(i, a));
        }
      auto [X, resid] = lstsq_qr(A, B);
      out.shape = DMat<S>(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.shape(i, j) = X(i, j);
      out.weingarten_residual = resid;
    }
    require(out.weingarten_residual <= opts.tol_solve, ErrorKind::solve_residual,
            "Weingarten system residual above tolerance");
    out.mean_curvature = S(0);
    for (int i = 0; i < n; ++i) out.mean_curvature += out.shape(i, i);
    out.mean_curvature /= T::from_int(n);
  }

  // ---- induced connection, difference tensor, cubic form ----------------
  Tensor3<MultiJet<S>> Kjets(n);
  {
    const int m = n * (n + 1) / 2;
    DMat<MultiJet<S>> A(n + 1, n + 1), B(n + 1, m);
    for (int a = 0; a <= n; ++a) {
      for (int i = 0; i < n; ++i) A(a, i) = dxj(i, a).truncated(w3);
      A(a, n) = st.normal[a];
    }
    int col = 0;
    std::vector<std::pair<int, int>> cols;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        for (int a = 0; a <= n; ++a)
          B(a, col) = st.ddx[static_cast<std::size_t>(i) * n + j][a].truncated(w3);
        cols.push_back({i, j});
        ++col;
      }
    DMat<MultiJet<S>> X = solve_linear(std::move(A), std::move(B));
    out.induced = Tensor3<S>(n);
    S geq(0);
    for (int c = 0; c < m; ++c) {
      auto [i, j] = cols[c];
      for (int k = 0; k < n; ++k) {
        out.induced(k, i, j) = X(k, c).value();
        out.induced(k, j, i) = X(k, c).value();
        Kjets(k, i, j) = X(k, c) - st.christoffel(k, i, j);
        Kjets(k, j, i) = Kjets(k, i, j);
      }
      // the transversal coefficient must reproduce h
      S dev = T::abs(X(n, c).value() - out.metric.h(i, j));
      if (geq < dev) geq = dev;
    }
    out.equiaffine_residual = to_double(geq);
  }

  out.difference = Tensor3<S>(n);
  out.cubic = Tensor3<S>(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.difference(k, i, j) = Kjets(k, i, j).value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        S acc(0);
        for (int l = 0; l < n; ++l)
          acc += out.metric.h(l, k) * out.difference(l, i, j);
        out.cubic(i, j, k) = acc;
      }
  {
    S worst(0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          S a = T::abs(out.cubic(i, j, k) - out.cubic(i, k, j));
          S b = T::abs(out.cubic(i, j, k) - out.cubic(j, i, k));
          if (worst < a) worst = a;
          if (worst < b) worst = b;
        }
    out.cubic_symmetry_residual = to_double(worst);
  }
  {
    S worst(0);
    for (int k = 0; k < n; ++k) {
      S acc(0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          acc += out.metric.h_inv(i, j) * out.difference(k, i, j);
      S a = T::abs(acc);
      if (worst < a) worst = a;
    }
    out.apolarity_residual = to_double(worst);
  }

  // ---- curvature and first covariant derivatives ------------------------
  Tensor4<MultiJet<S>> Rjets(n);
  out.curvature = Tensor4<S>(n);
  {
    Tensor4<MultiJet<S>> dchrist(n);  // dchrist(i, l, j, k) = d_i christ^l_jk
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            dchrist(i, l, j, k) = st.christoffel(l, j, k).derivative(i);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            MultiJet<S> acc = dchrist(i, l, j, k) - dchrist(j, l, i, k);
            for (int m = 0; m < n; ++m)
              acc = acc + st.christoffel(l, i, m).truncated(w4) *
                              st.christoffel(m, j, k).truncated(w4) -
                          st.christoffel(l, j, m).truncated(w4) *
                              st.christoffel(m, i, k).truncated(w4);
            Rjets(l, k, i, j) = acc;
            out.curvature(l, k, i, j) = acc.value();
          }
  }

  DMat<MultiJet<S>> Ricjets(n, n);
  out.ricci = DMat<S>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      MultiJet<S> acc = MultiJet<S>::constant(S(0), n, w4);
      for (int k = 0; k < n; ++k) acc = acc + Rjets(k, j, k, i);
      Ricjets(i, j) = acc;
      out.ricci(i, j) = acc.value();
    }

  Tensor4<MultiJet<S>> nkjets(n);
  out.nabla_k = Tensor4<S>(n);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          MultiJet<S> acc = Kjets(l, i, j).derivative(m);
          for (int p = 0; p < n; ++p)
            acc = acc +
                  st.christoffel(l, m, p).truncated(w4) * Kjets(p, i, j).truncated(w4) -
                  st.christoffel(p, m, i).truncated(w4) * Kjets(l, p, j).truncated(w4) -
                  st.christoffel(p, m, j).truncated(w4) * Kjets(l, i, p).truncated(w4);
          nkjets(l, m, i, j) = acc;
          out.nabla_k(l, m, i, j) = acc.value();
        }

  // ---- order-5 pieces ----------------------------------------------------
  if (d >= 5) {
    out.has_second_derivatives = true;
    out.nabla2_k = Tensor5<S>(n);
    out.nabla_ricci = Tensor3<S>(n);
    Tensor3<S> christ = out.metric.christoffel;
    for (int l = 0; l < n; ++l)
      for (int w = 0; w < n; ++w)
        for (int z = 0; z < n; ++z)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              S acc = nkjets(l, z, i, j).derivative(w).value();
              for (int p = 0; p < n; ++p)
                acc += christ(l, w, p) * out.nabla_k(p, z, i, j) -
                       christ(p, w, z) * out.nabla_k(l, p, i, j) -
                       christ(p, w, i) * out.nabla_k(l, z, p, j) -
                       christ(p, w, j) * out.nabla_k(l, z, i, p);
              out.nabla2_k(l, w, z, i, j) = acc;
            }
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          S acc = Ricjets(i, j).derivative(m).value();
          for (int p = 0; p < n; ++p)
            acc -= christ(p, m, i) * out.ricci(p, j) +
                   christ(p, m, j) * out.ricci(i, p);
          out.nabla_ricci(m, i, j) = acc;
        }
  }
  return out;
}

template <class S>
BlaschkeData<S> full_invariants(const Chart& chart, std::span<const S> u,
                                const PipelineOptions& opts = {}) {
  require(opts.jet_order >= 4 && opts.jet_order <= kMaxJetOrder,
          ErrorKind::insufficient_order,
          "full invariants need jet order between 4 and 6");
  auto x = eval_chart(chart, u, opts.jet_order);
  return full_invariants_from_jets(x, opts);
}

// Thin per-quantity entry points.
template <class S>
MetricData<S> blaschke_metric(const Chart& chart, std::span<const S> u,
                              const PipelineOptions& opts = {}) {
  return full_invariants(chart, u, opts).metric;
}

template <class S>
std::vector<S> affine_normal(const Chart& chart, std::span<const S> u,
                             int jet_order = 3) {
  require(jet_order >= 3 && jet_order <= kMaxJetOrder,
          ErrorKind::insufficient_order, "affine normal needs jet order >= 3");
  auto x = eval_chart(chart, u, jet_order);
  auto st = detail::metric_stage(x);
  std::vector<S> xi(chart.dim + 1);
  for (int a = 0; a <= chart.dim; ++a) xi[a] = st.normal[a].value();
  return xi;
}

template <class S>
std::pair<DMat<S>, S> shape_operator(const Chart& chart, std::span<const S> u,
                                     const PipelineOptions& opts = {}) {
  auto inv = full_invariants(chart, u, opts);
  return {inv.shape, inv.mean_curvature};
}

// ---- structural identity residuals ----------------------------------------
// All return the max-norm over coordinate components, in the data's scalar.

template <class S>
S check_gauss(const BlaschkeData<S>& b) {
  using T = scalar_traits<S>;
  const int n = b.n;
  const S& H = b.mean_curvature;
  S worst(0);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          S acc = b.curvature(l, k, i, j);
          if (l == i) acc -= H * b.metric.h(j, k);
          if (l == j) acc += H * b.metric.h(i, k);
          for (int p = 0; p < n; ++p)
            acc += b.difference(l, i, p) * b.difference(p, j, k) -
                   b.difference(l, j, p) * b.difference(p, i, k);
          S a = T::abs(acc);
          if (worst < a) worst = a;
        }
  return worst;
}

template <class S>
S check_codazzi(const BlaschkeData<S>& b) {
  using T = scalar_traits<S>;
  const int n = b.n;
  S worst(0);
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          S a = T::abs(b.nabla_k(l, m, i, j) - b.nabla_k(l, i, m, j));
          if (worst < a) worst = a;
        }
  return worst;
}

template <class S>
S check_apolarity(const BlaschkeData<S>& b) {
  using T = scalar_traits<S>;
  const int n = b.n;
  S worst(0);
  for (int k = 0; k < n; ++k) {
    S acc(0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += b.metric.h_inv(i, j) * b.difference(k, i, j);
    S a = T::abs(acc);
    if (worst < a) worst = a;
  }
  return worst;
}

// Cyclic-sum identity obtained from Codazzi plus the Ricci identity.
template <class S>
S check_tsinghua(const BlaschkeData<S>& b) {
  using T = scalar_traits<S>;
  const int n = b.n;
  S worst(0);
  auto term = [&](int l, int w, int xx, int y, int z) {
    S acc(0);
    for (int p = 0; p < n; ++p)
      acc += b.curvature(l, p, w, xx) * b.difference(p, y, z) -
             b.curvature(p, z, w, xx) * b.difference(l, p, y);
    return acc;
  };
  for (int l = 0; l < n; ++l)
    for (int w = 0; w < n; ++w)
      for (int xx = 0; xx < n; ++xx)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) {
            S acc = term(l, w, xx, y, z) + term(l, xx, y, w, z) +
                    term(l, y, w, xx, z);
            S a = T::abs(acc);
            if (worst < a) worst = a;
          }
  return worst;
}

template <class S>
S check_ricci_identity(const BlaschkeData<S>& b) {
  using T = scalar_traits<S>;
  require(b.has_second_derivatives, ErrorKind::insufficient_order,
          "Ricci identity check needs jet order >= 5");
  const int n = b.n;
  S worst(0);
  for (int l = 0; l < n; ++l)
    for (int w = 0; w < n; ++w)
      for (int xx = 0; xx < n; ++xx)
        for (int y = 0; y < n; ++y)
          for (int z = 0; z < n; ++z) {
            S acc = b.nabla2_k(l, w, xx, y, z) - b.nabla2_k(l, xx, w, y, z);
            for (int p = 0; p < n; ++p)
              acc -= b.curvature(l, p, w, xx) * b.difference(p, y, z) -
                     b.curvature(p, y, w, xx) * b.difference(l, p, z) -
                     b.curvature(p, z, w, xx) * b.difference(l, y, p);
            S a = T::abs(acc);
            if (worst < a) worst = a;
          }
  return worst;
}

// Exact-to-double conversion, for the frame machinery and reports.
inline BlaschkeData<double> to_double_data(const BlaschkeData<Rational>& b) {
  BlaschkeData<double> o;
  o.n = b.n;
  o.jet_order = b.jet_order;
  const int n = b.n;
  auto cv = [](const Rational& r) { return r.convert_to<double>(); };
  o.metric.h = DMat<double>(n, n);
  o.metric.h_inv = DMat<double>(n, n);
  o.metric.dh = Tensor3<double>(n);
  o.metric.d2h = Tensor4<double>(n);
  o.metric.christoffel = Tensor3<double>(n);
  o.metric.det_h = cv(b.metric.det_h);
  o.normal.resize(n + 1);
  o.d_normal = DMat<double>(n, n + 1);
  o.shape = DMat<double>(n, n);
  o.mean_curvature = cv(b.mean_curvature);
  o.induced = Tensor3<double>(n);
  o.difference = Tensor3<double>(n);
  o.cubic = Tensor3<double>(n);
  o.curvature = Tensor4<double>(n);
  o.ricci = DMat<double>(n, n);
  o.nabla_k = Tensor4<double>(n);
  o.has_second_derivatives = b.has_second_derivatives;
  if (b.has_second_derivatives) {
    o.nabla2_k = Tensor5<double>(n);
    o.nabla_ricci = Tensor3<double>(n);
    for (std::size_t i = 0; i < b.nabla2_k.v.size(); ++i)
      o.nabla2_k.v[i] = cv(b.nabla2_k.v[i]);
    for (std::size_t i = 0; i < b.nabla_ricci.v.size(); ++i)
      o.nabla_ricci.v[i] = cv(b.nabla_ricci.v[i]);
  }
  for (std::size_t i = 0; i < b.metric.h.a.size(); ++i) {
    o.metric.h.a[i] = cv(b.metric.h.a[i]);
    o.metric.h_inv.a[i] = cv(b.metric.h_inv.a[i]);
    o.shape.a[i] = cv(b.shape.a[i]);
    o.ricci.a[i] = cv(b.ricci.a[i]);
  }
  for (std::size_t i = 0; i < b.metric.dh.v.size(); ++i) {
    o.metric.dh.v[i] = cv(b.metric.dh.v[i]);
    o.metric.christoffel.v[i] = cv(b.metric.christoffel.v[i]);
    o.induced.v[i] = cv(b.induced.v[i]);
    o.difference.v[i] = cv(b.difference.v[i]);
    o.cubic.v[i] = cv(b.cubic.v[i]);
  }
  for (std::size_t i = 0; i < b.metric.d2h.v.size(); ++i) {
    o.metric.d2h.v[i] = cv(b.metric.d2h.v[i]);
    o.curvature.v[i] = cv(b.curvature.v[i]);
    o.nabla_k.v[i] = cv(b.nabla_k.v[i]);
  }
  for (int a = 0; a <= n; ++a) {
    o.normal[a] = cv(b.normal[a]);
    for (int i = 0; i < n; ++i) o.d_normal(i, a) = cv(b.d_normal(i, a));
  }
  o.immersion_min_sv = b.immersion_min_sv;
  o.metric_min_eigenvalue = b.metric_min_eigenvalue;
  o.weingarten_residual = b.weingarten_residual;
  o.equiaffine_residual = b.equiaffine_residual;
  o.volume_residual = b.volume_residual;
  o.metricity_residual = b.metricity_residual;
  o.cubic_symmetry_residual = b.cubic_symmetry_residual;
  o.apolarity_residual = b.apolarity_residual;
  return o;
}

inline const BlaschkeData<double>& to_double_data(const BlaschkeData<double>& b) {
  return b;
}

}  // namespace blaschke
