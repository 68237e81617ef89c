#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "multijet.hpp"
#include "scalar.hpp"

namespace blaschke {

enum class ChartKind { paraboloid, ellipsoid, hyperboloid, q1n, calabi, thm12 };
enum class ScalarMode { rational, floating };

// Partition of the intrinsic coordinates into the two product factors.
struct Blocks {
  std::vector<int> first, second;
};

struct ChartSpec {
  ChartKind kind;
  int n1 = 0;  // dimension, or first-factor dimension for calabi
  int n2 = 0;  // second-factor dimension (calabi only)

  int dim() const { return kind == ChartKind::calabi ? n1 + n2 : n1; }

  static ChartSpec paraboloid(int n) { return {ChartKind::paraboloid, n, 0}; }
  static ChartSpec ellipsoid(int n) { return {ChartKind::ellipsoid, n, 0}; }
  static ChartSpec hyperboloid(int n) { return {ChartKind::hyperboloid, n, 0}; }
  static ChartSpec q1n(int n) { return {ChartKind::q1n, n, 0}; }
  static ChartSpec calabi(int n1, int n2) { return {ChartKind::calabi, n1, n2}; }
  static ChartSpec thm12(int n) { return {ChartKind::thm12, n, 0}; }

  std::string name() const;
  bool operator==(const ChartSpec&) const = default;
};

// A parametrized hypersurface patch u -> x(u) in R^(n+1). Immutable after
// construction; evaluation is pure. The validity predicate in_domain() is the
// mathematical one (where the map is defined); sample_box is the smaller
// region suites draw points from, chosen to keep exp/cosh well conditioned.
struct Chart {
  ChartSpec spec;
  int dim = 0;
  int ambient_dim = 0;
  ScalarMode mode = ScalarMode::floating;
  std::vector<std::pair<double, double>> sample_box;
  std::optional<Blocks> blocks;
  bool has_implicit = false;
  double implicit_const = 1.0;
  bool flip_last = false;  // orientation normalization, fixed at construction

  bool in_domain(std::span<const double> u) const {
    if (static_cast<int>(u.size()) != dim) return false;
    switch (spec.kind) {
      case ChartKind::ellipsoid: {
        double s = 0;
        for (double v : u) s += v * v;
        return s < 0.9 * 0.9;
      }
      case ChartKind::calabi: {
        const double chi = u[spec.n1];
        if (chi < 0) return false;
        for (int i = spec.n1 + 1; i + 1 < dim; ++i)  // polar angles
          if (u[i] < 0 || u[i] > 3.14159265358979323846) return false;
        return true;
      }
      case ChartKind::thm12: {
        if (u[1] < 0) return false;
        for (int i = 2; i + 1 < dim; ++i)
          if (u[i] < 0 || u[i] > 3.14159265358979323846) return false;
        return true;
      }
      default:
        return true;  // entire graphs / exponential charts
    }
  }

  std::vector<double> sample_center() const {
    std::vector<double> c(dim);
    for (int i = 0; i < dim; ++i)
      c[i] = 0.5 * (sample_box[i].first + sample_box[i].second);
    return c;
  }
};

inline const char* kind_token(ChartKind k) {
  switch (k) {
    case ChartKind::paraboloid: return "paraboloid";
    case ChartKind::ellipsoid: return "ellipsoid";
    case ChartKind::hyperboloid: return "hyperboloid";
    case ChartKind::q1n: return "q1n";
    case ChartKind::calabi: return "calabi";
    case ChartKind::thm12: return "thm12";
  }
  return "?";
}

inline std::optional<ChartKind> kind_from_token(const std::string& s) {
  for (ChartKind k : {ChartKind::paraboloid, ChartKind::ellipsoid,
                      ChartKind::hyperboloid, ChartKind::q1n, ChartKind::calabi,
                      ChartKind::thm12})
    if (s == kind_token(k)) return k;
  return std::nullopt;
}

inline std::string ChartSpec::name() const {
  if (kind == ChartKind::calabi)
    return std::string(kind_token(kind)) + "(" + std::to_string(n1) + "," +
           std::to_string(n2) + ")";
  return std::string(kind_token(kind)) + "(" + std::to_string(n1) + ")";
}

namespace detail {

// Angular chart of the unit sphere S^m in R^(m+1):
//   w_k = cos(phi_k) * prod_{i<k} sin(phi_i),   w_{m+1} = prod sin(phi_i).
template <class S>
std::vector<MultiJet<S>> sphere_jets(std::span<const MultiJet<S>> phi) {
  const int m = static_cast<int>(phi.size());
  std::vector<MultiJet<S>> w;
  w.reserve(m + 1);
  MultiJet<S> running =
      MultiJet<S>::constant(S(1), phi[0].num_vars(), phi[0].order());
  for (int k = 0; k < m; ++k) {
    w.push_back(running * cos(phi[k]));
    running = running * sin(phi[k]);
  }
  w.push_back(running);
  return w;
}

}  // namespace detail

// Jets of the n+1 ambient coordinate functions at u, truncated at `order`.
template <class S>
std::vector<MultiJet<S>> eval_chart(const Chart& chart, std::span<const S> u,
                                    int order) {
  const int n = chart.dim;
  require(static_cast<int>(u.size()) == n, ErrorKind::bad_argument,
          "point arity does not match chart dimension");
  {
    std::vector<double> ud(n);
    for (int i = 0; i < n; ++i) ud[i] = to_double(u[i]);
    require(chart.in_domain(ud), ErrorKind::domain, "point outside chart domain");
  }
  auto seed = [&](int i) { return MultiJet<S>::seed_variable(i, u[i], n, order); };
  auto c1 = [&](long long v) {
    return MultiJet<S>::constant(scalar_traits<S>::from_int(v), n, order);
  };

  std::vector<MultiJet<S>> x;
  x.reserve(n + 1);
  switch (chart.spec.kind) {
    case ChartKind::paraboloid: {
      auto half = c1(0);
      for (int i = 0; i < n; ++i) {
        x.push_back(seed(i));
        half = half + x[i] * x[i];
      }
      x.push_back(half / scalar_traits<S>::from_int(2));
      break;
    }
    case ChartKind::ellipsoid:
    case ChartKind::hyperboloid: {
      const bool hyper = chart.spec.kind == ChartKind::hyperboloid;
      auto acc = c1(1);
      for (int i = 0; i < n; ++i) {
        x.push_back(seed(i));
        auto sq = x[i] * x[i];
        acc = hyper ? acc + sq : acc - sq;
      }
      x.push_back(sqrt(acc));
      break;
    }
    case ChartKind::q1n: {
      auto sum = c1(0);
      for (int i = 0; i < n; ++i) {
        auto s = seed(i);
        sum = sum + s;
        x.push_back(exp(s));
      }
      x.push_back(exp(-sum));
      break;
    }
    case ChartKind::calabi: {
      const int n1 = chart.spec.n1, n2 = chart.spec.n2;
      auto sum = c1(0);
      for (int i = 0; i < n1; ++i) {
        auto s = seed(i);
        sum = sum + s;
        x.push_back(exp(s));
      }
      auto rho = exp(-(sum / scalar_traits<S>::from_int(n2 + 1)));
      auto chi = seed(n1);
      std::vector<MultiJet<S>> phi;
      for (int i = n1 + 1; i < n; ++i) phi.push_back(seed(i));
      auto omega = detail::sphere_jets<S>(phi);  // S^(n2-1) in R^(n2)
      auto rs = rho * sinh(chi);
      for (int a = 0; a < n2; ++a) x.push_back(rs * omega[a]);
      x.push_back(rho * cosh(chi));
      break;
    }
    case ChartKind::thm12: {
      auto s = seed(0);
      x.push_back(exp(s));
      auto rho = exp(-(s / scalar_traits<S>::from_int(n)));
      auto chi = seed(1);
      std::vector<MultiJet<S>> phi;
      for (int i = 2; i < n; ++i) phi.push_back(seed(i));
      auto omega = detail::sphere_jets<S>(phi);  // S^(n-2) in R^(n-1)
      auto rs = rho * sinh(chi);
      for (int a = 0; a < n - 1; ++a) x.push_back(rs * omega[a]);
      x.push_back(rho * cosh(chi));
      break;
    }
  }
  if (chart.flip_last) x.back() = -x.back();
  return x;
}

// P(x(u)) - const for the chart's implicit defining polynomial.
template <class S>
S implicit_residual(const Chart& chart, std::span<const S> u) {
  require(chart.has_implicit, ErrorKind::bad_argument,
          "chart has no implicit equation");
  auto x = eval_chart(chart, u, 0);
  const int n = chart.dim;
  auto sq = [](const S& v) { return v * v; };
  S P(0);
  switch (chart.spec.kind) {
    case ChartKind::paraboloid: {
      S s(0);
      for (int i = 0; i < n; ++i) s += sq(x[i].value());
      P = x[n].value() - s / scalar_traits<S>::from_int(2);
      break;
    }
    case ChartKind::ellipsoid: {
      for (int i = 0; i <= n; ++i) P += sq(x[i].value());
      break;
    }
    case ChartKind::hyperboloid: {
      P = sq(x[n].value());
      for (int i = 0; i < n; ++i) P -= sq(x[i].value());
      break;
    }
    case ChartKind::q1n: {
      P = S(1);
      for (int i = 0; i <= n; ++i) P *= x[i].value();
      break;
    }
    case ChartKind::calabi:
    case ChartKind::thm12: {
      const int n1 = chart.spec.kind == ChartKind::calabi ? chart.spec.n1 : 1;
      const int n2 = n - n1;
      S prod(1);
      for (int i = 0; i < n1; ++i) prod *= x[i].value();
      S lorentz = sq(x[n].value());
      for (int i = n1; i < n; ++i) lorentz -= sq(x[i].value());
      P = sq(prod);
      for (int e = 0; e < n2 + 1; ++e) P *= lorentz;
      break;
    }
  }
  return P - scalar_traits<S>::from_double(chart.implicit_const);
}

namespace detail {

// Second-form matrix G_ij = det(d_1 x, ..., d_n x, d_i d_j x) as plain values.
template <class S>
DMat<S> second_form_from_jets(std::span<const MultiJet<S>> x) {
  const int n = x[0].num_vars();
  require(x[0].order() >= 2, ErrorKind::insufficient_order,
          "second form needs jet order >= 2");
  std::vector<int> alpha(n, 0);
  auto idx = [&](int i, int j) {
    std::fill(alpha.begin(), alpha.end(), 0);
    alpha[i] += 1;
    if (j >= 0) alpha[j] += 1;
    return std::span<const int>(alpha);
  };
  DMat<S> J(n + 1, n);
  for (int a = 0; a <= n; ++a)
    for (int i = 0; i < n; ++i) J(a, i) = x[a].partial(idx(i, -1));
  DMat<S> G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      DMat<S> M(n + 1, n + 1);
      for (int a = 0; a <= n; ++a) {
        for (int c = 0; c < n; ++c) M(a, c) = J(a, c);
        M(a, n) = x[a].partial(idx(i, j));
      }
      G(i, j) = determinant(std::move(M));
    }
  return G;
}

inline DMat<double> second_form_values(const Chart& chart,
                                       std::span<const double> u) {
  auto x = eval_chart<double>(chart, u, 2);
  return second_form_from_jets<double>(x);
}

}  // namespace detail

inline Chart make_chart(const ChartSpec& spec) {
  Chart c;
  c.spec = spec;
  const double pi = 3.14159265358979323846;
  const double margin = 0.1;
  switch (spec.kind) {
    case ChartKind::paraboloid:
    case ChartKind::ellipsoid:
    case ChartKind::hyperboloid:
    case ChartKind::q1n: {
      require(spec.n1 >= 2 && spec.n1 <= kMaxJetVars, ErrorKind::bad_argument,
              "dimension out of range for " + std::string(kind_token(spec.kind)));
      c.dim = spec.n1;
      if (spec.kind == ChartKind::ellipsoid) {
        const double r = 0.899 / std::sqrt(static_cast<double>(c.dim));
        c.sample_box.assign(c.dim, {-r, r});
      } else {
        c.sample_box.assign(c.dim, {-1.0, 1.0});
      }
      if (spec.kind == ChartKind::paraboloid) {
        c.mode = ScalarMode::rational;
        c.implicit_const = 0.0;
        Blocks b;
        for (int i = 0; i < (c.dim + 1) / 2; ++i) b.first.push_back(i);
        for (int i = (c.dim + 1) / 2; i < c.dim; ++i) b.second.push_back(i);
        c.blocks = b;
      }
      break;
    }
    case ChartKind::calabi: {
      require(spec.n1 >= 1 && spec.n2 >= 2 && spec.dim() <= kMaxJetVars,
              ErrorKind::bad_argument, "calabi factors out of range");
      c.dim = spec.dim();
      for (int i = 0; i < spec.n1; ++i) c.sample_box.push_back({-1.0, 1.0});
      c.sample_box.push_back({margin, 1.5});  // chi
      for (int i = 0; i < spec.n2 - 2; ++i)
        c.sample_box.push_back({margin, pi - margin});  // polar angles
      c.sample_box.push_back({margin, 2 * pi - margin});  // azimuthal angle
      Blocks b;
      for (int i = 0; i < spec.n1; ++i) b.first.push_back(i);
      for (int i = spec.n1; i < c.dim; ++i) b.second.push_back(i);
      c.blocks = b;
      break;
    }
    case ChartKind::thm12: {
      require(spec.n1 >= 3 && spec.n1 <= kMaxJetVars, ErrorKind::bad_argument,
              "dimension out of range for thm12");
      c.dim = spec.n1;
      c.sample_box.push_back({-1.0, 1.0});  // s
      c.sample_box.push_back({margin, 1.5});  // chi
      for (int i = 0; i < c.dim - 3; ++i)
        c.sample_box.push_back({margin, pi - margin});
      c.sample_box.push_back({margin, 2 * pi - margin});
      Blocks b;
      b.first.push_back(0);
      for (int i = 1; i < c.dim; ++i) b.second.push_back(i);
      c.blocks = b;
      break;
    }
  }
  c.ambient_dim = c.dim + 1;
  c.has_implicit = true;
  if (spec.kind != ChartKind::paraboloid) c.implicit_const = 1.0;

  // Orientation: flip the last ambient coordinate once if the second form
  // comes out negative definite, so the affine metric is positive definite.
  auto center = c.sample_center();
  auto G = detail::second_form_values(c, center);
  switch (classify_definiteness(G)) {
    case Definiteness::positive:
      break;
    case Definiteness::negative:
      c.flip_last = true;
      break;
    case Definiteness::indefinite:
      fail(ErrorKind::not_definite, "chart is not locally strongly convex");
  }
  return c;
}

inline std::vector<ChartSpec> catalog_families() {
  return {ChartSpec::paraboloid(3), ChartSpec::ellipsoid(3),
          ChartSpec::hyperboloid(3), ChartSpec::q1n(3), ChartSpec::calabi(2, 2),
          ChartSpec::thm12(3)};
}

inline std::string implicit_equation_text(ChartKind kind) {
  switch (kind) {
    case ChartKind::paraboloid:
      return "x_{n+1} = (x_1^2 + ... + x_n^2)/2";
    case ChartKind::ellipsoid:
      return "x_1^2 + ... + x_{n+1}^2 = 1";
    case ChartKind::hyperboloid:
      return "x_{n+1}^2 - x_1^2 - ... - x_n^2 = 1";
    case ChartKind::q1n:
      return "x_1 x_2 ... x_{n+1} = 1";
    case ChartKind::calabi:
      return "(x_1...x_{n1})^2 (x_{n+1}^2 - x_{n1+1}^2 - ... - x_n^2)^{n2+1} = 1";
    case ChartKind::thm12:
      return "x_1^2 (x_{n+1}^2 - x_2^2 - ... - x_n^2)^n = 1";
  }
  return "";
}

inline std::string chart_description(ChartKind kind) {
  switch (kind) {
    case ChartKind::paraboloid:
      return "improper affine sphere (H = 0), flat metric, zero cubic form";
    case ChartKind::ellipsoid:
      return "elliptic affine sphere (H > 0), quadric, zero cubic form";
    case ChartKind::hyperboloid:
      return "hyperbolic affine sphere (H < 0), quadric, zero cubic form";
    case ChartKind::q1n:
      return "hyperbolic affine sphere, flat metric, parallel cubic form";
    case ChartKind::calabi:
      return "product-type hyperbolic affine sphere: flat n1-factor times a "
             "negatively curved n2-factor";
    case ChartKind::thm12:
      return "product-type hyperbolic affine sphere with a one-dimensional "
             "flat factor";
  }
  return "";
}

}  // namespace blaschke
