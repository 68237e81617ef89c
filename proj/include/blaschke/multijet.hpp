#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"

namespace blaschke {

inline constexpr int kMaxJetVars = 6;
inline constexpr int kMaxJetOrder = 6;

using MultiIndex = std::array<std::uint8_t, kMaxJetVars>;

// Dense coefficient layout over the simplex {alpha : |alpha| <= order} in
// graded lexicographic order. Shared (immutable) between all jets with equal
// (num_vars, order); the key tables make truncated Cauchy products a single
// indexed lookup, since the mixed-radix keys of two admissible exponent
// vectors add without carries.
class JetLayout {
 public:
  static std::shared_ptr<const JetLayout> get(int num_vars, int order) {
    require(num_vars >= 1 && num_vars <= kMaxJetVars, ErrorKind::bad_argument,
            "jet variable count out of range");
    require(order >= 0 && order <= kMaxJetOrder, ErrorKind::bad_argument,
            "jet order out of range");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{num_vars, order}];
    if (!slot) slot = std::shared_ptr<const JetLayout>(new JetLayout(num_vars, order));
    return slot;
  }

  int num_vars() const { return nv_; }
  int order() const { return d_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const MultiIndex& exponents(int pos) const { return exps_[pos]; }
  int degree(int pos) const { return deg_[pos]; }
  int key(int pos) const { return keys_[pos]; }
  int position_of_key(int key) const { return pos_of_key_[key]; }

  int position(std::span<const int> alpha) const {
    require(static_cast<int>(alpha.size()) == nv_, ErrorKind::bad_argument,
            "multi-index arity mismatch");
    int key = 0, total = 0, stride = 1;
    for (int i = 0; i < nv_; ++i) {
      require(alpha[i] >= 0, ErrorKind::bad_argument, "negative exponent");
      total += alpha[i];
      require(total <= d_, ErrorKind::insufficient_order,
              "multi-index above truncation order");
      key += alpha[i] * stride;
      stride *= d_ + 1;
    }
    return pos_of_key_[key];
  }

 private:
  JetLayout(int nv, int d) : nv_(nv), d_(d) {
    MultiIndex a{};
    for (int g = 0; g <= d; ++g) enumerate(a, 0, g);
    int table = 1;
    for (int i = 0; i < nv; ++i) table *= d + 1;
    pos_of_key_.assign(table, -1);
    keys_.resize(exps_.size());
    deg_.resize(exps_.size());
    for (std::size_t p = 0; p < exps_.size(); ++p) {
      int key = 0, stride = 1, deg = 0;
      for (int i = 0; i < nv; ++i) {
        key += exps_[p][i] * stride;
        stride *= d + 1;
        deg += exps_[p][i];
      }
      keys_[p] = key;
      deg_[p] = static_cast<std::uint8_t>(deg);
      pos_of_key_[key] = static_cast<int>(p);
    }
  }

  void enumerate(MultiIndex& a, int var, int remaining) {
    if (var == nv_ - 1) {
      a[var] = static_cast<std::uint8_t>(remaining);
      exps_.push_back(a);
      a[var] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      a[var] = static_cast<std::uint8_t>(e);
      enumerate(a, var + 1, remaining - e);
    }
    a[var] = 0;
  }

  int nv_, d_;
  std::vector<MultiIndex> exps_;
  std::vector<std::uint8_t> deg_;
  std::vector<int> keys_;
  std::vector<int> pos_of_key_;
};

// Truncated multivariate Taylor expansion of a scalar quantity around a point.
// Immutable value type; all operations are pure. Coefficients are Taylor
// coefficients (not raw derivatives); partial() applies the factorial scale.
template <class S>
class MultiJet {
 public:
  using traits = scalar_traits<S>;

  MultiJet() = default;

  static MultiJet constant(const S& value, int num_vars, int order) {
    MultiJet j(JetLayout::get(num_vars, order));
    j.c_[0] = value;
    return j;
  }

  static MultiJet seed_variable(int var, const S& value, int num_vars, int order) {
    require(var >= 0 && var < num_vars, ErrorKind::bad_argument,
            "seed variable index out of range");
    MultiJet j = constant(value, num_vars, order);
    if (order >= 1) {
      int alpha[kMaxJetVars] = {};
      alpha[var] = 1;
      j.c_[j.layout_->position({alpha, static_cast<std::size_t>(num_vars)})] = S(1);
    }
    return j;
  }

  int num_vars() const { return layout_->num_vars(); }
  int order() const { return layout_->order(); }
  int size() const { return layout_->size(); }
  const JetLayout& layout() const { return *layout_; }

  const S& operator[](int pos) const { return c_[pos]; }
  const S& value() const { return c_[0]; }

  const S& coeff(std::span<const int> alpha) const {
    return c_[layout_->position(alpha)];
  }
  const S& coeff(std::initializer_list<int> alpha) const {
    return coeff(std::span<const int>(alpha.begin(), alpha.size()));
  }

  // True partial derivative at the expansion point: alpha! * coefficient.
  S partial(std::span<const int> alpha) const {
    S f(1);
    for (int x : alpha)
      for (int k = 2; k <= x; ++k) f *= traits::from_int(k);
    return f * coeff(alpha);
  }
  S partial(std::initializer_list<int> alpha) const {
    return partial(std::span<const int>(alpha.begin(), alpha.size()));
  }

  // Lower the truncation order. Graded layouts nest, so this is a prefix copy.
  MultiJet truncated(int new_order) const {
    require(new_order >= 0 && new_order <= order(), ErrorKind::bad_argument,
            "truncation cannot raise the order");
    if (new_order == order()) return *this;
    MultiJet out(JetLayout::get(num_vars(), new_order));
    for (int p = 0; p < out.size(); ++p) out.c_[p] = c_[p];
    return out;
  }

  // d/du_var as a jet one order lower.
  MultiJet derivative(int var) const {
    require(var >= 0 && var < num_vars(), ErrorKind::bad_argument,
            "derivative variable index out of range");
    require(order() >= 1, ErrorKind::insufficient_order,
            "cannot differentiate an order-0 jet");
    MultiJet out(JetLayout::get(num_vars(), order() - 1));
    const auto& L = *layout_;
    for (int p = 0; p < out.size(); ++p) {
      MultiIndex a = out.layout_->exponents(p);
      a[var] += 1;
      // keys live in the source layout's radix (order+1)
      int key = 0, stride = 1;
      for (int i = 0; i < num_vars(); ++i) {
        key += a[i] * stride;
        stride *= L.order() + 1;
      }
      out.c_[p] = traits::from_int(a[var]) * c_[L.position_of_key(key)];
    }
    return out;
  }

  MultiJet operator-() const {
    MultiJet out = *this;
    for (auto& x : out.c_) x = -x;
    return out;
  }

  MultiJet& operator+=(const MultiJet& b) {
    check_same(b);
    for (int p = 0; p < size(); ++p) c_[p] += b.c_[p];
    return *this;
  }
  MultiJet& operator-=(const MultiJet& b) {
    check_same(b);
    for (int p = 0; p < size(); ++p) c_[p] -= b.c_[p];
    return *this;
  }
  MultiJet& operator*=(const MultiJet& b) { return *this = *this * b; }

  friend MultiJet operator+(const MultiJet& a, const MultiJet& b) {
    MultiJet out = a;
    out += b;
    return out;
  }
  friend MultiJet operator-(const MultiJet& a, const MultiJet& b) {
    MultiJet out = a;
    out -= b;
    return out;
  }

  // Truncated Cauchy product.
  friend MultiJet operator*(const MultiJet& a, const MultiJet& b) {
    a.check_same(b);
    const JetLayout& L = *a.layout_;
    MultiJet out(a.layout_);
    const int d = L.order(), m = L.size();
    for (int i = 0; i < m; ++i) {
      if (traits::is_zero(a.c_[i])) continue;
      const int di = L.degree(i), ki = L.key(i);
      for (int j = 0; j < m; ++j) {
        if (L.degree(j) + di > d) break;  // graded order: safe to stop
        if (traits::is_zero(b.c_[j])) continue;
        out.c_[L.position_of_key(ki + L.key(j))] += a.c_[i] * b.c_[j];
      }
    }
    return out;
  }

  friend MultiJet operator/(const MultiJet& a, const MultiJet& b) {
    return a * reciprocal(b);
  }

  friend MultiJet operator+(const MultiJet& a, const S& s) {
    MultiJet out = a;
    out.c_[0] += s;
    return out;
  }
  friend MultiJet operator-(const MultiJet& a, const S& s) {
    MultiJet out = a;
    out.c_[0] -= s;
    return out;
  }
  friend MultiJet operator*(const MultiJet& a, const S& s) {
    MultiJet out = a;
    for (auto& x : out.c_) x *= s;
    return out;
  }
  friend MultiJet operator*(const S& s, const MultiJet& a) { return a * s; }
  friend MultiJet operator/(const MultiJet& a, const S& s) {
    require(!traits::is_zero(s), ErrorKind::domain, "division by zero scalar");
    MultiJet out = a;
    for (auto& x : out.c_) x /= s;
    return out;
  }

  bool operator==(const MultiJet& b) const {
    return layout_->num_vars() == b.layout_->num_vars() &&
           layout_->order() == b.layout_->order() && c_ == b.c_;
  }

  // Evaluates sum_k series[k] * (a - a.value())^k by Horner on the nilpotent
  // part; series.size() must be order()+1. This is the composition kernel for
  // every analytic function below.
  friend MultiJet compose_series(const MultiJet& a, std::span<const S> series) {
    require(static_cast<int>(series.size()) == a.order() + 1,
            ErrorKind::bad_argument, "series length must be order+1");
    MultiJet t = a;
    t.c_[0] = S(0);
    MultiJet r = constant(series[a.order()], a.num_vars(), a.order());
    for (int k = a.order() - 1; k >= 0; --k) {
      r = r * t;
      r.c_[0] += series[k];
    }
    return r;
  }

  friend MultiJet reciprocal(const MultiJet& a) {
    const S& a0 = a.value();
    require(!traits::is_zero(a0), ErrorKind::domain,
            "division by jet with zero constant term");
    std::vector<S> s(a.order() + 1);
    S p = S(1) / a0;
    for (int k = 0; k <= a.order(); ++k) {
      s[k] = p;
      p = -p / a0;
    }
    return compose_series(a, s);
  }

 private:
  explicit MultiJet(std::shared_ptr<const JetLayout> layout)
      : layout_(std::move(layout)), c_(layout_->size(), S(0)) {}

  void check_same(const MultiJet& b) const {
    require(layout_ && b.layout_, ErrorKind::bad_argument, "empty jet");
    require(num_vars() == b.num_vars() && order() == b.order(),
            ErrorKind::bad_argument,
            "jet arithmetic requires matching variable count and order");
  }

  template <class T>
  friend class MultiJet;

  std::shared_ptr<const JetLayout> layout_;
  std::vector<S> c_;
};

namespace detail {

// Binomial series coefficients C(r,k) * a0^(r-k) for r = num/den, a0 > 0.
// Exact mode only admits algebraic operations; the transcendental generators
// below refuse rather than round.
template <class S>
std::vector<S> pow_series(const S& a0, long long num, long long den, int d) {
  using T = scalar_traits<S>;
  std::vector<S> s(d + 1);
  s[0] = T::pow_rational(a0, num, den);
  const S r = T::from_int(num) / T::from_int(den);
  S binom = S(1), apow = S(1);
  for (int k = 1; k <= d; ++k) {
    binom *= (r - T::from_int(k - 1)) / T::from_int(k);
    apow *= a0;
    s[k] = binom * s[0] / apow;
  }
  return s;
}

template <class S>
MultiJet<S> integer_pow(const MultiJet<S>& a, long long n) {
  MultiJet<S> r = MultiJet<S>::constant(S(1), a.num_vars(), a.order());
  MultiJet<S> base = a;
  for (auto k = static_cast<unsigned long long>(n); k; k >>= 1) {
    if (k & 1) r = r * base;
    if (k > 1) base = base * base;
  }
  return r;
}

}  // namespace detail

// a^(num/den). Integer exponents work for any jet (negative ones need an
// invertible constant term); fractional exponents need a positive one.
template <class S>
MultiJet<S> pow_r(const MultiJet<S>& a, long long num, long long den) {
  require(den != 0, ErrorKind::bad_argument, "zero power denominator");
  if (den < 0) {
    den = -den;
    num = -num;
  }
  const long long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (den == 1) {
    if (num >= 0) return detail::integer_pow(a, num);
    return reciprocal(detail::integer_pow(a, -num));
  }
  if (!(a.value() > S(0)))
    fail(ErrorKind::domain, "fractional power requires positive constant term");
  auto s = detail::pow_series<S>(a.value(), num, den, a.order());
  return compose_series(a, std::span<const S>(s));
}

template <class S>
MultiJet<S> sqrt(const MultiJet<S>& a) {
  return pow_r(a, 1, 2);
}

template <class S>
MultiJet<S> exp(const MultiJet<S>& a) {
  using T = scalar_traits<S>;
  if constexpr (T::is_exact)
    fail(ErrorKind::not_exact, "exp has no exact rational jet");
  else {
    std::vector<S> s(a.order() + 1);
    S c = std::exp(a.value());
    for (int k = 0; k <= a.order(); ++k) {
      s[k] = c;
      c /= static_cast<double>(k + 1);
    }
    return compose_series(a, std::span<const S>(s));
  }
}

template <class S>
MultiJet<S> log(const MultiJet<S>& a) {
  using T = scalar_traits<S>;
  if constexpr (T::is_exact)
    fail(ErrorKind::not_exact, "log has no exact rational jet");
  else {
    require(a.value() > 0, ErrorKind::domain, "log requires positive constant term");
    std::vector<S> s(a.order() + 1);
    s[0] = std::log(a.value());
    double p = 1.0 / a.value();
    for (int k = 1; k <= a.order(); ++k) {
      s[k] = (k % 2 ? p : -p) / k;
      p /= a.value();
    }
    return compose_series(a, std::span<const S>(s));
  }
}

namespace detail {

template <class S, class F0, class F1>
MultiJet<S> cyclic_series(const MultiJet<S>& a, F0 f, F1 g, bool trig) {
  // trig: derivatives cycle f, g, -f, -g; hyperbolic: f, g, f, g.
  std::vector<S> s(a.order() + 1);
  double v0 = f(a.value()), v1 = g(a.value());
  double fact = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    double dk;
    switch (k % 4) {
      case 0: dk = v0; break;
      case 1: dk = v1; break;
      case 2: dk = trig ? -v0 : v0; break;
      default: dk = trig ? -v1 : v1; break;
    }
    s[k] = dk / fact;
    fact *= k + 1;
  }
  return compose_series(a, std::span<const S>(s));
}

}  // namespace detail

template <class S>
MultiJet<S> sin(const MultiJet<S>& a) {
  if constexpr (scalar_traits<S>::is_exact)
    fail(ErrorKind::not_exact, "sin has no exact rational jet");
  else
    return detail::cyclic_series<S>(
        a, [](double x) { return std::sin(x); },
        [](double x) { return std::cos(x); }, true);
}

template <class S>
MultiJet<S> cos(const MultiJet<S>& a) {
  if constexpr (scalar_traits<S>::is_exact)
    fail(ErrorKind::not_exact, "cos has no exact rational jet");
  else
    return detail::cyclic_series<S>(
        a, [](double x) { return std::cos(x); },
        [](double x) { return -std::sin(x); }, true);
}

template <class S>
MultiJet<S> sinh(const MultiJet<S>& a) {
  if constexpr (scalar_traits<S>::is_exact)
    fail(ErrorKind::not_exact, "sinh has no exact rational jet");
  else
    return detail::cyclic_series<S>(
        a, [](double x) { return std::sinh(x); },
        [](double x) { return std::cosh(x); }, false);
}

template <class S>
MultiJet<S> cosh(const MultiJet<S>& a) {
  if constexpr (scalar_traits<S>::is_exact)
    fail(ErrorKind::not_exact, "cosh has no exact rational jet");
  else
    return detail::cyclic_series<S>(
        a, [](double x) { return std::cosh(x); },
        [](double x) { return std::sinh(x); }, false);
}

}  // namespace blaschke
