#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace blaschke {

// Exact rational scalar. Conversions from double are exact (binary64 is a
// dyadic rational), so a chart evaluated at a sampled point stays exact.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Floor of the k-th root of a nonnegative integer, Newton iteration.
inline BigInt iroot_floor(const BigInt& a, unsigned k) {
  if (a <= 1 || k == 1) return a;
  const unsigned bits = static_cast<unsigned>(msb(a)) + 1;
  BigInt x = BigInt(1) << (bits / k + 1);
  while (true) {
    BigInt xk1 = pow(x, k - 1);
    BigInt nx = ((k - 1) * x + a / xk1) / k;
    if (nx >= x) break;
    x = nx;
  }
  while (pow(x, k) > a) --x;
  return x;
}

inline std::optional<BigInt> exact_iroot(const BigInt& a, unsigned k) {
  if (a < 0) return std::nullopt;
  BigInt r = iroot_floor(a, k);
  if (pow(r, k) == a) return r;
  return std::nullopt;
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static double from_int(long long n) { return static_cast<double>(n); }
  static double abs(double x) { return std::fabs(x); }
  static bool is_zero(double x) { return x == 0.0; }

  // a^(num/den) with den > 0.
  static double pow_rational(double a, long long num, long long den) {
    if (a > 0) return std::pow(a, static_cast<double>(num) / static_cast<double>(den));
    if (a == 0) {
      if (num > 0) return 0.0;
      if (num == 0) return 1.0;
      fail(ErrorKind::domain, "zero raised to a negative power");
    }
    if (den == 1) return std::pow(a, static_cast<double>(num));
    fail(ErrorKind::domain, "fractional power of a negative value");
  }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  static Rational from_double(double x) { return Rational(x); }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational from_int(long long n) { return Rational(n); }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
  static bool is_zero(const Rational& x) { return x.is_zero(); }

  // Exact a^(num/den) or ErrorKind::not_exact when the root is irrational.
  static Rational pow_rational(Rational a, long long num, long long den) {
    if (num == 0) return Rational(1);
    if (a.is_zero()) {
      require(num > 0, ErrorKind::domain, "zero raised to a negative power");
      return Rational(0);
    }
    if (num < 0) {
      a = Rational(1) / a;
      num = -num;
    }
    if (a < 0 && den % 2 == 0)
      fail(ErrorKind::domain, "even root of a negative value");
    BigInt p = numerator(a), q = denominator(a);
    bool neg = p < 0;
    if (neg) p = -p;
    p = pow(p, static_cast<unsigned>(num));
    q = pow(q, static_cast<unsigned>(num));
    if (den > 1) {
      auto rp = exact_iroot(p, static_cast<unsigned>(den));
      auto rq = exact_iroot(q, static_cast<unsigned>(den));
      if (!rp || !rq)
        fail(ErrorKind::not_exact, "irrational root in exact arithmetic");
      p = *rp;
      q = *rq;
    }
    Rational r(p, q);
    return neg ? Rational(-r) : r;
  }
};

template <class S>
double to_double(const S& x) {
  return scalar_traits<S>::to_double(x);
}

template <class S>
S abs_of(const S& x) {
  return scalar_traits<S>::abs(x);
}

}  // namespace blaschke
