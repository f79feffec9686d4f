#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "sfl/errors.hpp"

namespace sfl {

// All quantities that feed decisions are exact rationals; doubles appear only
// in displayed output and Monte Carlo summaries.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const Int& num, const Int& den) {
  if (den == 0) throw ConfigError("rational: zero denominator");
  return Rational(num, den);
}

inline Rational make_rational(long long num, long long den) {
  if (den == 0) throw ConfigError("rational: zero denominator");
  return Rational(Int(num), Int(den));
}

// Accepts "a/b" or a bare integer "a".
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ParseError("rational: empty string");
  auto is_int = [](const std::string& s) {
    if (s.empty()) return false;
    size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size()) return false;
    for (size_t i = start; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  size_t slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      if (!is_int(text)) throw ParseError("rational: malformed '" + text + "'");
      return Rational(Int(text));
    }
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (!is_int(num) || !is_int(den)) throw ParseError("rational: malformed '" + text + "'");
    Int d(den);
    if (d == 0) throw ParseError("rational: zero denominator in '" + text + "'");
    return Rational(Int(num), d);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("rational: malformed '" + text + "'");
  }
}

inline std::string format_rational(const Rational& r) {
  std::string num = numerator(r).str();
  if (denominator(r) == 1) return num;
  return num + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.template convert_to<double>(); }

// Rounds x down to a multiple of 2^-bits. Keeps long approximation chains
// from ballooning denominators; the error introduced is below 2^-bits.
inline Rational floor_to_bits(const Rational& x, int bits) {
  Int scale = Int(1) << bits;
  Int scaled_num = numerator(x) * scale;
  Int q = scaled_num / denominator(x);
  if (q < 0 && q * denominator(x) != scaled_num) q -= 1;
  return Rational(q, scale);
}

namespace detail {

// e^-x for 0 <= x <= 1/2 by alternating Taylor series, truncation below
// 2^-(bits+8).
inline Rational exp_neg_small(const Rational& x, int bits) {
  Rational bound = Rational(1, Int(1) << (bits + 8));
  Rational term(1), sum(1);
  for (int n = 1; n < 1000; ++n) {
    term = term * x / n;
    if (term < bound) break;
    if (n % 2 == 1)
      sum -= term;
    else
      sum += term;
  }
  return sum;
}

}  // namespace detail

// Deterministic rational approximation of e^-x for x >= 0, absolute error
// below 2^-bits (bits <= 110). Uses halving plus repeated squaring, rounding
// intermediates to keep the arithmetic desk-scale.
inline Rational approx_exp_neg(const Rational& x, int bits = 96) {
  if (x < 0) throw ConfigError("approx_exp_neg: negative argument");
  if (bits > 110) throw ConfigError("approx_exp_neg: precision beyond supported range");
  Rational y = x;
  int halvings = 0;
  while (y > Rational(1, 2)) {
    y /= 2;
    ++halvings;
    if (halvings > 64) return Rational(0);  // e^-x below any tracked precision
  }
  int work = bits + 2 * halvings + 16;
  Rational r = detail::exp_neg_small(y, work);
  for (int i = 0; i < halvings; ++i) r = floor_to_bits(r * r, work);
  return floor_to_bits(r, bits);
}

// Natural log of a positive integer, error below 2^-bits. Splits n into
// m * 2^k with m in [1,2) and evaluates 2*atanh((m-1)/(m+1)) term by term.
inline Rational approx_ln(const Int& n, int bits = 64) {
  if (n <= 0) throw ConfigError("approx_ln: argument must be positive");
  // explicit return type: boost arithmetic yields expression templates that
  // must not outlive the locals they reference
  auto atanh_series = [bits](const Rational& z) -> Rational {
    Rational bound = Rational(1, Int(1) << (bits + 12));
    Rational z2 = z * z, term = z, sum = z;
    for (int k = 1; k < 2000; ++k) {
      term = floor_to_bits(term * z2, bits + 24);
      Rational inc = term / (2 * k + 1);
      sum += inc;
      if (inc < bound) break;
    }
    return 2 * sum;
  };
  int k = 0;
  Int m = n;
  while (m >= 2) {
    m >>= 1;
    ++k;
  }
  // n / 2^k in [1,2)
  Rational frac = Rational(n, Int(1) << k);
  Rational ln_frac = atanh_series((frac - 1) / (frac + 1));
  Rational ln2 = atanh_series(Rational(1, 3));
  return floor_to_bits(ln_frac + k * ln2, bits);
}

// Square root of a nonnegative rational, error below 2^-bits. Newton
// iteration started from the double estimate.
inline Rational approx_sqrt(const Rational& x, int bits = 64) {
  if (x < 0) throw ConfigError("approx_sqrt: negative argument");
  if (x == 0) return Rational(0);
  double seed = to_double(x);
  Rational s = floor_to_bits(Rational(seed > 0 ? std::sqrt(seed) : 1.0), 52);
  if (s <= 0) s = 1;
  Rational tol = Rational(1, Int(1) << bits);
  for (int it = 0; it < 200; ++it) {
    s = floor_to_bits((s + x / s) / 2, bits + 16);
    Rational err = s * s - x;
    if (err < 0) err = -err;
    // |s - sqrt(x)| <= |s^2 - x| / s for s near the root
    if (err < tol * s) break;
  }
  return s;
}

}  // namespace sfl
