#pragma once

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace colorent {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// binom(p, q) with the total convention binom(p, q) = 0 unless 0 <= q <= p.
inline std::int64_t binomial(int p, int q) {
  if (q < 0 || p < 0 || q > p) return 0;
  if (q > p - q) q = p - q;
  std::int64_t r = 1;
  for (int i = 1; i <= q; ++i) r = r * (p - q + i) / i;  // exact at every step
  return r;
}

}  // namespace colorent
