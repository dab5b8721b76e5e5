#pragma once

// Scalar types and conversions shared by the numeric modules. Analytic code is
// templated on the scalar; `double` and `Real128` (128-bit mantissa) are the
// instantiated choices.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <string>

namespace mfres {

using Real128 = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<128, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

template <class Scalar>
constexpr int mantissa_bits() {
  return std::numeric_limits<Scalar>::digits;
}

template <class Scalar>
Scalar pi() {
  if constexpr (std::is_floating_point_v<Scalar>) {
    return static_cast<Scalar>(3.141592653589793238462643383279502884L);
  } else {
    return boost::math::constants::pi<Scalar>();
  }
}

/// Nearest-ish conversion of a big integer: the top `digits + 8` bits are kept.
template <class Scalar>
Scalar to_scalar(const mpz_class& x) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return x.get_d();
  } else {
    constexpr int keep = std::numeric_limits<Scalar>::digits + 8;
    const long bits = static_cast<long>(mpz_sizeinbase(x.get_mpz_t(), 2));
    mpz_class top = x;
    long shift = 0;
    if (bits > keep) {
      shift = bits - keep;
      mpz_tdiv_q_2exp(top.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
    }
    const bool negative = sgn(top) < 0;
    if (negative) top = -top;
    Scalar result = 0;
    // assemble from 32-bit chunks, most significant first
    const size_t chunks = (mpz_sizeinbase(top.get_mpz_t(), 2) + 31) / 32;
    for (size_t i = chunks; i-- > 0;) {
      mpz_class chunk;
      mpz_tdiv_q_2exp(chunk.get_mpz_t(), top.get_mpz_t(), static_cast<mp_bitcnt_t>(32 * i));
      mpz_tdiv_r_2exp(chunk.get_mpz_t(), chunk.get_mpz_t(), 32);
      result = result * Scalar(4294967296.0) + Scalar(static_cast<double>(chunk.get_ui()));
    }
    using std::ldexp;
    if (shift > 0) result = ldexp(result, static_cast<int>(shift));
    return negative ? -result : result;
  }
}

template <class Scalar>
Scalar to_scalar(const mpq_class& q) {
  if (q.get_den() == 1) return to_scalar<Scalar>(q.get_num());
  return to_scalar<Scalar>(q.get_num()) / to_scalar<Scalar>(q.get_den());
}

template <class To, class From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_floating_point_v<To>) {
    return static_cast<To>(x);
  } else {
    return To(x);
  }
}

/// Decimal text carrying every stored digit of `x`.
template <class Scalar>
std::string to_decimal(const Scalar& x) {
  if constexpr (std::is_floating_point_v<Scalar>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(x));
    return buf;
  } else {
    return x.str(std::numeric_limits<Scalar>::max_digits10, std::ios_base::scientific);
  }
}

}  // namespace mfres
