#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace freeprob {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt bigint_pow(BigInt base, unsigned exp) {
    BigInt out = 1;
    while (exp != 0) {
        if (exp & 1u) out *= base;
        base *= base;
        exp >>= 1u;
    }
    return out;
}

inline BigInt factorial(unsigned n) {
    BigInt f = 1;
    for (unsigned i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace freeprob
