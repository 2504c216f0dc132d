#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>

namespace mclab {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& q) {
    return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

inline std::string to_string(const Rational& q) {
    if (q.denominator() == 1) return std::to_string(q.numerator());
    return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// Holder conjugate p' with 1/p + 1/p' = 1. Requires p > 1.
inline Rational dual(const Rational& p) { return p / (p - 1); }

}  // namespace mclab
