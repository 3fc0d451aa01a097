#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace foamcalc {

/// Exact rational scalar used throughout the library.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace foamcalc
