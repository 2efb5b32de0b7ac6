#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace rlsched {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// "7/6" or "1" for integers.
inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace rlsched
