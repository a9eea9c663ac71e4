#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cbf {

using rational = mpq_class;

enum class scalar_mode { exact, float64 };

inline std::string to_string(scalar_mode m) { return m == scalar_mode::exact ? "exact" : "float"; }

inline scalar_mode parse_mode(const std::string& s) {
  if (s == "exact") return scalar_mode::exact;
  if (s == "float" || s == "float64") return scalar_mode::float64;
  throw std::invalid_argument("unknown scalar mode: " + s);
}

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<rational> {
  static constexpr bool exact = true;
  static rational from_int(long long v) { return rational(static_cast<long>(v)); }
  static rational from_frac(long long p, long long q) {
    rational r(static_cast<long>(p), static_cast<long>(q));
    r.canonicalize();
    return r;
  }
  static bool is_zero(const rational& x) { return sgn(x) == 0; }
  static double to_double(const rational& x) { return x.get_d(); }
  static std::string str(const rational& x) { return x.get_str(); }
  static rational parse(const std::string& s) {
    rational r;
    if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    r.canonicalize();
    return r;
  }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double from_int(long long v) { return static_cast<double>(v); }
  static double from_frac(long long p, long long q) { return static_cast<double>(p) / static_cast<double>(q); }
  static bool is_zero(double x) { return x == 0.0; }
  static double to_double(double x) { return x; }
  static std::string str(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  static double parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  }
};

// |x| as a double, for reports
template <class T>
double abs_d(const T& x) {
  return std::fabs(scalar_traits<T>::to_double(x));
}

}  // namespace cbf
