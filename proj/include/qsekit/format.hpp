#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

namespace qsekit {

/// Real value with 12 significant digits; negative zero prints as "0".
inline std::string format_real(double x) {
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

/// Complex coefficient as "(re+imi)", e.g. "(-0.5+0i)".
inline std::string format_coefficient(std::complex<double> c) {
  const double im = c.imag() == 0.0 ? 0.0 : c.imag();
  std::string out = "(" + format_real(c.real());
  out += std::signbit(im) ? "-" : "+";
  out += format_real(std::abs(im));
  out += "i)";
  return out;
}

}  // namespace qsekit
