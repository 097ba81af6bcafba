#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace trussred {

/// %g with the given significant digits; infinities print as inf / -inf.
inline std::string format_number(double v, int digits = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace trussred
