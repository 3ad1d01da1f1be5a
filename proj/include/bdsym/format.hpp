#pragma once

#include <cstdio>
#include <string>

namespace bdsym {

/// Round-trip-exact decimal rendering (17 significant digits); CSV emitters
/// use this everywhere so golden files are stable across platforms.
inline std::string g17(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bdsym
