#include "text_util.hpp"

#include <cstdio>

namespace labelset::detail {

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace labelset::detail
