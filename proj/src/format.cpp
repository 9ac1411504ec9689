#include "hoki/format.hpp"

#include <cstdio>

namespace hoki {

std::string format_double(double value) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_u64(unsigned long long value) {
  char buf[24];
  const int len = std::snprintf(buf, sizeof(buf), "%llu", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

}  // namespace hoki
