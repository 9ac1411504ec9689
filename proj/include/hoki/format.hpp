#pragma once

#include <string>

namespace hoki {

/// Shortest representation with up to 17 significant digits ("%.17g").
/// Round-trips every finite double exactly; used by every file writer so
/// that identical values always serialize to identical bytes.
std::string format_double(double value);

std::string format_u64(unsigned long long value);

}  // namespace hoki
