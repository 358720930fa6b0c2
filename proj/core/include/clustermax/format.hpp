#pragma once

#include <string>

namespace clustermax {

// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double value);

}  // namespace clustermax
