#pragma once

#include <string>
#include <string_view>

namespace l3inv {

/// Shortest decimal string that parses back to exactly `value`.
[[nodiscard]] std::string format_double(double value);

/// Parses the whole of `text` as a double. Returns false on any leftover or
/// malformed input; surrounding whitespace is ignored.
[[nodiscard]] bool parse_double(std::string_view text, double& out);

}  // namespace l3inv
