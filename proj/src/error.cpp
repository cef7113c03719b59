#include "extremes/error.hpp"

namespace extremes {

ParseError::ParseError(std::size_t line, std::string detail, const std::string& source)
    : InputError((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) +
                 ": " + detail),
      line_(line), detail_(std::move(detail)) {}

} // namespace extremes
