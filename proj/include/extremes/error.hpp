#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extremes {

/// Malformed or inconsistent input data (files, shapes, configuration).
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Input file content that could not be parsed; carries the 1-based line.
class ParseError : public InputError {
public:
  ParseError(std::size_t line, std::string detail, const std::string& source = {});
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  std::size_t line_;
  std::string detail_;
};

/// Statistical failure: non-convergence, degenerate data, too few points.
class FitError : public std::runtime_error {
public:
  explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace extremes
