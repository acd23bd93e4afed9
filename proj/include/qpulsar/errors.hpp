#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qpulsar {

// Gate references a qubit outside the register, or a CNOT with control == target.
class InvalidGate : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Malformed input file. `line()` is 1-based.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

// Optimization problem has no meaningful solution (e.g. single-class labels).
class DegenerateProblem : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A pool does not contain enough samples (of some class) for the requested draw.
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace qpulsar
