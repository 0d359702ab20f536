#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nlch {

// Invalid user-supplied parameter (epsilon <= 0, s outside (1/2,1), ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Kernel evaluated at its singularity.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// No admissible non-degeneracy window exists for the kernel.
class DegenerateKernelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A field violates the constraint class it is supposed to belong to.
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Node mask does not match its grid.
class MaskError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration file problems, all of them at once, each "file:line: key: message".
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> messages)
      : std::invalid_argument(join(messages)), messages_(std::move(messages)) {}
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  static std::string join(const std::vector<std::string>& m) {
    std::string out;
    for (const auto& s : m) out += (out.empty() ? "" : "\n") + s;
    return out;
  }
  std::vector<std::string> messages_;
};

}  // namespace nlch
