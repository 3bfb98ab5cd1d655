#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sscool {

/// Operands carry incompatible Hilbert-space layouts, or an index is out of range.
class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not deliver its post-condition.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The population of the highest kept Fock level exceeded the monitor threshold.
class TruncationError : public SolverError {
 public:
  TruncationError(double time, int mode, double population)
      : SolverError("truncation monitor: top Fock level of mode " + std::to_string(mode) +
                    " reached population " + std::to_string(population) + " at t = " +
                    std::to_string(time)),
        time_(time),
        mode_(mode),
        population_(population) {}

  double time() const noexcept { return time_; }
  int mode() const noexcept { return mode_; }
  double population() const noexcept { return population_; }

 private:
  double time_;
  int mode_;
  double population_;
};

/// Configuration rejected; carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& errors) {
    std::string out;
    for (const auto& e : errors) {
      if (!out.empty()) out += "; ";
      out += e;
    }
    return out;
  }

  std::vector<std::string> errors_;
};

}  // namespace sscool
