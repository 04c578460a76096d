#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evolvebm {

// Base class for all library errors. Subclasses map onto the CLI exit codes:
// config errors -> 2, numerical failures -> 3, I/O errors -> 4.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class OutOfChartError : public Error {
  public:
    explicit OutOfChartError(const std::string& msg) : Error(msg) {}
};

class SingularMetricError : public Error {
  public:
    explicit SingularMetricError(const std::string& msg) : Error(msg) {}
};

class NonOrthonormalStartError : public Error {
  public:
    explicit NonOrthonormalStartError(const std::string& msg) : Error(msg) {}
};

class DegenerateBasisError : public Error {
  public:
    explicit DegenerateBasisError(const std::string& msg) : Error(msg) {}
};

// Numerical explosion of a deterministic integration (development etc.).
// Stochastic trajectories never throw this; they record an abort instead.
class BlowUpError : public Error {
  public:
    explicit BlowUpError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration. Carries every violation found, not just the first.
class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}
    explicit ConfigError(const std::string& msg)
        : ConfigError(std::vector<std::string>{msg}) {}

    const std::vector<std::string>& violations() const { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> violations_;
};

}  // namespace evolvebm
