#pragma once

#include <stdexcept>
#include <string>

namespace mdpsmd {

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

struct NonUniqueStationary : std::runtime_error {
  explicit NonUniqueStationary(const std::string& what) : std::runtime_error(what) {}
};

struct NotMixing : std::runtime_error {
  explicit NotMixing(const std::string& what) : std::runtime_error(what) {}
};

struct OracleTooLarge : std::runtime_error {
  explicit OracleTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyDistribution : std::runtime_error {
  explicit EmptyDistribution(const std::string& what) : std::runtime_error(what) {}
};

struct StepBoundViolation : std::runtime_error {
  explicit StepBoundViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteIterate : std::runtime_error {
  explicit NonFiniteIterate(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleInstance : std::runtime_error {
  explicit InfeasibleInstance(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdpsmd
