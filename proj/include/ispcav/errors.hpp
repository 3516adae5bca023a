#pragma once

#include <stdexcept>
#include <string>

namespace ispcav {

/// A numeric argument lies outside the domain of the operation.
class ParameterError : public std::invalid_argument {
public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// The replica-symmetric constants are only defined where C(beta, gamma) < 1.
class OutsideRegionError : public ParameterError {
public:
  explicit OutsideRegionError(const std::string& what) : ParameterError(what) {}
};

/// An exact computation would exceed its enumeration budget.
class ResourceLimitError : public std::runtime_error {
public:
  ResourceLimitError(const std::string& what, std::size_t size)
      : std::runtime_error(what), size_(size) {}

  std::size_t size() const noexcept { return size_; }

private:
  std::size_t size_;
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ispcav
