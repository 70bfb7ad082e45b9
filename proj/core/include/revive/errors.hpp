#pragma once

#include <stdexcept>
#include <string>

namespace revive {

/// Tensor shapes or layouts that an operation cannot accept.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Arguments outside an operation's domain (non-positive step counts, bad thresholds, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced NaN/Inf, or a numeric precondition failed at run time.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File access and file-format problems.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace revive
