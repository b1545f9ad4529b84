#pragma once

#include <stdexcept>
#include <string>

namespace leotopo {

// Bad configuration or arguments. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The active deployment cannot realize the requested construction. CLI exit code 3.
class InfeasibleDeploymentError : public std::runtime_error {
public:
    explicit InfeasibleDeploymentError(const std::string& msg) : std::runtime_error(msg) {}
};

// File parsing or filesystem failure. CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace leotopo
