#pragma once

#include <stdexcept>
#include <string>

namespace arzctl {

/// Bad configuration or violated precondition (exit code 1 at the CLI).
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A simulation blew up or an iteration failed to converge (exit code 2).
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File I/O failure (exit code 3).
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace arzctl
