#pragma once

#include <stdexcept>
#include <string>

namespace fmda {

// Invalid input data or configuration. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Filesystem failure (missing file, unreadable or unwritable path). The CLI
// maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

}  // namespace fmda
