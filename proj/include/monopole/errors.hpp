#pragma once

#include <stdexcept>
#include <string>

namespace monopole {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorClass { validation, numeric, io };

/// Base exception for everything the library throws. `kind` is a short
/// stable identifier such as "step-too-small" or "chart-excluded".
class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), class_(cls), kind_(std::move(kind)) {}

    ErrorClass error_class() const noexcept { return class_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorClass class_;
    std::string kind_;
};

class ValidationError : public Error {
public:
    ValidationError(std::string kind, const std::string& what)
        : Error(ErrorClass::validation, std::move(kind), what) {}
};

class NumericError : public Error {
public:
    NumericError(std::string kind, const std::string& what)
        : Error(ErrorClass::numeric, std::move(kind), what) {}
};

class IoError : public Error {
public:
    IoError(std::string kind, const std::string& what)
        : Error(ErrorClass::io, std::move(kind), what) {}
};

}  // namespace monopole
