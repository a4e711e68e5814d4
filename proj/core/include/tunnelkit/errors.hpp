#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tunnelkit {

// Every failure raised by the library carries one of these categories. The
// CLI maps them onto exit codes (see exit_code()).
enum class ErrorKind {
    Specification,  // invalid parameters, bad config values
    Usage,          // CLI misuse, missing files
    Domain,         // argument outside the mathematical domain of an operation
    Capability,     // operation not supported for this input kind
    Consistency,    // inputs that disagree with each other (schema, temperature)
    Data,           // NaN/inf or malformed rows in a dataset
    Format,         // malformed or version-incompatible serialized document
    Numerical,      // quadrature or solver failed to converge
    Fitting,        // rank-deficient or underdetermined regression
    Training,       // degenerate training data
    Metric          // metric undefined for the given inputs
};

std::string_view to_string(ErrorKind kind) noexcept;

// 2: configuration/usage, 3: data, 4: numerical.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

}  // namespace tunnelkit
