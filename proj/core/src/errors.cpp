#include "tunnelkit/errors.hpp"

namespace tunnelkit {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Specification: return "specification";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Capability: return "capability";
        case ErrorKind::Consistency: return "consistency";
        case ErrorKind::Data: return "data";
        case ErrorKind::Format: return "format";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Fitting: return "fitting";
        case ErrorKind::Training: return "training";
        case ErrorKind::Metric: return "metric";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Specification:
        case ErrorKind::Usage:
            return 2;
        case ErrorKind::Domain:
        case ErrorKind::Capability:
        case ErrorKind::Consistency:
        case ErrorKind::Data:
        case ErrorKind::Format:
            return 3;
        case ErrorKind::Numerical:
        case ErrorKind::Fitting:
        case ErrorKind::Training:
        case ErrorKind::Metric:
            return 4;
    }
    return 4;
}

}  // namespace tunnelkit
