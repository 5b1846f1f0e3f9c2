#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qpc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReturnNotFound : Error { using Error::Error; };
struct NonUnimodular : Error { using Error::Error; };
struct Overflow : Error { using Error::Error; };
struct PreconditionFailed : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };
struct NotHyperbolic : Error { using Error::Error; };
struct InterpolationDiverged : Error { using Error::Error; };
struct BoundViolated : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// %.3e formatting for messages
inline std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace qpc
