#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace pairkrr {

/// Malformed or out-of-contract input data (ragged CSV, non-PSD kernel, bad model file).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerically degenerate request (singular shifted system, zero filter denominator).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Upper bound on m*q for any operation that materializes an (mq)x(mq) matrix.
/// Overridable through the PAIRKRR_DENSIFICATION_CAP environment variable.
inline std::size_t densification_cap() {
    if (const char* env = std::getenv("PAIRKRR_DENSIFICATION_CAP")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        throw data_error("PAIRKRR_DENSIFICATION_CAP is not a positive integer: " + std::string(env));
    }
    return 4096;
}

} // namespace pairkrr
