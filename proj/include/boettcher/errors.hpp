#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace boettcher {

/// Bad arguments or configuration (non-prime p, out-of-cap K, misapplied check).
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value expected to be p-integral has a p in its denominator.
class integrality_error : public std::domain_error {
public:
    explicit integrality_error(const std::string &what) : std::domain_error(what) {}
};

/// Raised by unit_part_mod_p; carries both valuations so callers can report them.
class valuation_mismatch : public std::domain_error {
public:
    valuation_mismatch(std::int64_t expected, std::string actual)
        : std::domain_error("valuation mismatch: expected " + std::to_string(expected) + ", got " + actual),
          expected_(expected), actual_(std::move(actual))
    {
    }

    std::int64_t expected() const noexcept { return expected_; }
    const std::string &actual() const noexcept { return actual_; }

private:
    std::int64_t expected_;
    std::string actual_;
};

/// Coefficient requested past the truncation order of a series.
class truncation_error : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Enumeration refused because its size guard was exceeded.
class guard_exceeded : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Operation undefined on its input (log of a series with constant != 1, etc).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace boettcher
