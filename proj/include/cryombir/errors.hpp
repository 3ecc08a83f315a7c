#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cryombir {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Array shapes that must agree do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The reference volume cannot normalize an error metric (max <= 0).
class DegenerateReferenceError : public Error {
public:
    using Error::Error;
};

/// An iterative method produced a non-finite value.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

    [[nodiscard]] int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t byte_offset)
        : Error(what + " at byte offset " + std::to_string(byte_offset)), byte_offset_(byte_offset) {}

    [[nodiscard]] std::uint64_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::uint64_t byte_offset_;
};

/// Inconsistent user input (files, flags, configuration).
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace cryombir
