#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latsteer {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied something invalid: bad config, wrong shape, bad label.
// The CLI maps this family to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A value outside the mathematical domain of an operation (e.g. sigma <= 0).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// A required input artifact is absent. The message names the stage that produces it.
class MissingArtifactError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Malformed file contents. Carries the byte offset where decoding stopped when known.
class FormatError : public ValidationError {
public:
    FormatError(const std::string& what, std::size_t offset = npos)
        : ValidationError(offset == npos ? what : what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class ModelKindError : public FormatError {
public:
    using FormatError::FormatError;
};

// Stored tensor shape disagrees with the architecture recorded alongside it.
class ShapeMismatchError : public FormatError {
public:
    ShapeMismatchError(const std::string& tensor, const std::string& what)
        : FormatError("tensor '" + tensor + "': " + what), tensor_(tensor) {}
    const std::string& tensor() const noexcept { return tensor_; }

private:
    std::string tensor_;
};

// Non-finite values, solver non-convergence. CLI exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class TrainingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace latsteer
