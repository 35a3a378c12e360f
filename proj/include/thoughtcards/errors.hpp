#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thoughtcards {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller handed us something that violates a precondition (empty seed set, bad config).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed text: action tokens, templates, model output that should have been numeric.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A backing model could not produce a usable result. `attempts` counts transport attempts.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what, int attempts = 1)
        : Error(what), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// Averaging produced the zero vector, so there is no direction to normalize.
class DegenerateEmbedding : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// No candidate produced an answer for a query.
class VerificationError : public Error {
public:
    using Error::Error;
};

}  // namespace thoughtcards
