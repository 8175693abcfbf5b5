#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wander {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range input to a numerical routine.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A metric whose normalizer vanishes (no distance travelled, no rotation...).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

/// Operation issued in the wrong session phase.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class ProposalFailure : public Error {
public:
    using Error::Error;
};

/// Configuration or request body failed validation. `fields` names every
/// offending key so callers can report them all at once.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> fields, const std::string& what)
        : Error(what), fields_(std::move(fields)) {}

    explicit ValidationError(const std::string& what) : Error(what) {}

    const std::vector<std::string>& fields() const noexcept { return fields_; }

private:
    std::vector<std::string> fields_;
};

} // namespace wander
