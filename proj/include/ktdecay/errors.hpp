#ifndef KTDECAY_ERRORS_HPP
#define KTDECAY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ktdecay {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation
/// (e.g. an evaluation angle outside (0, pi], a non-contractive eigenvalue).
struct DomainError : Error {
    using Error::Error;
};

/// A query value lies outside the attainable range of a function
/// (e.g. inverting below the minimum of a non-increasing rate).
struct RangeError : Error {
    using Error::Error;
};

/// An iterative routine failed to converge to its stated tolerance.
struct NumericError : Error {
    using Error::Error;
};

/// A tuning parameter violates its contract (e.g. a calibration constant
/// outside (0,1)).
struct ParameterError : Error {
    using Error::Error;
};

/// Malformed or empty input data (files, sample lists, series).
struct InputError : Error {
    using Error::Error;
};

/// An evaluation point is too close to a spectral singularity.
struct SingularityError : Error {
    SingularityError(const std::string& what, double theta_)
        : Error(what), theta(theta_) {}
    double theta;   ///< offending angle
};

/// A truncation cannot meet the requested tolerance; carries the table
/// size that would suffice.
struct ToleranceError : Error {
    ToleranceError(const std::string& what, long required_)
        : Error(what), required_coeff_count(required_) {}
    long required_coeff_count;
};

/// A certification hypothesis failed; carries the name of the hypothesis.
struct HypothesisError : Error {
    HypothesisError(const std::string& what, std::string hypothesis_)
        : Error(what), hypothesis(std::move(hypothesis_)) {}
    std::string hypothesis;
};

} // namespace ktdecay

#endif
