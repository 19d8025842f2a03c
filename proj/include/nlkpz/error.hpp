#pragma once

#include <stdexcept>
#include <string>

namespace nlkpz {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters or configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A kernel support that is not resolved by the lattice.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& what, double required_h)
        : Error(what), required_h_(required_h) {}
    /// Largest spacing that would have been accepted.
    double required_h() const noexcept { return required_h_; }

private:
    double required_h_;
};

/// Time marching hit a non-finite state.
class EvolutionError : public Error {
public:
    EvolutionError(const std::string& what, double last_valid_time)
        : Error(what), last_valid_time_(last_valid_time) {}
    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

/// Picard sweeps stopped contracting.
class ContractionError : public Error {
public:
    using Error::Error;
};

}  // namespace nlkpz
