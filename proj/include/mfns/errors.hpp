#pragma once

#include <stdexcept>
#include <string>

namespace mfns {

/// Invalid parameter, mismatched shape, or unusable configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or non-finite input data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem or binary-format failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An internal consistency check failed; indicates a bug, not user error.
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A trajectory produced a non-finite coefficient.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(double time, int particle)
        : std::runtime_error("non-finite field at t=" + std::to_string(time) +
                             (particle >= 0 ? " in particle " + std::to_string(particle)
                                            : std::string(" in reference trajectory"))),
          time_(time),
          particle_(particle) {}

    double time() const { return time_; }
    /// Index of the offending particle, or -1 for a deterministic trajectory.
    int particle() const { return particle_; }

private:
    double time_;
    int particle_;
};

} // namespace mfns
