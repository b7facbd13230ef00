#ifndef ASNN_ERRORS_HPP
#define ASNN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace asnn {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI when printing failures.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// A parameter lies outside its mathematical domain (sigma <= 0, c == 0, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& m) : Error("domain", m) {}
};

/// Two operands live on different grids or have inconsistent shapes.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

/// Invalid configuration (CFL violation, bad key, unknown enum value).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

/// Missing or degenerate input data (empty observation set, empty mask).
class DataError : public Error {
public:
    explicit DataError(const std::string& m) : Error("data", m) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& m) : Error("io", m) {}
};

/// Training produced a non-finite cost.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& m) : Error("divergence", m) {}
};

}  // namespace asnn

#endif  // ASNN_ERRORS_HPP
