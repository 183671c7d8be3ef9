#pragma once

#include <stdexcept>
#include <string>

namespace nmcsim {

// Base class for all simulator errors. `category` is a short machine-readable
// word used by the CLI for one-line error reporting.
class SimError : public std::runtime_error {
public:
    SimError(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const { return category_; }

private:
    std::string category_;
};

class ConfigError : public SimError {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::size_t col = 0)
        : SimError("config", what), line(line), col(col) {}

    std::size_t line;  // 1-based, 0 = not tied to a file location
    std::size_t col;
};

class DeadlockError : public SimError {
public:
    explicit DeadlockError(const std::string& what) : SimError("deadlock", what) {}
};

// A four-phase / dual-rail protocol rule was broken. In a correct fabric this
// never fires; the conformance checker catches it per trial.
class ProtocolViolation : public SimError {
public:
    explicit ProtocolViolation(const std::string& what) : SimError("protocol", what) {}
};

}  // namespace nmcsim
