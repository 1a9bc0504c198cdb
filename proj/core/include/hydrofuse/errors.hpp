#pragma once

#include <stdexcept>
#include <string>

namespace hydrofuse {

// Failure classes map one-to-one onto the CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or unknown configuration, invalid scene description.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Missing files, unreadable or malformed raster/text artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

/// Inputs that violate an operation's preconditions.
class ComputeError : public Error {
public:
    using Error::Error;
};

int exit_code_for(const std::exception& e) noexcept;

}  // namespace hydrofuse
