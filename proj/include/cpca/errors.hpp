#pragma once

#include <stdexcept>
#include <string>

namespace cpca {

// Error taxonomy mirrored by the CLI exit codes:
//   InputError/ConfigError -> 2, NumericalError -> 3, IoError -> 4.

class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public InputError {
public:
    explicit ConfigError(const std::string& what) : InputError(what) {}
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cpca
