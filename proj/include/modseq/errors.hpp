#pragma once

#include <stdexcept>
#include <string>

namespace modseq {

/// Invalid configuration or input file. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed to meet its own accuracy contract
/// (decomposition residual, bisection bracketing, ...). Exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace modseq
