#pragma once

#include <stdexcept>
#include <string>

namespace springopt {

/// Malformed or out-of-contract input (files, parameters, dimensions).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure could not produce a result within its tolerances.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace springopt
