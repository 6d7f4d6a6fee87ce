#pragma once

#include <stdexcept>
#include <string>

namespace adxprobe {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or malformed input (files, configs, arguments).
class InputError : public Error {
public:
    using Error::Error;
};

} // namespace adxprobe
