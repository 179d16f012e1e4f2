#pragma once

#include <stdexcept>
#include <string>

namespace scmppi {

// Error taxonomy maps 1:1 onto CLI exit codes:
//   UsageError   -> 1 (bad invocation)
//   DataError    -> 2 (files, formats, shapes, configuration)
//   NumericError -> 3 (non-finite values, undefined metrics)
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scmppi
