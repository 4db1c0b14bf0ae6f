#pragma once
#include <stdexcept>
#include <string>

namespace gava {

// Bad inputs: malformed files, out-of-range parameters, violated
// preconditions. The CLI maps this to exit code 1; everything else
// (I/O failures, backend errors) maps to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gava
