#pragma once

#include <stdexcept>
#include <string>

namespace qpack {

/// Domain error: invalid input data, violated precondition, failed validation.
/// The CLI maps these to exit code 1 (usage problems exit 2).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(what);
}

}  // namespace qpack
