#pragma once

#include <stdexcept>
#include <string>

namespace rangelsh {

/// Failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
    InvalidArgument,  // bad parameters or malformed input
    Io,               // file could not be opened, read or written
    Invariant,        // internal consistency check failed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) {
    throw Error(ErrorKind::InvalidArgument, what);
}

[[noreturn]] inline void fail_io(const std::string& what) {
    throw Error(ErrorKind::Io, what);
}

[[noreturn]] inline void fail_invariant(const std::string& what) {
    throw Error(ErrorKind::Invariant, what);
}

}  // namespace rangelsh
