#pragma once

#include <stdexcept>
#include <string>

namespace pxp {

enum class ErrorKind {
    InvalidArgument,
    Unsupported,
    NumericFailure,
    TooLarge,
    InsufficientData,
    WindowTooSmall,
    NonUnimodal,
    DegenerateCoupling,
    InternalInconsistency,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace pxp
