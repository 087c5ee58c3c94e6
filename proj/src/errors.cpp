#include "pxpscar/errors.hpp"
#include "pxpscar/version.hpp"

namespace pxp {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::NumericFailure: return "numeric-failure";
        case ErrorKind::TooLarge: return "too-large";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::WindowTooSmall: return "window-too-small";
        case ErrorKind::NonUnimodal: return "widen-window";
        case ErrorKind::DegenerateCoupling: return "degenerate-coupling";
        case ErrorKind::InternalInconsistency: return "internal-inconsistency";
    }
    return "unknown";
}

const char* library_version() noexcept { return PXPSCAR_VERSION; }

}  // namespace pxp
