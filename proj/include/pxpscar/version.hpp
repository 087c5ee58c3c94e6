#pragma once

namespace pxp {

/// Library version, e.g. "0.3.0".
const char* library_version() noexcept;

}  // namespace pxp
