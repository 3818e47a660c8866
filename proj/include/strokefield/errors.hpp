#pragma once

#include <stdexcept>
#include <string>

namespace strokefield {

/// Unusable input data (unreadable file, raster not thinned, ...).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameter outside its documented range.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computed quantity violated a contract the pipeline relies on.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace strokefield
