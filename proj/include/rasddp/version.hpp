#pragma once

namespace rasddp {

/// Library version, recorded in every run manifest.
const char* version_string();

}  // namespace rasddp
