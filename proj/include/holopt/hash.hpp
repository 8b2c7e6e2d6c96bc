// SHA-256 digests for run identifiers and manifest output hashes.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace holopt {

/// Lower-case hex digest of `data`.
std::string sha256_hex(std::string_view data);

/// Digest of a file's bytes; throws std::runtime_error if it cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace holopt
