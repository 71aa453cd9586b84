#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace drsoc {

/// Noise-atom indices observed so far, oldest first. The root has an empty path.
using Path = std::vector<int>;

/// "0-2-1"; the empty path maps to "".
std::string path_key(const Path& path);

/// Inverse of path_key. Throws InputError on malformed keys.
Path parse_path_key(std::string_view key);

} // namespace drsoc
