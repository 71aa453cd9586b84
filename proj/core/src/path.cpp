#include "drsoc/path.hpp"

#include "drsoc/errors.hpp"

#include <charconv>

namespace drsoc {

std::string path_key(const Path& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(path[i]);
    }
    return out;
}

Path parse_path_key(std::string_view key) {
    Path path;
    if (key.empty()) return path;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t dash = key.find('-', pos);
        const std::string_view tok = key.substr(pos, dash == std::string_view::npos ? key.size() - pos : dash - pos);
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
            throw InputError("malformed node path \"" + std::string(key) + "\"");
        }
        path.push_back(v);
        if (dash == std::string_view::npos) break;
        pos = dash + 1;
    }
    return path;
}

} // namespace drsoc
