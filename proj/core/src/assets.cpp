#include "codegreen/assets.hpp"

#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

namespace codegreen {

namespace detail {
extern const std::pair<std::string_view, std::string_view> kAssets[];
extern const std::size_t kAssetCount;
} // namespace detail

std::optional<std::string> load_asset(std::string_view name) {
    // Runtime override first: lets users extend or patch query and shim
    // assets without rebuilding.
    if (const char* dir = std::getenv("CODEGREEN_ASSET_DIR"); dir && *dir) {
        const std::filesystem::path path = std::filesystem::path(dir) / std::string(name);
        std::ifstream in(path, std::ios::binary);
        if (in) {
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
    }
    for (std::size_t i = 0; i < detail::kAssetCount; ++i)
        if (detail::kAssets[i].first == name)
            return std::string(detail::kAssets[i].second);
    return std::nullopt;
}

std::vector<std::string> list_assets() {
    std::vector<std::string> names;
    names.reserve(detail::kAssetCount);
    for (std::size_t i = 0; i < detail::kAssetCount; ++i)
        names.emplace_back(detail::kAssets[i].first);
    return names;
}

} // namespace codegreen
