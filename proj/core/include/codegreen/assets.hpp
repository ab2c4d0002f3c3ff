#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codegreen {

/// Returns a data asset by repo-relative name, e.g. "queries/python/function.scm"
/// or "shims/python.py.tmpl". Assets are compiled into the library from
/// core/assets/; setting CODEGREEN_ASSET_DIR overrides individual files at
/// runtime (the extension path for new languages).
std::optional<std::string> load_asset(std::string_view name);

std::vector<std::string> list_assets();

} // namespace codegreen
