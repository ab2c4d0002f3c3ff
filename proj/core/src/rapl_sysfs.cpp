#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <unistd.h>

#include "codegreen/errors.hpp"
#include "codegreen/providers.hpp"

namespace codegreen {

namespace fs = std::filesystem;

namespace {

// Reads a small sysfs file. Returns false and sets err on failure; sysfs
// reads are not resumable so a single read() is the whole protocol.
bool read_small_file(const fs::path& path, std::string& out, int& err) {
    const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) {
        err = errno;
        return false;
    }
    char buf[256];
    const ssize_t n = ::read(fd, buf, sizeof(buf) - 1);
    const int saved = errno;
    ::close(fd);
    if (n < 0) {
        err = saved;
        return false;
    }
    out.assign(buf, static_cast<std::size_t>(n));
    return true;
}

bool parse_uj(const std::string& text, std::uint64_t& out) {
    std::size_t i = 0;
    while (i < text.size() && text[i] == ' ') ++i;
    if (i == text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
        return false;
    std::uint64_t value = 0;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i)
        value = value * 10 + static_cast<std::uint64_t>(text[i] - '0');
    for (; i < text.size(); ++i)
        if (text[i] != '\n' && text[i] != ' ' && text[i] != '\r')
            return false;
    out = value;
    return true;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\r'))
        s.pop_back();
    return s;
}

std::optional<Domain> domain_from_zone_name(const std::string& name) {
    if (name.rfind("package", 0) == 0) return Domain::package;
    if (name == "core") return Domain::core;
    if (name == "dram") return Domain::dram;
    return std::nullopt; // psys, uncore etc. are out of scope
}

struct ZonePaths {
    Domain domain;
    fs::path energy_uj;
};

class RaplSysfsProvider final : public EnergyProvider {
public:
    RaplSysfsProvider(ProviderDescriptor descriptor, std::vector<ZonePaths> zones)
        : descriptor_(std::move(descriptor)), zones_(std::move(zones)) {}

    const ProviderDescriptor& descriptor() const override { return descriptor_; }

    std::uint64_t read_cumulative_uj(const DomainId& domain, MonotonicTimestamp) override {
        const auto it = std::find_if(zones_.begin(), zones_.end(),
                                     [&](const ZonePaths& z) { return z.domain == domain.domain; });
        if (it == zones_.end() || domain.provider != descriptor_.id)
            raise(ErrorCode::unknown_domain,
                  to_string(domain) + " not served by provider " + descriptor_.id);

        std::string text;
        int err = 0;
        if (!read_small_file(it->energy_uj, text, err))
            raise(ErrorCode::read_failure,
                  it->energy_uj.string() + ": " + std::strerror(err));
        std::uint64_t value = 0;
        if (!parse_uj(text, value))
            raise(ErrorCode::read_failure,
                  it->energy_uj.string() + ": unparseable counter '" + trimmed(text) + "'");
        return value;
    }

private:
    ProviderDescriptor descriptor_;
    std::vector<ZonePaths> zones_;
};

// One powercap zone directory (top-level package or child subzone).
void probe_zone(const fs::path& zone_dir,
                const std::string& provider_id,
                ProviderDescriptor& descriptor,
                std::vector<ZonePaths>& zones,
                std::vector<ProbeDiagnostic>& diagnostics) {
    std::string name_text;
    int err = 0;
    if (!read_small_file(zone_dir / "name", name_text, err)) {
        diagnostics.push_back({ProviderKind::rapl_sysfs, classify_probe_errno(err),
                               (zone_dir / "name").string() + ": " + std::strerror(err)});
        return;
    }
    const std::string zone_name = trimmed(name_text);
    const auto domain = domain_from_zone_name(zone_name);
    if (!domain)
        return;

    const fs::path energy_path = zone_dir / "energy_uj";
    std::string energy_text;
    if (!read_small_file(energy_path, energy_text, err)) {
        diagnostics.push_back({ProviderKind::rapl_sysfs, classify_probe_errno(err),
                               energy_path.string() + ": " + std::strerror(err)});
        return;
    }
    std::uint64_t probe_value = 0;
    if (!parse_uj(energy_text, probe_value)) {
        diagnostics.push_back({ProviderKind::rapl_sysfs, ProbeStatus::unreadable,
                               energy_path.string() + ": unparseable counter"});
        return;
    }

    descriptor.domains.push_back(DomainId{provider_id, *domain});
    zones.push_back({*domain, energy_path});

    std::string range_text;
    std::uint64_t range = 0;
    if (read_small_file(zone_dir / "max_energy_range_uj", range_text, err) &&
        parse_uj(range_text, range) && range > 0)
        descriptor.wrap_range_uj[*domain] = range;
}

} // namespace

ProbeStatus classify_probe_errno(int err) {
    switch (err) {
    case ENOENT:
    case ENOTDIR:
        return ProbeStatus::not_present;
    case EACCES:
    case EPERM:
        return ProbeStatus::permission_denied;
    default:
        return ProbeStatus::unreadable;
    }
}

namespace detail {

// Scans <root>/intel-rapl:<n>[/intel-rapl:<n>:<m>] for readable zones.
// Returns one provider per top-level package zone.
void discover_rapl(const fs::path& root,
                   std::vector<std::unique_ptr<EnergyProvider>>& providers,
                   std::vector<ProbeDiagnostic>& diagnostics) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        diagnostics.push_back({ProviderKind::rapl_sysfs, ProbeStatus::not_present,
                               root.string() + ": no powercap tree"});
        return;
    }

    std::vector<fs::path> packages;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        const std::string stem = entry.path().filename().string();
        if (stem.rfind("intel-rapl:", 0) == 0 && stem.find(':', 11) == std::string::npos)
            packages.push_back(entry.path());
    }
    std::sort(packages.begin(), packages.end());
    if (packages.empty()) {
        diagnostics.push_back({ProviderKind::rapl_sysfs, ProbeStatus::not_present,
                               root.string() + ": no intel-rapl zones"});
        return;
    }

    for (std::size_t idx = 0; idx < packages.size(); ++idx) {
        const fs::path& pkg_dir = packages[idx];
        const std::string provider_id = "rapl:" + std::to_string(idx);

        ProviderDescriptor descriptor;
        descriptor.id = provider_id;
        descriptor.kind = ProviderKind::rapl_sysfs;
        descriptor.native_update_interval_ns = 1'000'000; // RAPL updates at ~1 kHz
        descriptor.requires_privilege = true;

        std::vector<ZonePaths> zones;
        probe_zone(pkg_dir, provider_id, descriptor, zones, diagnostics);

        std::vector<fs::path> subzones;
        for (const auto& entry : fs::directory_iterator(pkg_dir, ec)) {
            if (entry.path().filename().string().rfind("intel-rapl:", 0) == 0)
                subzones.push_back(entry.path());
        }
        std::sort(subzones.begin(), subzones.end());
        for (const auto& sub : subzones)
            probe_zone(sub, provider_id, descriptor, zones, diagnostics);

        if (!descriptor.domains.empty())
            providers.push_back(
                std::make_unique<RaplSysfsProvider>(std::move(descriptor), std::move(zones)));
    }
}

} // namespace detail

} // namespace codegreen
