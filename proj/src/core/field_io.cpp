#include "wakefsi/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wakefsi/error.hpp"

namespace wakefsi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int b = 0; b < 8; ++b) r = (r << 8) | ((v >> (8 * b)) & 0xffu);
        return r;
    }
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

template <class T>
T get_key(const json& j, const char* key, const char* where) {
    if (!j.is_object() || !j.contains(key))
        fail(ErrorCode::InvalidArgument, std::string(where) + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument,
             std::string(where) + ": bad value for '" + key + "': " + e.what());
    }
}

StructuredGrid grid_from_json(const json& g) {
    StructuredGrid grid;
    const auto nx = get_key<std::int64_t>(g, "nx", "manifest grid");
    const auto ny = get_key<std::int64_t>(g, "ny", "manifest grid");
    const auto nz = get_key<std::int64_t>(g, "nz", "manifest grid");
    require(nx >= 1 && ny >= 1 && nz >= 1, ErrorCode::InvalidArgument,
            "manifest grid: cell counts must be >= 1");
    grid.nx = static_cast<std::size_t>(nx);
    grid.ny = static_cast<std::size_t>(ny);
    grid.nz = static_cast<std::size_t>(nz);
    grid.dx = get_key<double>(g, "dx", "manifest grid");
    grid.dy = get_key<double>(g, "dy", "manifest grid");
    grid.dz = get_key<double>(g, "dz", "manifest grid");
    const auto origin = get_key<std::vector<double>>(g, "origin", "manifest grid");
    require(origin.size() == 3, ErrorCode::InvalidArgument, "manifest grid: origin needs 3 values");
    grid.origin = {origin[0], origin[1], origin[2]};
    grid.validate();
    return grid;
}

json grid_to_json(const StructuredGrid& g) {
    json j;
    j["nx"] = g.nx;
    j["ny"] = g.ny;
    j["nz"] = g.nz;
    j["dx"] = g.dx;
    j["dy"] = g.dy;
    j["dz"] = g.dz;
    j["origin"] = {g.origin[0], g.origin[1], g.origin[2]};
    return j;
}

}  // namespace

std::string expand_pattern(const std::string& pattern, std::size_t index,
                           const std::string& field) {
    std::string out = pattern;
    replace_all(out, "{index}", std::to_string(index));
    replace_all(out, "{field}", field);
    return out;
}

std::vector<double> read_f64_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open data file " + file.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        fail(ErrorCode::SizeMismatch, "size mismatch: " + file.string() +
                                          " is not a whole number of float64 values");
    std::vector<double> values(bytes.size() / 8);
    for (std::size_t n = 0; n < values.size(); ++n) {
        std::uint64_t raw;
        std::memcpy(&raw, bytes.data() + 8 * n, 8);
        values[n] = std::bit_cast<double>(to_little(raw));
    }
    return values;
}

void write_f64_file(const fs::path& file, const std::vector<double>& values) {
    std::vector<char> bytes(values.size() * 8);
    for (std::size_t n = 0; n < values.size(); ++n) {
        const std::uint64_t raw = to_little(std::bit_cast<std::uint64_t>(values[n]));
        std::memcpy(bytes.data() + 8 * n, &raw, 8);
    }
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write data file " + file.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "write failed for " + file.string());
}

SnapshotSet load_snapshot_set(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) fail(ErrorCode::Io, "missing manifest: " + manifest_path.string());

    json m;
    try {
        in >> m;
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, "manifest is not valid JSON: " + std::string(e.what()));
    }

    const auto version = get_key<int>(m, "version", "manifest");
    require(version == kManifestVersion, ErrorCode::InvalidArgument,
            "manifest: unsupported version " + std::to_string(version));

    SnapshotSet set;
    set.grid = grid_from_json(get_key<json>(m, "grid", "manifest"));
    set.times = get_key<std::vector<double>>(m, "times", "manifest");
    set.pattern = get_key<std::string>(m, "pattern", "manifest");
    for (const auto& f : get_key<json>(m, "fields", "manifest")) {
        const auto comps = get_key<std::int64_t>(f, "components", "manifest field");
        require(comps >= 1, ErrorCode::InvalidArgument, "manifest field: components must be >= 1");
        set.fields.push_back({get_key<std::string>(f, "name", "manifest field"),
                              static_cast<std::size_t>(comps)});
    }
    require(!set.fields.empty(), ErrorCode::InvalidArgument, "manifest: no fields");
    for (std::size_t s = 1; s < set.times.size(); ++s)
        require(set.times[s] > set.times[s - 1], ErrorCode::InvalidArgument,
                "manifest: times must be strictly increasing");
    require(set.pattern.find("{index}") != std::string::npos, ErrorCode::InvalidArgument,
            "manifest: pattern must contain {index}");
    if (set.fields.size() > 1)
        require(set.pattern.find("{field}") != std::string::npos, ErrorCode::InvalidArgument,
                "manifest: multi-field pattern must contain {field}");

    for (const FieldInfo& info : set.fields) {
        std::vector<FieldSnapshot> snaps;
        snaps.reserve(set.times.size());
        for (std::size_t s = 0; s < set.times.size(); ++s) {
            const fs::path file = dir / expand_pattern(set.pattern, s, info.name);
            if (!fs::exists(file)) fail(ErrorCode::Io, "missing data file " + file.string());
            FieldSnapshot snap;
            snap.grid = set.grid;
            snap.components = info.components;
            snap.time = set.times[s];
            snap.data = read_f64_file(file);
            const std::size_t expected = set.grid.cell_count() * info.components;
            require(snap.data.size() == expected, ErrorCode::SizeMismatch,
                    "size mismatch: " + file.string() + " holds " +
                        std::to_string(snap.data.size()) + " values, manifest declares " +
                        std::to_string(expected));
            snap.validate();
            snaps.push_back(std::move(snap));
        }
        set.snapshots.push_back(std::move(snaps));
    }
    return set;
}

void save_snapshot_set(const SnapshotSet& set, const fs::path& dir) {
    set.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

    json m;
    m["version"] = kManifestVersion;
    m["grid"] = grid_to_json(set.grid);
    json fields = json::array();
    for (const auto& f : set.fields) fields.push_back({{"name", f.name}, {"components", f.components}});
    m["fields"] = fields;
    m["times"] = set.times;
    m["pattern"] = set.pattern;

    {
        std::ofstream out(dir / "manifest.json", std::ios::trunc);
        if (!out) fail(ErrorCode::Io, "cannot write manifest in " + dir.string());
        out << m.dump(2) << '\n';
        if (!out) fail(ErrorCode::Io, "write failed for manifest in " + dir.string());
    }
    for (std::size_t f = 0; f < set.fields.size(); ++f)
        for (std::size_t s = 0; s < set.times.size(); ++s)
            write_f64_file(dir / expand_pattern(set.pattern, s, set.fields[f].name),
                           set.snapshots[f][s].data);
}

}  // namespace wakefsi
