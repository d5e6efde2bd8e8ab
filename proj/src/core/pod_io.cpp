#include "wakefsi/pod_io.hpp"

#include <fstream>

#include <json.hpp>

#include "wakefsi/error.hpp"
#include "wakefsi/field_io.hpp"

namespace wakefsi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_pod(const PodArchive& archive, const fs::path& dir) {
    const PodResult& r = archive.result;
    const std::size_t cells = archive.grid.cell_count();
    require(static_cast<std::size_t>(r.rows()) == cells * archive.components,
            ErrorCode::SizeMismatch, "save_pod: mode length does not match grid x components");
    require(archive.times.size() == static_cast<std::size_t>(r.snapshots()),
            ErrorCode::SizeMismatch, "save_pod: time count does not match coefficient columns");

    SnapshotSet modes;
    modes.grid = archive.grid;
    modes.pattern = "mode_{index}.bin";
    std::vector<FieldSnapshot> snaps;
    for (Eigen::Index n = 0; n < r.rank(); ++n) {
        const double pseudo_time = static_cast<double>(n + 1);
        modes.times.push_back(pseudo_time);
        FieldSnapshot snap(archive.grid, archive.components, pseudo_time);
        snap.data = to_std(r.modes.col(n));
        snaps.push_back(std::move(snap));
    }
    modes.fields.push_back({"mode", archive.components});
    modes.snapshots.push_back(std::move(snaps));
    save_snapshot_set(modes, dir);

    json p;
    p["singular_values"] = to_std(r.singular_values);
    json coeffs = json::array();
    for (Eigen::Index n = 0; n < r.rank(); ++n) coeffs.push_back(to_std(r.temporal_coeffs.row(n).transpose()));
    p["temporal_coeffs"] = coeffs;
    p["mean_subtracted"] = r.mean_subtracted;
    p["weights_used"] = r.weights.has_value();
    p["weights"] = r.weights ? json(to_std(*r.weights)) : json(nullptr);
    p["mean"] = r.mean ? json(to_std(*r.mean)) : json(nullptr);
    p["field"] = archive.field;
    p["components"] = archive.components;
    p["times"] = archive.times;
    p["rank"] = r.rank();

    std::ofstream out(dir / "pod.json", std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write pod.json in " + dir.string());
    out << p.dump(2) << '\n';
    if (!out) fail(ErrorCode::Io, "write failed for pod.json in " + dir.string());
}

PodArchive load_pod(const fs::path& dir) {
    const SnapshotSet modes = load_snapshot_set(dir);
    std::ifstream in(dir / "pod.json");
    if (!in) fail(ErrorCode::Io, "missing pod.json in " + dir.string());
    json p;
    try {
        in >> p;
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, "pod.json is not valid JSON: " + std::string(e.what()));
    }

    PodArchive a;
    try {
        a.grid = modes.grid;
        a.field = p.at("field").get<std::string>();
        a.components = p.at("components").get<std::size_t>();
        a.times = p.at("times").get<std::vector<double>>();
        const auto sigma = p.at("singular_values").get<std::vector<double>>();
        const auto coeffs = p.at("temporal_coeffs").get<std::vector<std::vector<double>>>();
        const auto rank = static_cast<Eigen::Index>(sigma.size());
        const auto snaps = static_cast<Eigen::Index>(a.times.size());
        const auto rows = static_cast<Eigen::Index>(a.grid.cell_count() * a.components);

        require(modes.snapshot_count() == sigma.size() && coeffs.size() == sigma.size(),
                ErrorCode::SizeMismatch, "pod archive: rank differs between modes and pod.json");
        require(modes.fields.front().components == a.components, ErrorCode::SizeMismatch,
                "pod archive: mode components differ from pod.json");

        PodResult& r = a.result;
        r.singular_values = to_eigen(sigma);
        r.modes.resize(rows, rank);
        r.temporal_coeffs.resize(rank, snaps);
        for (Eigen::Index n = 0; n < rank; ++n) {
            r.modes.col(n) = to_eigen(modes.snapshots.front()[static_cast<std::size_t>(n)].data);
            const auto& row = coeffs[static_cast<std::size_t>(n)];
            require(static_cast<Eigen::Index>(row.size()) == snaps, ErrorCode::SizeMismatch,
                    "pod archive: coefficient row length differs from time count");
            r.temporal_coeffs.row(n) = to_eigen(row).transpose();
        }
        r.mean_subtracted = p.at("mean_subtracted").get<bool>();
        if (!p.at("weights").is_null()) r.weights = to_eigen(p.at("weights").get<std::vector<double>>());
        if (!p.at("mean").is_null()) r.mean = to_eigen(p.at("mean").get<std::vector<double>>());
        if (r.weights)
            require(r.weights->size() == rows, ErrorCode::SizeMismatch, "pod archive: weights length");
        if (r.mean)
            require(r.mean->size() == rows, ErrorCode::SizeMismatch, "pod archive: mean length");
        require(!r.mean_subtracted || r.mean, ErrorCode::InvalidArgument,
                "pod archive: mean_subtracted without a stored mean");
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, "pod.json: " + std::string(e.what()));
    }
    return a;
}

SnapshotSet reconstruct_set(const PodArchive& archive, std::size_t n_modes) {
    const SnapshotMatrix m = reconstruct(archive.result, n_modes);
    SnapshotSet out;
    out.grid = archive.grid;
    out.times = archive.times;
    out.pattern = archive.field + "_{index}.bin";
    std::vector<FieldSnapshot> snaps;
    for (Eigen::Index s = 0; s < m.cols(); ++s) {
        FieldSnapshot snap(archive.grid, archive.components, archive.times[static_cast<std::size_t>(s)]);
        snap.data = to_std(m.data.col(s));
        snaps.push_back(std::move(snap));
    }
    out.fields.push_back({archive.field, archive.components});
    out.snapshots.push_back(std::move(snaps));
    return out;
}

}  // namespace wakefsi
