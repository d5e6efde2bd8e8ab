#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wakefsi/field.hpp"
#include "wakefsi/pod.hpp"

namespace wakefsi {

/// A decomposition together with the layout needed to turn modes and
/// reconstructions back into fields.
struct PodArchive {
    PodResult result;
    StructuredGrid grid;
    std::string field;               // source field name
    std::size_t components = 1;      // components per cell in a mode vector
    std::vector<double> times;       // snapshot times of the source
};

/// Writes modes as a snapshot set (field "mode", pseudo-times 1..r) with
/// `pod.json` beside the manifest.
void save_pod(const PodArchive& archive, const std::filesystem::path& dir);

PodArchive load_pod(const std::filesystem::path& dir);

/// Reconstruction as a snapshot set carrying the source field name and times.
SnapshotSet reconstruct_set(const PodArchive& archive, std::size_t n_modes);

}  // namespace wakefsi
