#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wakefsi/field.hpp"

namespace wakefsi {

/// Reads `manifest.json` plus one raw little-endian float64 file per time
/// (and per field when the pattern holds `{field}`).
SnapshotSet load_snapshot_set(const std::filesystem::path& dir);

/// Writes the manifest and data files. Creates `dir` if needed and
/// overwrites files of the same name.
void save_snapshot_set(const SnapshotSet& set, const std::filesystem::path& dir);

/// Expands `{index}` and `{field}` in a file-name pattern.
std::string expand_pattern(const std::string& pattern, std::size_t index,
                           const std::string& field);

std::vector<double> read_f64_file(const std::filesystem::path& file);
void write_f64_file(const std::filesystem::path& file, const std::vector<double>& values);

}  // namespace wakefsi
