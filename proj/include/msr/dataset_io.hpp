#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "msr/volume.hpp"

namespace msr {

// Layout (little-endian):
//   "MSRD1", u32 m, u32 v, u32 t, u32 nx, u32 ny, u32 nz, f32 tr_seconds,
//   nx*ny*nz mask bytes, v u32 flat coordinates (mask order),
//   m blocks of v*t f64 (row-major),
//   optional: u32 n_labels, n_labels x (u32 start_tr, u32 scene_id).
inline constexpr const char* kDatasetMagic = "MSRD1";

void write_dataset(std::ostream& os, const SubjectDataset& dataset);
SubjectDataset read_dataset(std::istream& is);

void save_dataset(const std::filesystem::path& path, const SubjectDataset& dataset);
/// Throws FormatError on a malformed file, ShapeMismatch on inconsistent shapes.
SubjectDataset load_dataset(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace msr
