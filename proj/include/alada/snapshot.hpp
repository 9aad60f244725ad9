#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "alada/problems.hpp"
#include "alada/tensor.hpp"

namespace alada {

/// Binary matrix snapshot, all integers and floats little-endian:
///
///   bytes 0..3   "ALDK"
///   u32          format version (1)
///   u64 rows, u64 cols
///   rows * cols  IEEE-754 binary64, row-major
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(std::ostream& out, const Matrix& m);
/// Throws std::runtime_error on a bad magic, an unknown version or a truncated payload.
Matrix read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const Matrix& m);
Matrix read_snapshot(const std::filesystem::path& path);

/// Features with the class label appended as a final column.
Matrix dataset_matrix(const ClassificationData& data);
/// Inputs followed by targets, one sample per row.
Matrix dataset_matrix(const RegressionData& data);

}  // namespace alada
