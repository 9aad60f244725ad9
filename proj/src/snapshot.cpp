#include "alada/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace alada {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'L', 'D', 'K'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw std::runtime_error("snapshot: truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const Matrix& m) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kSnapshotVersion);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (double v : m.data()) put_le<double>(out, v);
}

Matrix read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("snapshot: bad magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  const auto rows = get_le<std::uint64_t>(in);
  const auto cols = get_le<std::uint64_t>(in);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = get_le<double>(in);
  return m;
}

void write_snapshot(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path.string());
  write_snapshot(out, m);
}

Matrix read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path.string());
  return read_snapshot(in);
}

Matrix dataset_matrix(const ClassificationData& data) {
  const std::size_t n = data.features.cols();
  Matrix out(data.features.rows(), n + 1);
  for (std::size_t s = 0; s < out.rows(); ++s) {
    const auto y = data.features.row(s);
    std::copy(y.begin(), y.end(), out.row(s).begin());
    out(s, n) = static_cast<double>(data.labels[s]);
  }
  return out;
}

Matrix dataset_matrix(const RegressionData& data) {
  const std::size_t a = data.inputs.cols();
  Matrix out(data.inputs.rows(), a + data.targets.cols());
  for (std::size_t s = 0; s < out.rows(); ++s) {
    const auto y = data.inputs.row(s);
    const auto z = data.targets.row(s);
    std::copy(y.begin(), y.end(), out.row(s).begin());
    std::copy(z.begin(), z.end(), out.row(s).begin() + static_cast<std::ptrdiff_t>(a));
  }
  return out;
}

}  // namespace alada
