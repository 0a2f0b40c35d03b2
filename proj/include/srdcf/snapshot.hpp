#pragma once

// Binary snapshot of a ModelState, little-endian:
//   "SRDC" | u32 version | u32 d, M, N | f64 gamma | u64 frameCount
//   | u64 n, f64[n] b
//   | u64 rows, u64 nnz, u64[rows+1] rowPtr, u32[nnz] cols, f64[nnz] values
//   | u64 n, f64[n] fReal

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "srdcf/solver.hpp"

namespace srdcf {

inline constexpr std::array<char, 4> kSnapshotMagic = {'S', 'R', 'D', 'C'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct ModelSnapshot {
  int depth = 0;
  int rows = 0;
  int cols = 0;
  double gamma = 0.0;
  std::uint64_t frameCount = 0;
  Eigen::VectorXd b;
  RealSparse A;
  Eigen::VectorXd fReal;
};

namespace detail {

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw IngestionError("snapshot: truncated stream");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

inline void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_le<double>(os, v[i]);
}

inline Eigen::VectorXd get_vector(std::istream& is, std::uint64_t expected) {
  const auto n = get_le<std::uint64_t>(is);
  if (n != expected) throw IngestionError("snapshot: vector length does not match the header");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get_le<double>(is);
  return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const ModelState& s) {
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  detail::put_le<std::uint32_t>(os, kSnapshotVersion);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.depth()));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.basis().domain.rows));
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.basis().domain.cols));
  detail::put_le<double>(os, s.gamma);
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(s.frameCount));
  detail::put_vector(os, s.b);

  RealSparse a = s.A;
  a.makeCompressed();
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(a.rows()));
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(a.nonZeros()));
  for (Eigen::Index i = 0; i <= a.rows(); ++i) {
    detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(a.outerIndexPtr()[i]));
  }
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) {
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(a.innerIndexPtr()[k]));
  }
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) detail::put_le<double>(os, a.valuePtr()[k]);
  detail::put_vector(os, s.fReal);
  if (!os) throw Error("snapshot: write failed");
}

inline ModelSnapshot read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kSnapshotMagic) {
    throw IngestionError("snapshot: bad magic bytes");
  }
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kSnapshotVersion) {
    throw IngestionError("snapshot: unsupported version " + std::to_string(version));
  }
  ModelSnapshot snap;
  snap.depth = static_cast<int>(detail::get_le<std::uint32_t>(is));
  snap.rows = static_cast<int>(detail::get_le<std::uint32_t>(is));
  snap.cols = static_cast<int>(detail::get_le<std::uint32_t>(is));
  if (snap.depth < 1 || snap.rows < 1 || snap.cols < 1) throw IngestionError("snapshot: bad dimensions");
  snap.gamma = detail::get_le<double>(is);
  snap.frameCount = detail::get_le<std::uint64_t>(is);
  const std::uint64_t n = static_cast<std::uint64_t>(snap.depth) * snap.rows * snap.cols;
  snap.b = detail::get_vector(is, n);

  const auto rows = detail::get_le<std::uint64_t>(is);
  const auto nnz = detail::get_le<std::uint64_t>(is);
  if (rows != n) throw IngestionError("snapshot: matrix size does not match the header");
  std::vector<int> outer(rows + 1);
  for (auto& o : outer) o = static_cast<int>(detail::get_le<std::uint64_t>(is));
  if (outer.front() != 0 || static_cast<std::uint64_t>(outer.back()) != nnz ||
      !std::is_sorted(outer.begin(), outer.end())) {
    throw IngestionError("snapshot: corrupt row pointers");
  }
  std::vector<int> inner(nnz);
  for (auto& c : inner) {
    c = static_cast<int>(detail::get_le<std::uint32_t>(is));
    if (c < 0 || static_cast<std::uint64_t>(c) >= n) throw IngestionError("snapshot: column index out of range");
  }
  std::vector<double> values(nnz);
  for (auto& v : values) v = detail::get_le<double>(is);
  snap.A = Eigen::Map<const RealSparse>(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(nnz), outer.data(), inner.data(),
                                        values.data());
  snap.fReal = detail::get_vector(is, n);
  return snap;
}

/// Rebuilds a ModelState over `layout`; the stored matrix must have the
/// layout's sparsity pattern.
inline ModelState restore_model(const ModelSnapshot& snap, std::shared_ptr<const NormalLayout> layout) {
  if (snap.depth != layout->depth || snap.rows != layout->basis->domain.rows ||
      snap.cols != layout->basis->domain.cols) {
    throw InvalidInput("restore_model: snapshot dimensions do not match the layout");
  }
  const RealSparse& p = layout->pattern;
  const bool samePattern =
      snap.A.nonZeros() == p.nonZeros() &&
      std::equal(p.outerIndexPtr(), p.outerIndexPtr() + p.rows() + 1, snap.A.outerIndexPtr()) &&
      std::equal(p.innerIndexPtr(), p.innerIndexPtr() + p.nonZeros(), snap.A.innerIndexPtr());
  if (!samePattern) throw InvalidInput("restore_model: snapshot sparsity pattern does not match the layout");
  check_gamma(snap.gamma);
  ModelState s;
  s.layout = std::move(layout);
  s.A = snap.A;
  s.b = snap.b;
  s.fReal = snap.fReal;
  s.gamma = snap.gamma;
  s.frameCount = static_cast<int>(snap.frameCount);
  s.refresh_spectra();
  return s;
}

inline void save_snapshot(const std::string& path, const ModelState& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("snapshot: cannot open " + path + " for writing");
  write_snapshot(os, s);
}

inline ModelSnapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("snapshot: cannot open " + path);
  return read_snapshot(is);
}

}  // namespace srdcf
