#pragma once

// 2D DFT machinery and the real-valued reparametrization of Hermitian
// spectra through the point reflection rho(m,n) = (-m mod M, -n mod N).

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "srdcf/error.hpp"

namespace srdcf {

using Complex = std::complex<double>;
using RealGrid = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexGrid = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// DFT coefficients of an M x N map, indexed by (m, n) in DFT order.
using Spectrum = ComplexGrid;

/// M x N index set; linear indices are row-major, p = m * N + n.
struct GridDomain {
  int rows = 0;
  int cols = 0;

  GridDomain() = default;
  GridDomain(int m, int n) : rows(m), cols(n) {
    if (m < 1 || n < 1) {
      throw InvalidInput("grid domain must be at least 1x1, got " + std::to_string(m) + "x" +
                         std::to_string(n));
    }
  }

  [[nodiscard]] int size() const { return rows * cols; }
  [[nodiscard]] int index(int m, int n) const { return m * cols + n; }
  [[nodiscard]] int row_of(int p) const { return p / cols; }
  [[nodiscard]] int col_of(int p) const { return p % cols; }

  /// Point reflection of a linear index.
  [[nodiscard]] int reflect(int p) const {
    const int m = row_of(p);
    const int n = col_of(p);
    return index((rows - m) % rows, (cols - n) % cols);
  }

  template <typename Grid>
  [[nodiscard]] static GridDomain of(const Grid& g) {
    return {static_cast<int>(g.rows()), static_cast<int>(g.cols())};
  }

  friend bool operator==(const GridDomain&, const GridDomain&) = default;
};

namespace detail {

// Inverse transforms carry the 1/(MN) factor; forward is unnormalized.
inline void fft_rows_cols(ComplexGrid& g, bool inverse) {
  Eigen::FFT<double> fft;
  const auto rows = g.rows();
  const auto cols = g.cols();
  std::vector<Complex> in;
  std::vector<Complex> out;
  if (cols > 1) {
    in.resize(cols);
    for (Eigen::Index m = 0; m < rows; ++m) {
      for (Eigen::Index n = 0; n < cols; ++n) in[n] = g(m, n);
      if (inverse) {
        fft.inv(out, in);
      } else {
        fft.fwd(out, in);
      }
      for (Eigen::Index n = 0; n < cols; ++n) g(m, n) = out[n];
    }
  }
  if (rows > 1) {
    in.resize(rows);
    for (Eigen::Index n = 0; n < cols; ++n) {
      for (Eigen::Index m = 0; m < rows; ++m) in[m] = g(m, n);
      if (inverse) {
        fft.inv(out, in);
      } else {
        fft.fwd(out, in);
      }
      for (Eigen::Index m = 0; m < rows; ++m) g(m, n) = out[m];
    }
  }
}

}  // namespace detail

inline Spectrum dft2(const RealGrid& map) {
  if (map.rows() < 1 || map.cols() < 1) throw InvalidInput("dft2: empty map");
  Spectrum g = map.cast<Complex>();
  detail::fft_rows_cols(g, false);
  return g;
}

inline Spectrum dft2(const ComplexGrid& map) {
  if (map.rows() < 1 || map.cols() < 1) throw InvalidInput("dft2: empty map");
  Spectrum g = map;
  detail::fft_rows_cols(g, false);
  return g;
}

inline ComplexGrid idft2(const Spectrum& spec) {
  if (spec.rows() < 1 || spec.cols() < 1) throw InvalidInput("idft2: empty spectrum");
  ComplexGrid g = spec;
  detail::fft_rows_cols(g, true);
  return g;
}

/// Inverse DFT of a Hermitian spectrum, imaginary residue dropped.
inline RealGrid idft2_real(const Spectrum& spec) { return idft2(spec).real(); }

/// Largest |s(p) - conj(s(rho p))| relative to max |s|.
inline double hermitian_defect(const Spectrum& spec) {
  const auto dom = GridDomain::of(spec);
  double scale = 0.0;
  double worst = 0.0;
  for (int p = 0; p < dom.size(); ++p) {
    const Complex a = spec(dom.row_of(p), dom.col_of(p));
    const int q = dom.reflect(p);
    const Complex b = spec(dom.row_of(q), dom.col_of(q));
    scale = std::max(scale, std::abs(a));
    worst = std::max(worst, std::abs(a - std::conj(b)));
  }
  return scale > 0.0 ? worst / scale : worst;
}

enum class FrequencyClass : std::uint8_t { Fixed, Plus, Minus };

/// Partition of the domain into rho-fixed points, and the two halves of each
/// reflected pair. omegaMinus[i] == reflect(omegaPlus[i]).
struct RealSpectrumBasis {
  GridDomain domain;
  std::vector<int> omega0;
  std::vector<int> omegaPlus;
  std::vector<int> omegaMinus;
  std::vector<int> partner;             // rho(p) for every linear index
  std::vector<FrequencyClass> classes;  // class of every linear index

  [[nodiscard]] int size() const { return domain.size(); }
};

inline RealSpectrumBasis partition_domain(GridDomain domain) {
  RealSpectrumBasis basis;
  basis.domain = domain;
  const int size = domain.size();
  basis.partner.resize(size);
  basis.classes.resize(size);
  for (int p = 0; p < size; ++p) {
    const int q = domain.reflect(p);
    basis.partner[p] = q;
    if (q == p) {
      basis.classes[p] = FrequencyClass::Fixed;
      basis.omega0.push_back(p);
    } else if (p < q) {
      basis.classes[p] = FrequencyClass::Plus;
      basis.omegaPlus.push_back(p);
      basis.omegaMinus.push_back(q);
    } else {
      basis.classes[p] = FrequencyClass::Minus;
    }
  }
  return basis;
}

enum class SymmetryCheck : std::uint8_t { Disabled, Enabled };

#ifdef NDEBUG
inline constexpr SymmetryCheck kDefaultSymmetryCheck = SymmetryCheck::Disabled;
#else
inline constexpr SymmetryCheck kDefaultSymmetryCheck = SymmetryCheck::Enabled;
#endif

inline constexpr double kHermitianTolerance = 1e-10;

namespace detail {

inline void require_domain(const RealSpectrumBasis& basis, Eigen::Index rows, Eigen::Index cols,
                           const char* what) {
  if (rows != basis.domain.rows || cols != basis.domain.cols) {
    throw InvalidInput(std::string(what) + ": dimensions do not match the basis domain");
  }
}

}  // namespace detail

/// Applies B to an arbitrary complex vector (row-major vectorized spectrum).
inline Eigen::VectorXcd apply_basis(const Eigen::VectorXcd& v, const RealSpectrumBasis& basis) {
  if (v.size() != basis.size()) throw InvalidInput("apply_basis: size mismatch");
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i_unit(0.0, 1.0);
  Eigen::VectorXcd out(v.size());
  for (int p : basis.omega0) out[p] = v[p];
  for (std::size_t k = 0; k < basis.omegaPlus.size(); ++k) {
    const int p = basis.omegaPlus[k];
    const int q = basis.omegaMinus[k];
    out[p] = (v[p] + v[q]) * s;
    out[q] = (v[q] - v[p]) * s / i_unit;
  }
  return out;
}

/// Applies B^H, the inverse of apply_basis.
inline Eigen::VectorXcd apply_basis_adjoint(const Eigen::VectorXcd& v,
                                            const RealSpectrumBasis& basis) {
  if (v.size() != basis.size()) throw InvalidInput("apply_basis_adjoint: size mismatch");
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i_unit(0.0, 1.0);
  Eigen::VectorXcd out(v.size());
  for (int p : basis.omega0) out[p] = v[p];
  for (std::size_t k = 0; k < basis.omegaPlus.size(); ++k) {
    const int p = basis.omegaPlus[k];
    const int q = basis.omegaMinus[k];
    out[p] = (v[p] - i_unit * v[q]) * s;
    out[q] = (v[p] + i_unit * v[q]) * s;
  }
  return out;
}

/// B as an explicit sparse matrix (at most two entries per row).
inline Eigen::SparseMatrix<Complex> basis_matrix(const RealSpectrumBasis& basis) {
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(2 * basis.size());
  for (int p : basis.omega0) t.emplace_back(p, p, Complex(1.0, 0.0));
  for (std::size_t k = 0; k < basis.omegaPlus.size(); ++k) {
    const int p = basis.omegaPlus[k];
    const int q = basis.omegaMinus[k];
    t.emplace_back(p, p, Complex(s, 0.0));
    t.emplace_back(p, q, Complex(s, 0.0));
    t.emplace_back(q, p, Complex(0.0, s));
    t.emplace_back(q, q, Complex(0.0, -s));
  }
  Eigen::SparseMatrix<Complex> b(basis.size(), basis.size());
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

/// f~ = B f^ for a Hermitian spectrum; the result is real.
inline Eigen::VectorXd to_real_spectrum(const Spectrum& spec, const RealSpectrumBasis& basis,
                                        SymmetryCheck check = kDefaultSymmetryCheck) {
  detail::require_domain(basis, spec.rows(), spec.cols(), "to_real_spectrum");
  if (check == SymmetryCheck::Enabled && hermitian_defect(spec) > kHermitianTolerance) {
    throw SymmetryViolation("to_real_spectrum: spectrum is not Hermitian-symmetric");
  }
  const double r2 = std::sqrt(2.0);
  const Complex* s = spec.data();
  Eigen::VectorXd out(basis.size());
  for (int p : basis.omega0) out[p] = s[p].real();
  for (std::size_t k = 0; k < basis.omegaPlus.size(); ++k) {
    const int p = basis.omegaPlus[k];
    const int q = basis.omegaMinus[k];
    // Real parts of (s_p + s_q)/sqrt2 and (s_q - s_p)/(i sqrt2).
    out[p] = (s[p].real() + s[q].real()) / r2;
    out[q] = (s[q].imag() - s[p].imag()) / r2;
  }
  return out;
}

/// f^ = B^H f~; the result is Hermitian-symmetric.
inline Spectrum from_real_spectrum(const Eigen::Ref<const Eigen::VectorXd>& v,
                                   const RealSpectrumBasis& basis) {
  if (v.size() != basis.size()) throw InvalidInput("from_real_spectrum: size mismatch");
  const double s = 1.0 / std::sqrt(2.0);
  Spectrum out(basis.domain.rows, basis.domain.cols);
  Complex* o = out.data();
  for (int p : basis.omega0) o[p] = Complex(v[p], 0.0);
  for (std::size_t k = 0; k < basis.omegaPlus.size(); ++k) {
    const int p = basis.omegaPlus[k];
    const int q = basis.omegaMinus[k];
    o[p] = Complex(v[p] * s, -v[q] * s);
    o[q] = Complex(v[p] * s, v[q] * s);
  }
  return out;
}

/// Row-major vectorization of a grid.
template <typename Scalar>
inline Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vectorize(
    const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& g) {
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(g.data(), g.size());
}

}  // namespace srdcf
