#pragma once

// Real-valued normal equations A f~ = b over the concatenated filter
// f~ = (f~^1 ... f~^d), their online update, the first-frame direct solve and
// Gauss-Seidel sweeps.
//
// Unknown ordering is layer-major, then row-major frequency index: unknown
// (l, p) lives at l * MN + p.

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <memory>
#include <vector>

#include "srdcf/features.hpp"
#include "srdcf/regularization.hpp"
#include "srdcf/signal.hpp"

namespace srdcf {

inline std::vector<Spectrum> feature_spectra(const FeatureMap& fm) {
  std::vector<Spectrum> out;
  out.reserve(fm.channels.size());
  for (const auto& ch : fm.channels) out.push_back(dft2(ch));
  return out;
}

/// D~ = (D~^1 ... D~^d) with D~^l = B diag(x^^l) B^H. On a reflected pair
/// (p in Omega+, q = rho p) each block acts as [[a, b], [-b, a]] with
/// a + ib = x^^l(p); on a fixed point it is the real scalar x^^l(p).
class DataOperator {
 public:
  DataOperator(std::vector<Spectrum> spectra, std::shared_ptr<const RealSpectrumBasis> basis)
      : spectra_(std::move(spectra)), basis_(std::move(basis)) {
    if (spectra_.empty()) throw InvalidInput("DataOperator: need at least one channel");
    for (const auto& s : spectra_) {
      if (GridDomain::of(s) != basis_->domain) {
        throw InvalidInput("DataOperator: sample channels do not match the basis domain");
      }
    }
  }

  [[nodiscard]] int depth() const { return static_cast<int>(spectra_.size()); }
  [[nodiscard]] int size() const { return basis_->size(); }
  [[nodiscard]] const RealSpectrumBasis& basis() const { return *basis_; }
  [[nodiscard]] const std::shared_ptr<const RealSpectrumBasis>& basis_ptr() const { return basis_; }
  [[nodiscard]] const std::vector<Spectrum>& spectra() const { return spectra_; }

  /// x^^l at linear index p.
  [[nodiscard]] Complex coeff(int l, int p) const { return spectra_[l].data()[p]; }

  /// D~ f~ (length MN) for f~ of length d*MN.
  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
    const int mn = size();
    if (f.size() != static_cast<Eigen::Index>(depth()) * mn) {
      throw InvalidInput("DataOperator::apply: size mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mn);
    const auto& bs = *basis_;
    for (int l = 0; l < depth(); ++l) {
      const double* fl = f.data() + static_cast<Eigen::Index>(l) * mn;
      for (int p : bs.omega0) out[p] += coeff(l, p).real() * fl[p];
      for (std::size_t k = 0; k < bs.omegaPlus.size(); ++k) {
        const int p = bs.omegaPlus[k];
        const int q = bs.omegaMinus[k];
        const Complex z = coeff(l, p);
        out[p] += z.real() * fl[p] + z.imag() * fl[q];
        out[q] += -z.imag() * fl[p] + z.real() * fl[q];
      }
    }
    return out;
  }

  /// D~^T y (length d*MN).
  [[nodiscard]] Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const {
    const int mn = size();
    if (y.size() != mn) throw InvalidInput("DataOperator::apply_transpose: size mismatch");
    Eigen::VectorXd out(static_cast<Eigen::Index>(depth()) * mn);
    const auto& bs = *basis_;
    for (int l = 0; l < depth(); ++l) {
      double* ol = out.data() + static_cast<Eigen::Index>(l) * mn;
      for (int p : bs.omega0) ol[p] = coeff(l, p).real() * y[p];
      for (std::size_t k = 0; k < bs.omegaPlus.size(); ++k) {
        const int p = bs.omegaPlus[k];
        const int q = bs.omegaMinus[k];
        const Complex z = coeff(l, p);
        ol[p] = z.real() * y[p] - z.imag() * y[q];
        ol[q] = z.imag() * y[p] + z.real() * y[q];
      }
    }
    return out;
  }

  /// Explicit MN x dMN matrix.
  [[nodiscard]] RealSparse to_sparse() const {
    const int mn = size();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(2) * mn * depth());
    const auto& bs = *basis_;
    for (int l = 0; l < depth(); ++l) {
      const int off = l * mn;
      for (int p : bs.omega0) t.emplace_back(p, off + p, coeff(l, p).real());
      for (std::size_t k = 0; k < bs.omegaPlus.size(); ++k) {
        const int p = bs.omegaPlus[k];
        const int q = bs.omegaMinus[k];
        const Complex z = coeff(l, p);
        t.emplace_back(p, off + p, z.real());
        t.emplace_back(p, off + q, z.imag());
        t.emplace_back(q, off + p, -z.imag());
        t.emplace_back(q, off + q, z.real());
      }
    }
    RealSparse m(mn, static_cast<Eigen::Index>(depth()) * mn);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

 private:
  std::vector<Spectrum> spectra_;
  std::shared_ptr<const RealSpectrumBasis> basis_;
};

inline DataOperator build_data_operator(const FeatureMap& sample,
                                        std::shared_ptr<const RealSpectrumBasis> basis) {
  if (sample.channels.empty()) throw InvalidInput("build_data_operator: empty sample");
  if (sample.domain() != basis->domain) {
    throw InvalidInput("build_data_operator: sample does not match the basis domain");
  }
  return {feature_spectra(sample), std::move(basis)};
}

/// Real transformed label y~ = B vec(y^).
inline Eigen::VectorXd real_label(const LabelMap& label, const RealSpectrumBasis& basis) {
  if (GridDomain::of(label.values) != basis.domain) {
    throw InvalidInput("real_label: label does not match the basis domain");
  }
  return to_real_spectrum(dft2(label.values), basis, SymmetryCheck::Disabled);
}

/// Fixed sparsity pattern of A (union of every D~^T D~ and of W~^T W~) with
/// precomputed value slots, so online updates run in place.
struct NormalLayout {
  std::shared_ptr<const RealSpectrumBasis> basis;
  int depth = 0;
  RealSparse gram;              // C~^T C~ for one layer
  RealSparse pattern;           // dMN x dMN, zero values
  std::vector<int> diagSlot;    // per row
  std::vector<int> dataSlots;   // per row, per layer: (l2, p) then (l2, rho p) or -1
  std::vector<int> gramSlots;   // per layer, per gram nonzero in storage order

  [[nodiscard]] int mn() const { return basis->size(); }
  [[nodiscard]] int unknowns() const { return depth * mn(); }
};

namespace detail {

inline int find_slot(const RealSparse& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  const int* begin = inner + outer[row];
  const int* end = inner + outer[row + 1];
  const int* it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return -1;
  return static_cast<int>(it - inner);
}

}  // namespace detail

inline std::shared_ptr<const NormalLayout> make_normal_layout(
    std::shared_ptr<const RealSpectrumBasis> basis, const RegularizationOperator& reg, int depth) {
  if (depth < 1) throw InvalidInput("make_normal_layout: depth must be positive");
  const int mn = basis->size();
  if (reg.gram.rows() != mn) throw InvalidInput("make_normal_layout: regularizer size mismatch");
  auto layout = std::make_shared<NormalLayout>();
  layout->basis = basis;
  layout->depth = depth;
  layout->gram = reg.gram;
  const int n = depth * mn;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * (2 * depth) + static_cast<std::size_t>(depth) * reg.gram.nonZeros());
  for (int l = 0; l < depth; ++l) {
    for (int p = 0; p < mn; ++p) {
      const int q = basis->partner[p];
      for (int l2 = 0; l2 < depth; ++l2) {
        t.emplace_back(l * mn + p, l2 * mn + p, 1.0);
        if (q != p) t.emplace_back(l * mn + p, l2 * mn + q, 1.0);
      }
    }
    for (int r = 0; r < mn; ++r) {
      for (RealSparse::InnerIterator it(reg.gram, r); it; ++it) {
        t.emplace_back(l * mn + r, l * mn + static_cast<int>(it.col()), 1.0);
      }
    }
  }
  RealSparse pat(n, n);
  pat.setFromTriplets(t.begin(), t.end());
  pat.makeCompressed();
  std::fill(pat.valuePtr(), pat.valuePtr() + pat.nonZeros(), 0.0);

  layout->diagSlot.resize(n);
  for (int i = 0; i < n; ++i) layout->diagSlot[i] = detail::find_slot(pat, i, i);

  layout->dataSlots.assign(static_cast<std::size_t>(n) * 2 * depth, -1);
  for (int l = 0; l < depth; ++l) {
    for (int p = 0; p < mn; ++p) {
      const int q = basis->partner[p];
      const int row = l * mn + p;
      int* slots = &layout->dataSlots[static_cast<std::size_t>(row) * 2 * depth];
      for (int l2 = 0; l2 < depth; ++l2) {
        slots[2 * l2] = detail::find_slot(pat, row, l2 * mn + p);
        if (q != p) slots[2 * l2 + 1] = detail::find_slot(pat, row, l2 * mn + q);
      }
    }
  }

  layout->gramSlots.reserve(static_cast<std::size_t>(depth) * reg.gram.nonZeros());
  for (int l = 0; l < depth; ++l) {
    for (int r = 0; r < mn; ++r) {
      for (RealSparse::InnerIterator it(reg.gram, r); it; ++it) {
        layout->gramSlots.push_back(detail::find_slot(pat, l * mn + r, l * mn + static_cast<int>(it.col())));
      }
    }
  }
  layout->pattern = std::move(pat);
  return layout;
}

/// Adds alpha * D~^T D~ into values laid out by `layout`.
inline void accumulate_data_gram(const NormalLayout& layout, const DataOperator& data, double alpha,
                                 double* values) {
  const int mn = layout.mn();
  const int d = layout.depth;
  const auto& bs = *layout.basis;
  for (int l = 0; l < d; ++l) {
    for (int p : bs.omega0) {
      const int* slots = &layout.dataSlots[static_cast<std::size_t>(l * mn + p) * 2 * d];
      const double xl = data.coeff(l, p).real();
      for (int l2 = 0; l2 < d; ++l2) values[slots[2 * l2]] += alpha * (xl * data.coeff(l2, p).real());
    }
    for (std::size_t k = 0; k < bs.omegaPlus.size(); ++k) {
      const int p = bs.omegaPlus[k];
      const int q = bs.omegaMinus[k];
      const int* rowP = &layout.dataSlots[static_cast<std::size_t>(l * mn + p) * 2 * d];
      const int* rowQ = &layout.dataSlots[static_cast<std::size_t>(l * mn + q) * 2 * d];
      const Complex zl = data.coeff(l, p);
      for (int l2 = 0; l2 < d; ++l2) {
        const Complex z2 = data.coeff(l2, p);
        // conj(zl) * z2, written so that entry (i, j) and (j, i) round identically.
        const double re = zl.real() * z2.real() + zl.imag() * z2.imag();
        const double im = zl.real() * z2.imag() - zl.imag() * z2.real();
        values[rowP[2 * l2]] += alpha * re;
        values[rowP[2 * l2 + 1]] += alpha * im;
        values[rowQ[2 * l2]] += alpha * re;
        values[rowQ[2 * l2 + 1]] -= alpha * im;
      }
    }
  }
}

inline void accumulate_regularizer(const NormalLayout& layout, double alpha, double* values) {
  const double* g = layout.gram.valuePtr();
  const auto nnz = layout.gram.nonZeros();
  std::size_t s = 0;
  for (int l = 0; l < layout.depth; ++l) {
    for (Eigen::Index k = 0; k < nnz; ++k) values[layout.gramSlots[s++]] += alpha * g[k];
  }
}

/// Running normal equations and the current filter.
struct ModelState {
  std::shared_ptr<const NormalLayout> layout;
  RealSparse A;
  Eigen::VectorXd b;
  Eigen::VectorXd fReal;
  std::vector<Spectrum> fSpectra;
  double gamma = 0.025;
  int frameCount = 0;

  [[nodiscard]] int depth() const { return layout->depth; }
  [[nodiscard]] const RealSpectrumBasis& basis() const { return *layout->basis; }

  /// Recomputes fSpectra = B^H f~^l for every layer.
  void refresh_spectra() {
    const int mn = layout->mn();
    fSpectra.clear();
    for (int l = 0; l < depth(); ++l) {
      fSpectra.push_back(from_real_spectrum(fReal.segment(static_cast<Eigen::Index>(l) * mn, mn), basis()));
    }
  }
};

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidConfig("learning rate gamma must lie in [0, 1]");
}

/// A_1 = D~^T D~ + W~^T W~, b_1 = D~^T y~. The filter starts at zero.
inline ModelState init_model(const DataOperator& data, const Eigen::VectorXd& labelReal,
                             std::shared_ptr<const NormalLayout> layout, double gamma) {
  check_gamma(gamma);
  if (data.depth() != layout->depth || data.size() != layout->mn()) {
    throw InvalidInput("init_model: sample does not match the model layout");
  }
  ModelState s;
  s.layout = std::move(layout);
  s.gamma = gamma;
  s.A = s.layout->pattern;
  accumulate_data_gram(*s.layout, data, 1.0, s.A.valuePtr());
  accumulate_regularizer(*s.layout, 1.0, s.A.valuePtr());
  s.b = data.apply_transpose(labelReal);
  s.fReal = Eigen::VectorXd::Zero(s.layout->unknowns());
  s.refresh_spectra();
  s.frameCount = 1;
  return s;
}

inline ModelState init_model(const FeatureMap& sample, const LabelMap& label,
                             const RegularizationOperator& reg,
                             std::shared_ptr<const RealSpectrumBasis> basis, double gamma) {
  DataOperator data = build_data_operator(sample, basis);
  const Eigen::VectorXd y = real_label(label, *basis);
  return init_model(data, y, make_normal_layout(basis, reg, sample.depth()), gamma);
}

/// A_t = (1 - g) A_{t-1} + g (D~^T D~ + W~^T W~), b_t = (1 - g) b_{t-1} + g D~^T y~.
inline void update_model_in_place(ModelState& s, const DataOperator& data,
                                  const Eigen::VectorXd& labelReal) {
  check_gamma(s.gamma);
  if (s.frameCount < 1) throw InvalidInput("update_model: model has not been initialized");
  if (data.depth() != s.depth() || data.size() != s.layout->mn()) {
    throw InvalidInput("update_model: sample does not match the model layout");
  }
  if (labelReal.size() != s.layout->mn()) throw InvalidInput("update_model: label size mismatch");
  const double g = s.gamma;
  double* v = s.A.valuePtr();
  const auto nnz = s.A.nonZeros();
  for (Eigen::Index k = 0; k < nnz; ++k) v[k] *= 1.0 - g;
  accumulate_data_gram(*s.layout, data, g, v);
  accumulate_regularizer(*s.layout, g, v);
  s.b = (1.0 - g) * s.b + g * data.apply_transpose(labelReal);
  ++s.frameCount;
}

inline ModelState update_model(ModelState s, const DataOperator& data, const Eigen::VectorXd& labelReal) {
  update_model_in_place(s, data, labelReal);
  return s;
}

inline ModelState update_model(ModelState s, const FeatureMap& sample, const LabelMap& label) {
  const DataOperator data = build_data_operator(sample, s.layout->basis);
  update_model_in_place(s, data, real_label(label, s.basis()));
  return s;
}

/// Value index of each diagonal entry; throws SingularSystem on a missing or
/// non-positive pivot.
inline std::vector<int> diagonal_slots(const RealSparse& a) {
  std::vector<int> slots(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    slots[i] = detail::find_slot(a, i, i);
    if (slots[i] < 0 || a.valuePtr()[slots[i]] == 0.0) {
      throw SingularSystem("Gauss-Seidel: zero diagonal entry at row " + std::to_string(i));
    }
  }
  return slots;
}

/// `iterations` sweeps of L x^(j) = b - U x^(j-1), in place.
inline void gauss_seidel_sweeps(const RealSparse& a, const std::vector<int>& diag,
                                const Eigen::VectorXd& b, Eigen::VectorXd& x, int iterations) {
  const int n = static_cast<int>(a.rows());
  if (b.size() != n || x.size() != n || static_cast<int>(diag.size()) != n) {
    throw InvalidInput("Gauss-Seidel: size mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (a.valuePtr()[diag[i]] == 0.0) {
      throw SingularSystem("Gauss-Seidel: zero diagonal entry at row " + std::to_string(i));
    }
  }
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  for (int it = 0; it < iterations; ++it) {
    for (int i = 0; i < n; ++i) {
      double sum = b[i];
      const int dk = diag[i];
      for (int k = outer[i]; k < outer[i + 1]; ++k) {
        if (k != dk) sum -= val[k] * x[inner[k]];
      }
      x[i] = sum / val[dk];
    }
  }
}

inline void gauss_seidel_sweeps(const RealSparse& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                                int iterations) {
  gauss_seidel_sweeps(a, diagonal_slots(a), b, x, iterations);
}

/// Runs `iterations` sweeps on the model starting from its current filter.
inline void gauss_seidel(ModelState& s, int iterations) {
  gauss_seidel_sweeps(s.A, s.layout->diagSlot, s.b, s.fReal, iterations);
  s.refresh_spectra();
}

/// First-frame estimate: per layer, solves
/// (sum_p D~^pT D~^p + d C~^T C~) f~^l = D~^lT y~ with one shared factorization.
inline Eigen::VectorXd initial_solve(const DataOperator& data, const Eigen::VectorXd& labelReal,
                                     const RegularizationOperator& reg) {
  const int mn = data.size();
  const int d = data.depth();
  if (reg.gram.rows() != mn || labelReal.size() != mn) {
    throw InvalidInput("initial_solve: dimension mismatch");
  }
  // sum_p D~^pT D~^p is diagonal: each 2x2 pair block is |x^^p|^2 I.
  Eigen::VectorXd energy = Eigen::VectorXd::Zero(mn);
  for (int l = 0; l < d; ++l) {
    for (int p = 0; p < mn; ++p) energy[p] += std::norm(data.coeff(l, p));
  }
  Eigen::SparseMatrix<double> sys = Eigen::SparseMatrix<double>(reg.gram) * static_cast<double>(d);
  for (int p = 0; p < mn; ++p) sys.coeffRef(p, p) += energy[p];
  sys.makeCompressed();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(sys);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw SingularSystem("initial_solve: factorization failed");
  }
  const Eigen::VectorXd rhs = data.apply_transpose(labelReal);
  Eigen::VectorXd f(static_cast<Eigen::Index>(d) * mn);
  for (int l = 0; l < d; ++l) {
    f.segment(static_cast<Eigen::Index>(l) * mn, mn) = ldlt.solve(rhs.segment(static_cast<Eigen::Index>(l) * mn, mn));
    if (ldlt.info() != Eigen::Success) throw SingularSystem("initial_solve: back-substitution failed");
  }
  return f;
}

inline Eigen::VectorXd initial_solve(const FeatureMap& sample, const LabelMap& label,
                                     const RegularizationOperator& reg,
                                     std::shared_ptr<const RealSpectrumBasis> basis) {
  const DataOperator data = build_data_operator(sample, basis);
  return initial_solve(data, real_label(label, *basis), reg);
}

/// Fraction of structurally non-zero entries of A.
inline double nnz_fraction(const RealSparse& a) {
  const double n = static_cast<double>(a.rows());
  return static_cast<double>(a.nonZeros()) / (n * n);
}

}  // namespace srdcf
