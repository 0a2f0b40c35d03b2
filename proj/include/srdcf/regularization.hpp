#pragma once

// Spatial penalty w, its sparsified spectrum, and the real-domain
// regularization operator C~ = (1/MN) B C(w^) B^H with Gram matrix C~^T C~.

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "srdcf/signal.hpp"

namespace srdcf {

/// Cell where the filter's spatial support is centred: the reflection of the
/// sample-centre cell, since labels peak at the circular origin.
inline std::pair<int, int> filter_center(GridDomain domain) {
  const int cm = domain.rows / 2;
  const int cn = domain.cols / 2;
  return {(domain.rows - cm) % domain.rows, (domain.cols - cn) % domain.cols};
}

/// w(m,n) = mu + eta (dm / P)^2 + eta (dn / Q)^2, displacements measured from
/// filter_center(domain).
inline RealGrid build_weights(GridDomain domain, double targetRowsCells, double targetColsCells,
                              double mu, double eta) {
  if (!(targetRowsCells > 0.0) || !(targetColsCells > 0.0)) {
    throw InvalidInput("build_weights: target size must be positive");
  }
  if (!(mu > 0.0) || eta < 0.0) throw InvalidInput("build_weights: need mu > 0 and eta >= 0");
  const auto [cm, cn] = filter_center(domain);
  RealGrid w(domain.rows, domain.cols);
  for (int m = 0; m < domain.rows; ++m) {
    const double dm = (m - cm) / targetRowsCells;
    for (int n = 0; n < domain.cols; ++n) {
      const double dn = (n - cn) / targetColsCells;
      w(m, n) = mu + eta * dm * dm + eta * dn * dn;
    }
  }
  return w;
}

struct SparseCoefficient {
  int index = 0;  // row-major linear frequency index
  Complex value;
};

/// Retained DFT coefficients, sorted by index.
struct SparseSpectrum {
  GridDomain domain;
  std::vector<SparseCoefficient> coeffs;

  [[nodiscard]] int nnz() const { return static_cast<int>(coeffs.size()); }

  [[nodiscard]] Spectrum dense() const {
    Spectrum s = Spectrum::Zero(domain.rows, domain.cols);
    for (const auto& c : coeffs) s(domain.row_of(c.index), domain.col_of(c.index)) = c.value;
    return s;
  }

  [[nodiscard]] const SparseCoefficient* find(int index) const {
    auto it = std::lower_bound(coeffs.begin(), coeffs.end(), index,
                               [](const SparseCoefficient& c, int i) { return c.index < i; });
    return (it != coeffs.end() && it->index == index) ? &*it : nullptr;
  }
};

/// Keeps the largest-magnitude DFT coefficients of w. Fixed points and
/// conjugate pairs are ranked as groups; the threshold is the magnitude of the
/// group at which the kept count first reaches targetNnz, and every group at
/// or above it survives. DC is always kept; numerically zero coefficients
/// never are.
inline SparseSpectrum sparsify_spectrum(const RealGrid& w, int targetNnz) {
  const GridDomain domain = GridDomain::of(w);
  const Spectrum spec = dft2(w);
  const Complex* s = spec.data();

  struct Group {
    int lead;
    int partner;
    double magnitude;
  };
  std::vector<Group> groups;
  for (int p = 0; p < domain.size(); ++p) {
    const int q = domain.reflect(p);
    if (q < p) continue;
    groups.push_back({p, q, std::max(std::abs(s[p]), std::abs(s[q]))});
  }
  const double dc = std::abs(s[0]);
  const double floor = 1e-10 * std::max(dc, std::max_element(groups.begin(), groups.end(),
                                                             [](const Group& a, const Group& b) {
                                                               return a.magnitude < b.magnitude;
                                                             })->magnitude);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const Group& a, const Group& b) { return a.magnitude > b.magnitude; });

  double threshold = 0.0;
  int count = 0;
  for (const auto& g : groups) {
    count += g.lead == g.partner ? 1 : 2;
    threshold = g.magnitude;
    if (count >= targetNnz) break;
  }
  threshold *= 1.0 - 1e-9;

  std::vector<int> kept;
  for (const auto& g : groups) {
    const bool isDc = g.lead == 0;
    if (isDc || (g.magnitude >= threshold && g.magnitude > floor)) {
      kept.push_back(g.lead);
      if (g.partner != g.lead) kept.push_back(g.partner);
    }
  }
  std::sort(kept.begin(), kept.end());

  SparseSpectrum out;
  out.domain = domain;
  out.coeffs.reserve(kept.size());
  for (int p : kept) out.coeffs.push_back({p, s[p]});
  return out;
}

/// Penalty function together with the sparse spectrum the solver uses.
struct SpatialWeights {
  double mu = 0.1;
  double eta = 3.0;
  double targetRowsCells = 0.0;
  double targetColsCells = 0.0;
  GridDomain domain;
  RealGrid spatial;  // inverse DFT of sparseSpectrum
  SparseSpectrum sparseSpectrum;

  [[nodiscard]] int K() const { return sparseSpectrum.nnz(); }
};

/// Quadratic weights, sparsified, with the DC term shifted so that the
/// truncated penalty has minimum exactly mu.
inline SpatialWeights make_spatial_weights(GridDomain domain, double targetRowsCells,
                                           double targetColsCells, double mu, double eta,
                                           int targetNnz) {
  SpatialWeights sw;
  sw.mu = mu;
  sw.eta = eta;
  sw.targetRowsCells = targetRowsCells;
  sw.targetColsCells = targetColsCells;
  sw.domain = domain;
  sw.sparseSpectrum =
      sparsify_spectrum(build_weights(domain, targetRowsCells, targetColsCells, mu, eta), targetNnz);
  RealGrid truncated = idft2_real(sw.sparseSpectrum.dense());
  const double shift = mu - truncated.minCoeff();
  auto& dc = sw.sparseSpectrum.coeffs.front();  // index 0 is always kept
  dc.value += Complex(shift * domain.size(), 0.0);
  sw.spatial = idft2_real(sw.sparseSpectrum.dense());
  return sw;
}

/// Constant weights sqrt(lambda): the standard DCF Tikhonov term.
inline SpatialWeights uniform_weights(GridDomain domain, double lambda) {
  if (!(lambda > 0.0)) throw InvalidInput("uniform_weights: lambda must be positive");
  SpatialWeights sw;
  sw.mu = std::sqrt(lambda);
  sw.eta = 0.0;
  sw.domain = domain;
  sw.sparseSpectrum.domain = domain;
  sw.sparseSpectrum.coeffs.push_back({0, Complex(domain.size() * std::sqrt(lambda), 0.0)});
  sw.spatial = RealGrid::Constant(domain.rows, domain.cols, std::sqrt(lambda));
  return sw;
}

using RealSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct RegularizationOperator {
  RealSparse realConvMatrix;  // C~
  RealSparse gram;            // C~^T C~ (+ jitter I)
};

namespace detail {

inline RealSparse prune_relative(const RealSparse& m, double rel) {
  double scale = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (RealSparse::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  RealSparse out = m;
  const double cut = rel * scale;
  out.prune([cut](Eigen::Index, Eigen::Index, double v) { return std::abs(v) > cut; });
  out.makeCompressed();
  return out;
}

}  // namespace detail

/// Builds C~ and its Gram matrix from a Hermitian sparse spectrum.
inline RegularizationOperator build_operator(const SparseSpectrum& spectrum,
                                             const RealSpectrumBasis& basis, double jitter = 0.0) {
  if (!(spectrum.domain == basis.domain)) throw InvalidInput("build_operator: domain mismatch");
  const GridDomain dom = basis.domain;
  double scale = 1.0;
  for (const auto& c : spectrum.coeffs) scale = std::max(scale, std::abs(c.value));
  for (const auto& c : spectrum.coeffs) {
    const SparseCoefficient* mate = spectrum.find(dom.reflect(c.index));
    if (mate == nullptr || std::abs(mate->value - std::conj(c.value)) > kHermitianTolerance * scale) {
      throw SymmetryViolation("build_operator: regularizer spectrum is not Hermitian-symmetric");
    }
  }

  // Circular convolution with w^ in the frequency domain: row p holds w^(p - q).
  const int size = dom.size();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(size) * spectrum.coeffs.size());
  const double inv = 1.0 / size;
  for (int p = 0; p < size; ++p) {
    const int pm = dom.row_of(p);
    const int pn = dom.col_of(p);
    for (const auto& c : spectrum.coeffs) {
      const int qm = ((pm - dom.row_of(c.index)) % dom.rows + dom.rows) % dom.rows;
      const int qn = ((pn - dom.col_of(c.index)) % dom.cols + dom.cols) % dom.cols;
      t.emplace_back(p, dom.index(qm, qn), c.value * inv);
    }
  }
  Eigen::SparseMatrix<Complex> conv(size, size);
  conv.setFromTriplets(t.begin(), t.end());
  const Eigen::SparseMatrix<Complex> b = basis_matrix(basis);
  const Eigen::SparseMatrix<Complex> bh = b.adjoint();
  const Eigen::SparseMatrix<Complex> ct = b * conv * bh;

  double maxRe = 0.0;
  double maxIm = 0.0;
  for (int k = 0; k < ct.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(ct, k); it; ++it) {
      maxRe = std::max(maxRe, std::abs(it.value().real()));
      maxIm = std::max(maxIm, std::abs(it.value().imag()));
    }
  }
  if (maxIm > 1e-10 * std::max(1.0, maxRe)) {
    throw SymmetryViolation("build_operator: transformed operator is not real");
  }

  RegularizationOperator op;
  op.realConvMatrix = detail::prune_relative(RealSparse(ct.real()), 1e-13);
  RealSparse g = op.realConvMatrix.transpose() * op.realConvMatrix;
  RealSparse gt = g.transpose();
  g = 0.5 * (g + gt);
  g = detail::prune_relative(g, 1e-13);
  if (jitter > 0.0) {
    RealSparse id(size, size);
    id.setIdentity();
    g = g + jitter * id;
  }
  g.makeCompressed();
  op.gram = std::move(g);
  return op;
}

}  // namespace srdcf
