#include "tidict/gram_decompose.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "tidict/errors.hpp"

namespace tidict {

namespace {

double condition_of(const Matrix& g, double& min_eig) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  min_eig = eig.eigenvalues().minCoeff();
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (min_eig <= 0.0) return std::numeric_limits<double>::infinity();
  return max_eig / min_eig;
}

// Roots of sum_{i<=K} c_i T_i(x) with c_K = 1, as eigenvalues of the
// multiplication-by-x operator on span{T_0..T_{K-1}} modulo the polynomial.
Eigen::VectorXcd chebyshev_roots(const Vector& c) {
  const Eigen::Index k = c.size() - 1;
  Matrix colleague = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    // x T_0 = T_1; x T_i = (T_{i+1} + T_{i-1}) / 2.
    const double up = (i == 0) ? 1.0 : 0.5;
    if (i > 0) colleague(i - 1, i) += 0.5;
    if (i + 1 < k) {
      colleague(i + 1, i) += up;
    } else {
      for (Eigen::Index j = 0; j < k; ++j) colleague(j, i) -= up * c[j];
    }
  }
  Eigen::EigenSolver<Matrix> solver(colleague, false);
  return solver.eigenvalues();
}

}  // namespace

NodeGrid::NodeGrid(Vector origin, Vector spacing, std::vector<std::size_t> counts)
    : origin_(std::move(origin)), spacing_(std::move(spacing)), counts_(std::move(counts)), size_(1) {
  if (counts_.empty()) throw DomainError("NodeGrid: at least one axis required");
  if (static_cast<std::size_t>(origin_.size()) != counts_.size() ||
      static_cast<std::size_t>(spacing_.size()) != counts_.size()) {
    throw DomainError("NodeGrid: origin, spacing and counts must have the same length");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0) throw DomainError("NodeGrid: counts must be positive");
    if (!(spacing_[static_cast<Eigen::Index>(i)] > 0.0)) throw DomainError("NodeGrid: spacing must be positive");
    size_ *= counts_[i];
  }
}

std::vector<std::size_t> NodeGrid::multi_index(std::size_t j) const {
  std::vector<std::size_t> m(counts_.size());
  for (std::size_t i = counts_.size(); i-- > 0;) {
    m[i] = j % counts_[i];
    j /= counts_[i];
  }
  return m;
}

Vector NodeGrid::node(std::size_t j) const {
  const auto m = multi_index(j);
  Vector theta = origin_;
  for (std::size_t i = 0; i < m.size(); ++i) {
    theta[static_cast<Eigen::Index>(i)] += static_cast<double>(m[i]) * spacing_[static_cast<Eigen::Index>(i)];
  }
  return theta;
}

std::vector<Vector> NodeGrid::nodes() const {
  std::vector<Vector> out;
  out.reserve(size_);
  for (std::size_t j = 0; j < size_; ++j) out.push_back(node(j));
  return out;
}

Vector NodeGrid::displacement(std::size_t a, std::size_t b) const {
  const auto ma = multi_index(a);
  const auto mb = multi_index(b);
  Vector d(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto offset = static_cast<double>(static_cast<long long>(ma[i]) - static_cast<long long>(mb[i]));
    d[static_cast<Eigen::Index>(i)] = offset * spacing_[static_cast<Eigen::Index>(i)];
  }
  return d;
}

ParamBox NodeGrid::bounding_box() const {
  Vector lo = origin_;
  Vector hi = origin_;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (counts_[i] == 1) {
      lo[ii] -= 0.5 * spacing_[ii];
      hi[ii] += 0.5 * spacing_[ii];
    } else {
      hi[ii] += static_cast<double>(counts_[i] - 1) * spacing_[ii];
    }
  }
  return {lo, hi};
}

ParamBox NodeGrid::central_cell() const {
  Vector lo(static_cast<Eigen::Index>(dim()));
  Vector hi(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::size_t n = counts_[i];
    const double o = origin_[ii];
    const double h = spacing_[ii];
    if (n == 1) {
      lo[ii] = o - 0.5 * h;
      hi[ii] = o + 0.5 * h;
    } else if (n % 2 == 0) {
      lo[ii] = o + static_cast<double>(n / 2 - 1) * h;
      hi[ii] = o + static_cast<double>(n / 2) * h;
    } else {
      const std::size_t c = (n - 1) / 2;
      lo[ii] = o + static_cast<double>(c - 1) * h;
      hi[ii] = o + static_cast<double>(c + 1) * h;
    }
  }
  return {lo, hi};
}

const char* to_string(GramStructure s) {
  switch (s) {
    case GramStructure::kToeplitz: return "toeplitz";
    case GramStructure::kBlockToeplitz: return "block_toeplitz";
    case GramStructure::kKroneckerToeplitz: return "kronecker_toeplitz";
    case GramStructure::kGeneral: break;
  }
  return "general";
}

GramSystem::GramSystem(std::vector<Vector> nodes, Matrix gram, GramStructure structure,
                       std::optional<NodeGrid> grid)
    : nodes_(std::move(nodes)), gram_(std::move(gram)), structure_(structure), grid_(std::move(grid)) {
  if (nodes_.empty()) throw DomainError("GramSystem: empty node set");
  if (gram_.rows() != gram_.cols() || static_cast<std::size_t>(gram_.rows()) != nodes_.size()) {
    throw DomainError("GramSystem: matrix size does not match the node count");
  }
  double min_eig = 0.0;
  condition_ = condition_of(gram_, min_eig);
  if (!(condition_ <= kMaxCondition)) {
    throw IllConditionedError("Gram matrix is numerically singular (condition number " +
                              std::to_string(condition_) + ", smallest eigenvalue " +
                              std::to_string(min_eig) + "); nodes are too close relative to the atom width");
  }
  llt_.compute(gram_);
  if (llt_.info() != Eigen::Success) throw IllConditionedError("Cholesky factorization of the Gram matrix failed");
}

Matrix GramSystem::inverse() const {
  return llt_.solve(Matrix::Identity(gram_.rows(), gram_.cols()));
}

GramSystem build_gram(const TIKernel& kernel, const NodeGrid& grid) {
  if (kernel.dim() != grid.dim()) throw DomainError("build_gram: kernel and grid dimensions differ");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Matrix g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    g(a, a) = kernel.eval(Vector::Zero(static_cast<Eigen::Index>(grid.dim())));
    for (Eigen::Index b = 0; b < a; ++b) {
      const double v = kernel.eval(grid.displacement(static_cast<std::size_t>(a), static_cast<std::size_t>(b)));
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  GramStructure structure = GramStructure::kToeplitz;
  if (grid.dim() > 1) structure = kernel.separable() ? GramStructure::kKroneckerToeplitz : GramStructure::kBlockToeplitz;
  return {grid.nodes(), std::move(g), structure, grid};
}

GramSystem build_gram(const TIKernel& kernel, std::vector<Vector> nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  for (const auto& t : nodes) {
    if (static_cast<std::size_t>(t.size()) != kernel.dim()) throw DomainError("build_gram: node dimension mismatch");
  }
  Matrix g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      const double v = kernel.eval(nodes[a] - nodes[b]);
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  return {std::move(nodes), std::move(g), GramStructure::kGeneral};
}

RaisedCosineKernel decompose_gram_1d(std::span<const double> first_row, double spacing,
                                     const DecompositionTolerances& tol) {
  const std::size_t len = first_row.size();
  if (len == 0) throw DomainError("decompose_gram_1d: empty first row");
  if (!(spacing > 0.0)) throw DomainError("decompose_gram_1d: spacing must be positive");
  if (std::abs(first_row[0] - 1.0) > 1e-10) {
    throw DomainError("decompose_gram_1d: first_row[0] must be 1 (unit-norm atoms)");
  }
  if (len == 1) return RaisedCosineKernel::constant(1);

  const auto L = static_cast<Eigen::Index>(len);
  const Eigen::Index K = L / 2;
  const bool odd = (L % 2) == 1;
  auto g = [&](Eigen::Index m) { return first_row[static_cast<std::size_t>(std::abs(m))]; };

  // Moments of the measure whose Gauss nodes we want; for odd L, of (1 - x) mu.
  Vector h(odd ? L - 1 : L);
  for (Eigen::Index m = 0; m < h.size(); ++m) h[m] = odd ? g(m) - 0.5 * (g(m + 1) + g(m - 1)) : g(m);
  auto hm = [&](Eigen::Index m) { return h[std::abs(m)]; };

  // <T_i, T_m> under the measure is (h_{i+m} + h_{|i-m|}) / 2.
  Matrix moments(K, K);
  Vector rhs(K);
  for (Eigen::Index m = 0; m < K; ++m) {
    for (Eigen::Index i = 0; i < K; ++i) moments(m, i) = 0.5 * (hm(i + m) + hm(i - m));
    rhs[m] = -0.5 * (hm(K + m) + hm(K - m));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(moments);
  if (qr.rank() < K) {
    throw NoValidDecomposition("moment matrix is singular; the sequence has fewer than K spectral lines");
  }
  Vector c(K + 1);
  c.head(K) = qr.solve(rhs);
  c[K] = 1.0;

  const Eigen::VectorXcd roots = chebyshev_roots(c);
  std::vector<double> xs;
  for (Eigen::Index k = 0; k < roots.size(); ++k) {
    const double re = roots[k].real();
    if (std::abs(roots[k].imag()) > tol.root_imag || std::abs(re) > 1.0 + tol.root_range) {
      throw NoValidDecomposition("annihilating-polynomial root (" + std::to_string(re) + ", " +
                                 std::to_string(roots[k].imag()) +
                                 "i) is not a real cosine in [-1, 1]; no raised-cosine form exists");
    }
    xs.push_back(std::clamp(re, -1.0, 1.0));
  }
  // Ascending frequency order.
  std::sort(xs.begin(), xs.end(), std::greater<>());

  const Eigen::Index cols = K + (odd ? 1 : 0);
  Matrix basis(L, cols);
  Vector target(L);
  for (Eigen::Index m = 0; m < L; ++m) {
    for (Eigen::Index k = 0; k < K; ++k) basis(m, k) = std::cos(static_cast<double>(m) * std::acos(xs[k]));
    if (odd) basis(m, K) = 1.0;
    target[m] = g(m);
  }
  const Vector weights = basis.colPivHouseholderQr().solve(target);

  std::vector<CosineTerm> terms;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (weights[k] < -tol.negative_weight) {
      throw NoValidDecomposition("recovered weight " + std::to_string(weights[k]) +
                                 " is negative; the kernel would not be positive semidefinite");
    }
    Vector w(1);
    w[0] = std::acos(xs[k]) / spacing;
    terms.push_back({weights[k], w});
  }
  const double lambda0 = odd ? weights[K] : 0.0;
  if (odd && lambda0 < -tol.negative_weight) {
    throw NoValidDecomposition("recovered DC weight " + std::to_string(lambda0) + " is negative");
  }

  RaisedCosineKernel rc(1, lambda0, std::move(terms), len);

  double residual = 0.0;
  Vector delta(1);
  for (Eigen::Index m = 0; m < L; ++m) {
    delta[0] = static_cast<double>(m) * spacing;
    residual = std::max(residual, std::abs(g(m) - rc.eval(delta)));
  }
  if (!(residual <= tol.residual)) {
    throw NoValidDecomposition("decomposition residual " + std::to_string(residual) + " exceeds tolerance");
  }
  const auto report = rc.validate();
  if (!report.passed()) throw NoValidDecomposition("decomposed kernel is invalid: " + report.issues.front().message);
  return rc;
}

RaisedCosineKernel decompose_gram_separable(const std::vector<RaisedCosineKernel>& per_axis) {
  if (per_axis.empty()) throw DomainError("decompose_gram_separable: no axes");
  for (std::size_t i = 0; i < per_axis.size(); ++i) {
    if (per_axis[i].dim() != 1) throw DomainError("decompose_gram_separable: per-axis kernels must be 1D");
    const auto report = per_axis[i].validate();
    if (!report.passed()) {
      throw DomainError("decompose_gram_separable: axis " + std::to_string(i) + " kernel invalid: " +
                        report.issues.front().message);
    }
  }
  const std::size_t d = per_axis.size();

  // Per-axis factors: index 0 is DC when present, then the cosine terms.
  struct Factor {
    double weight;
    double freq;  // 0 for DC
  };
  std::vector<std::vector<Factor>> factors(d);
  std::size_t rank = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (per_axis[i].lambda0() != 0.0) factors[i].push_back({per_axis[i].lambda0(), 0.0});
    for (const auto& t : per_axis[i].terms()) factors[i].push_back({t.weight, t.freq[0]});
    rank *= per_axis[i].rank();
  }

  double lambda0 = 0.0;
  std::vector<CosineTerm> terms;
  std::vector<std::size_t> pick(d, 0);
  while (true) {
    double weight = 1.0;
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < d; ++i) {
      const auto& f = factors[i][pick[i]];
      weight *= f.weight;
      if (f.freq != 0.0) active.push_back(i);
    }
    if (active.empty()) {
      lambda0 += weight;
    } else {
      // prod_i cos(a_i) = 2^{1-n} sum over sign patterns (first sign fixed) of cos(sum +-a_i).
      const std::size_t n = active.size();
      const double share = weight / static_cast<double>(std::size_t{1} << (n - 1));
      for (std::size_t signs = 0; signs < (std::size_t{1} << (n - 1)); ++signs) {
        Vector w = Vector::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t a = 0; a < n; ++a) {
          const double s = (a > 0 && ((signs >> (a - 1)) & 1U)) ? -1.0 : 1.0;
          w[static_cast<Eigen::Index>(active[a])] = s * factors[active[a]][pick[active[a]]].freq;
        }
        terms.push_back({share, std::move(w)});
      }
    }
    std::size_t axis = d;
    while (axis-- > 0) {
      if (++pick[axis] < factors[axis].size()) break;
      pick[axis] = 0;
    }
    if (axis == static_cast<std::size_t>(-1)) break;
  }

  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const Vector wa = canonical_frequency(terms[a].freq);
      const Vector wb = canonical_frequency(terms[b].freq);
      if ((wa - wb).norm() < RaisedCosineKernel::kFrequencyTolerance) {
        throw NoValidDecomposition("frequency collision after tensor-product expansion");
      }
    }
  }
  RaisedCosineKernel rc(d, lambda0, std::move(terms), rank);
  const auto report = rc.validate();
  if (!report.passed()) throw NoValidDecomposition("separable kernel is invalid: " + report.issues.front().message);
  return rc;
}

RaisedCosineKernel decompose_gram(const TIKernel& kernel, const NodeGrid& grid, const DecompositionTolerances& tol) {
  if (kernel.dim() != grid.dim()) throw DomainError("decompose_gram: kernel and grid dimensions differ");
  auto axis_row = [&](std::size_t axis) {
    const std::size_t n = grid.counts()[axis];
    const double h = grid.spacing()[static_cast<Eigen::Index>(axis)];
    std::vector<double> row(n);
    for (std::size_t m = 0; m < n; ++m) {
      if (grid.dim() == 1) {
        Vector delta(1);
        delta[0] = static_cast<double>(m) * h;
        row[m] = kernel.eval(delta);
      } else {
        row[m] = kernel.eval_axis(axis, static_cast<double>(m) * h);
      }
    }
    return row;
  };

  if (grid.dim() == 1) return decompose_gram_1d(axis_row(0), grid.spacing()[0], tol);
  if (!kernel.separable()) {
    throw NoValidDecomposition("multi-dimensional decomposition requires a separable kernel");
  }
  std::vector<RaisedCosineKernel> per_axis;
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    per_axis.push_back(decompose_gram_1d(axis_row(i), grid.spacing()[static_cast<Eigen::Index>(i)], tol));
  }
  return decompose_gram_separable(per_axis);
}

ResidualReport verify_decomposition(const GramSystem& gram, const RaisedCosineKernel& rc) {
  if (rc.dim() != gram.dim()) throw DomainError("verify_decomposition: dimensions differ");
  const auto n = static_cast<Eigen::Index>(gram.size());
  const auto& grid = gram.grid();
  Matrix model(n, n);
  double residual = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const Vector delta = grid ? grid->displacement(static_cast<std::size_t>(a), static_cast<std::size_t>(b))
                                : Vector(gram.nodes()[a] - gram.nodes()[b]);
      model(a, b) = rc.eval(delta);
      residual = std::max(residual, std::abs(gram.matrix()(a, b) - model(a, b)));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(model, Eigen::EigenvaluesOnly);
  return {residual, eig.eigenvalues().minCoeff()};
}

}  // namespace tidict
