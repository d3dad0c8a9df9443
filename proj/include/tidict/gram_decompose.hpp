#ifndef TIDICT_GRAM_DECOMPOSE_HPP
#define TIDICT_GRAM_DECOMPOSE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "tidict/kernel_space.hpp"
#include "tidict/raised_cosine.hpp"

namespace tidict {

/// Regular grid of interpolation nodes origin + m * spacing (componentwise),
/// flattened row-major with axis 0 slowest.
class NodeGrid {
 public:
  NodeGrid(Vector origin, Vector spacing, std::vector<std::size_t> counts);

  std::size_t dim() const noexcept { return counts_.size(); }
  const Vector& origin() const noexcept { return origin_; }
  const Vector& spacing() const noexcept { return spacing_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  /// Number of nodes L = prod counts.
  std::size_t size() const noexcept { return size_; }

  std::vector<std::size_t> multi_index(std::size_t j) const;
  Vector node(std::size_t j) const;
  std::vector<Vector> nodes() const;
  /// theta_a - theta_b computed from integer offsets, so that equal index
  /// offsets give bit-identical displacements.
  Vector displacement(std::size_t a, std::size_t b) const;

  /// Smallest box holding all nodes; single-node axes are widened by half a
  /// spacing on each side.
  ParamBox bounding_box() const;
  /// Smallest node-aligned box with the grid centroid in its interior: one
  /// cell along even-count axes, two cells along odd-count axes.
  ParamBox central_cell() const;

 private:
  Vector origin_;
  Vector spacing_;
  std::vector<std::size_t> counts_;
  std::size_t size_;
};

enum class GramStructure { kGeneral, kToeplitz, kBlockToeplitz, kKroneckerToeplitz };

const char* to_string(GramStructure s);

/// Gram matrix G(j', j) = kappa(theta_j' - theta_j) of the interpolated atoms,
/// with its Cholesky factorization.
class GramSystem {
 public:
  static constexpr double kMaxCondition = 1e12;

  GramSystem(std::vector<Vector> nodes, Matrix gram, GramStructure structure,
             std::optional<NodeGrid> grid = std::nullopt);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(nodes_.front().size()); }
  const std::vector<Vector>& nodes() const noexcept { return nodes_; }
  const Matrix& matrix() const noexcept { return gram_; }
  GramStructure structure() const noexcept { return structure_; }
  double condition_number() const noexcept { return condition_; }
  const std::optional<NodeGrid>& grid() const noexcept { return grid_; }

  /// G^-1 rhs through the stored factorization.
  Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }
  Matrix inverse() const;

 private:
  std::vector<Vector> nodes_;
  Matrix gram_;
  GramStructure structure_;
  std::optional<NodeGrid> grid_;
  Eigen::LLT<Matrix> llt_;
  double condition_ = 0.0;
};

/// Throws IllConditionedError when G is not numerically positive definite
/// (condition number above GramSystem::kMaxCondition).
GramSystem build_gram(const TIKernel& kernel, const NodeGrid& nodes);
GramSystem build_gram(const TIKernel& kernel, std::vector<Vector> nodes);

struct DecompositionTolerances {
  double root_imag = 1e-9;
  double root_range = 1e-9;
  double negative_weight = 1e-10;
  double residual = 1e-8;
};

/// Raised-cosine decomposition of the symmetric Toeplitz sequence
/// g_m = kappa(m * spacing), m = 0..L-1, with L = first_row.size().
///
/// Chebyshev-Prony: in x = cos(w * spacing) the samples are Chebyshev moments
/// g_m = sum_k mu_k T_m(x_k) of a discrete measure. For even L the K = L/2
/// nodes are the zeros of the degree-K orthogonal polynomial of that measure
/// (Gauss rule). For odd L the node x = 1 is forced, which carries lambda0, and
/// the remaining K nodes come from the measure (1 - x) mu (Gauss-Radau rule).
/// Roots are eigenvalues of the colleague matrix; weights are fitted by least
/// squares against g.
///
/// Throws NoValidDecomposition when roots leave [-1, 1], weights are negative,
/// the residual exceeds tol.residual, or the result fails validation.
RaisedCosineKernel decompose_gram_1d(std::span<const double> first_row, double spacing,
                                     const DecompositionTolerances& tol = {});

/// Product of 1D raised-cosine kernels (one per axis, ranks L_i) rewritten as
/// a single DC-plus-cosines kernel of rank prod L_i with vector frequencies.
RaisedCosineKernel decompose_gram_separable(const std::vector<RaisedCosineKernel>& per_axis);

/// 1D grids go through decompose_gram_1d; multi-dimensional grids require a
/// separable kernel and are decomposed axis by axis.
RaisedCosineKernel decompose_gram(const TIKernel& kernel, const NodeGrid& grid,
                                  const DecompositionTolerances& tol = {});

struct ResidualReport {
  double residual;    // max |G(j', j) - rc(theta_j' - theta_j)|
  double psd_margin;  // smallest eigenvalue of [rc(theta_i - theta_j)]
};

ResidualReport verify_decomposition(const GramSystem& gram, const RaisedCosineKernel& rc);

}  // namespace tidict

#endif  // TIDICT_GRAM_DECOMPOSE_HPP
