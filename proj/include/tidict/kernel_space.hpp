#ifndef TIDICT_KERNEL_SPACE_HPP
#define TIDICT_KERNEL_SPACE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tidict {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned parameter domain [lower, upper] in R^d.
class ParamBox {
 public:
  ParamBox(Vector lower, Vector upper);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  Vector centroid() const { return 0.5 * (lower_ + upper_); }

  /// Componentwise lower - tol <= theta <= upper + tol.
  bool contains(const Vector& theta, double tol = 0.0) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Translation-invariant inner product kappa(delta) = <a(theta), a(theta + delta)>
/// of a unit-norm atom family.
class TIKernel {
 public:
  virtual ~TIKernel() = default;

  virtual std::size_t dim() const noexcept = 0;
  virtual std::string name() const = 0;

  /// Throws DomainError when delta has the wrong length.
  double eval(const Vector& delta) const;

  /// True when kappa(delta) = prod_i kappa_i(delta_i).
  virtual bool separable() const noexcept { return false; }
  /// One-dimensional factor kappa_i; only defined for separable kernels.
  virtual double eval_axis(std::size_t axis, double delta) const;

 protected:
  virtual double eval_unchecked(const Vector& delta) const = 0;
};

/// Isotropic Gaussian atoms a(theta)(t) ~ exp(-|t - theta|^2 / (2 sigma^2)),
/// whose kernel is exp(-|delta|^2 / (4 sigma^2)).
class GaussianKernel final : public TIKernel {
 public:
  GaussianKernel(double sigma, std::size_t dim);

  double sigma() const noexcept { return sigma_; }
  std::size_t dim() const noexcept override { return dim_; }
  std::string name() const override { return "gaussian"; }
  bool separable() const noexcept override { return true; }
  double eval_axis(std::size_t axis, double delta) const override;

 protected:
  double eval_unchecked(const Vector& delta) const override;

 private:
  double sigma_;
  std::size_t dim_;
};

double kernel_eval(const TIKernel& kernel, const Vector& delta);

/// Finite realization of the Gaussian atom family: uniform cell-centred
/// samples on the parameter box widened by `margin_sigmas * sigma` per side.
///
/// Samples are stored row-major (axis 0 slowest). Each axis profile is scaled
/// by the continuous normalization and sqrt(step), so that Euclidean inner
/// products approximate L2 inner products; emitted atoms are renormalized.
class DiscreteEmbedding {
 public:
  static constexpr double kTruncationTolerance = 1e-3;

  DiscreteEmbedding(const GaussianKernel& kernel, ParamBox box,
                    std::size_t samples_per_axis, double margin_sigmas = 6.0);

  std::size_t dim() const noexcept { return box_.dim(); }
  std::size_t samples_per_axis() const noexcept { return samples_; }
  /// Total number of samples, samples_per_axis^dim.
  std::size_t size() const noexcept;
  double sigma() const noexcept { return sigma_; }
  const ParamBox& box() const noexcept { return box_; }
  double step(std::size_t axis) const { return steps_.at(axis); }
  const Vector& sample_points(std::size_t axis) const { return points_.at(axis); }

  /// sigma^-n He_n(u) exp(-u^2/2) with u = (t - center) / sigma, i.e. the n-th
  /// derivative of the 1D profile with respect to its centre, sampled without
  /// renormalization.
  Vector axis_profile(std::size_t axis, double center, int derivative_order = 0) const;

  /// Per-axis unit-norm factors of the sampled atom. Throws DomainError when
  /// theta is outside the box and TruncationError when the pre-normalization
  /// norm deficit exceeds kTruncationTolerance.
  std::vector<Vector> atom_factors(const Vector& theta) const;

  /// Unit-norm 1D factors along one axis, one row per centre.
  Matrix axis_atoms(std::size_t axis, const Vector& centers) const;

  /// Unit-norm sampled atom (the tensor product of atom_factors).
  Vector discretize_atom(const Vector& theta) const;

  /// <a_N(theta), signal> for every theta of a tensor grid, where
  /// axis_atoms[i] holds one axis factor per row. Result is row-major over
  /// the grid.
  Vector separable_inner_products(const std::vector<Matrix>& axis_atoms,
                                  const Vector& signal) const;

 private:
  double sigma_;
  ParamBox box_;
  std::size_t samples_;
  std::vector<Vector> points_;
  std::vector<double> steps_;
};

/// Row-major (first factor slowest) flattening of an outer product.
Vector tensor_product(const std::vector<Vector>& factors);

}  // namespace tidict

#endif  // TIDICT_KERNEL_SPACE_HPP
