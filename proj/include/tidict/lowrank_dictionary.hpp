#ifndef TIDICT_LOWRANK_DICTIONARY_HPP
#define TIDICT_LOWRANK_DICTIONARY_HPP

#include <cstddef>
#include <memory>
#include <optional>

#include "tidict/gram_decompose.hpp"
#include "tidict/kernel_space.hpp"
#include "tidict/raised_cosine.hpp"

namespace tidict {

struct SelectAtomSettings {
  std::size_t coarse_points = 32;  // per axis, endpoints included
  std::size_t max_iterations = 50;
  double gradient_tolerance = 1e-10;
};

struct AtomSelection {
  Vector theta;
  double objective;
};

/// Interpolating, translation-invariant rank-L approximation
///   h(theta) = sum_l v_l c_l(theta),
///   c_l(theta) = rc(theta - theta_l),  v_l = sum_j a(theta_j) G^-1(l, j).
///
/// Atoms are never materialized: v_l has Gram matrix G^-1, so every inner
/// product reduces to kernel evaluations and solves with G.
class LowRankDictionary {
 public:
  static constexpr double kResidualTolerance = 1e-8;

  /// Throws NoValidDecomposition unless rc reproduces G within kResidualTolerance.
  LowRankDictionary(std::shared_ptr<const TIKernel> kernel, GramSystem gram, RaisedCosineKernel rc, ParamBox box);

  /// Gram construction plus decomposition on a regular grid. The parameter
  /// box defaults to grid.bounding_box().
  static LowRankDictionary build(std::shared_ptr<const TIKernel> kernel, const NodeGrid& grid,
                                 std::optional<ParamBox> box = std::nullopt,
                                 const DecompositionTolerances& tol = {});

  /// Skips the residual check. Diagnostic use only (validating a
  /// user-supplied raised-cosine kernel); the approximation guarantees do not
  /// hold for such an object.
  static LowRankDictionary unverified(std::shared_ptr<const TIKernel> kernel, GramSystem gram,
                                      RaisedCosineKernel rc, ParamBox box);

  std::size_t rank() const noexcept { return gram_.size(); }
  std::size_t dim() const noexcept { return gram_.dim(); }
  const GramSystem& gram() const noexcept { return gram_; }
  const RaisedCosineKernel& rc() const noexcept { return rc_; }
  const TIKernel& kernel() const noexcept { return *kernel_; }
  const ParamBox& box() const noexcept { return box_; }
  const ResidualReport& residual() const noexcept { return residual_; }

  /// c_l(theta) = rc(theta - theta_l).
  Vector coefficients(const Vector& theta) const;
  /// k_j(theta) = kappa(theta - theta_j), inner products with the true atoms.
  Vector kernel_vector(const Vector& theta) const;
  /// Row l holds the coordinates of v_l in the basis {a(theta_j)}, i.e. G^-1.
  Matrix dual_atom_coords() const;

  /// <h(theta), h(theta')> = c(theta)^T G^-1 c(theta').
  double approx_inner(const Vector& theta, const Vector& theta_prime) const;
  /// <a(theta), h(theta')> = k(theta)^T G^-1 c(theta').
  double cross_inner(const Vector& theta, const Vector& theta_prime) const;
  /// |a(theta) - h(theta)|, radicand clamped at zero.
  double approx_error(const Vector& theta) const;

  /// f(theta) = sum_l projections[l] c_l(theta), the surrogate of <a(theta), r>
  /// when projections[l] = <v_l, r>.
  double surrogate(const Vector& projections, const Vector& theta) const;
  double surrogate(const Vector& projections, const Vector& theta, Vector& gradient, Matrix& hessian) const;

  /// Maximizes the surrogate over `search`: coarse grid, then projected damped
  /// Newton ascent from every coarse local maximum. Ties go to the
  /// lexicographically smallest theta.
  AtomSelection select_atom(const Vector& projections, const ParamBox& search,
                            const SelectAtomSettings& settings = {}) const;

 private:
  struct Unchecked {};
  LowRankDictionary(Unchecked, std::shared_ptr<const TIKernel> kernel, GramSystem gram, RaisedCosineKernel rc,
                    ParamBox box);
  void check_theta(const Vector& theta) const;

  std::shared_ptr<const TIKernel> kernel_;
  GramSystem gram_;
  RaisedCosineKernel rc_;
  ParamBox box_;
  ResidualReport residual_;
};

}  // namespace tidict

#endif  // TIDICT_LOWRANK_DICTIONARY_HPP
