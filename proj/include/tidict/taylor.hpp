#ifndef TIDICT_TAYLOR_HPP
#define TIDICT_TAYLOR_HPP

#include <cstddef>
#include <vector>

#include "tidict/kernel_space.hpp"

namespace tidict {

using MultiIndex = std::vector<int>;

/// All multi-indices of length `dim` with total degree <= order, graded by
/// degree. There are C(order + dim, dim) of them.
std::vector<MultiIndex> multi_indices(std::size_t dim, int order);

/// Truncated Taylor expansion of the sampled Gaussian atom around a centre,
///   h_T(theta) = sum_{|alpha| <= p} d^alpha a(theta0) (theta - theta0)^alpha / alpha!,
/// with the derivative atoms sampled from their closed (Hermite) forms and
/// left unnormalized.
class TaylorApproximation {
 public:
  TaylorApproximation(const DiscreteEmbedding& embed, Vector center, int order);

  const Vector& center() const noexcept { return center_; }
  int order() const noexcept { return order_; }
  /// Number of basis vectors, the rank of the approximation.
  std::size_t rank() const noexcept { return basis_.size(); }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  const std::vector<Vector>& basis() const noexcept { return basis_; }

  /// (theta - theta0)^alpha / alpha! in the order of indices().
  Vector monomials(const Vector& theta) const;
  Vector atom(const Vector& theta) const;

 private:
  Vector center_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<Vector> basis_;
};

TaylorApproximation build_taylor(const DiscreteEmbedding& embed, const Vector& center, int order);
Vector taylor_atom(const TaylorApproximation& ta, const Vector& theta);
/// |a_N(theta) - h_T(theta)| against the unit-norm sampled atom.
double taylor_error(const TaylorApproximation& ta, const DiscreteEmbedding& embed, const Vector& theta);

}  // namespace tidict

#endif  // TIDICT_TAYLOR_HPP
