#include "tidict/taylor.hpp"

#include <cmath>
#include <string>

#include "tidict/errors.hpp"

namespace tidict {

namespace {

void append_indices(std::size_t dim, int remaining, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  if (prefix.size() + 1 == dim) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    prefix.push_back(k);
    append_indices(dim, remaining - k, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices(std::size_t dim, int order) {
  if (dim == 0) throw DomainError("multi_indices: dim must be positive");
  if (order < 0) throw DomainError("multi_indices: order must be >= 0");
  std::vector<MultiIndex> out;
  MultiIndex prefix;
  for (int degree = 0; degree <= order; ++degree) append_indices(dim, degree, prefix, out);
  return out;
}

TaylorApproximation::TaylorApproximation(const DiscreteEmbedding& embed, Vector center, int order)
    : center_(std::move(center)), order_(order), indices_(multi_indices(embed.dim(), order)) {
  if (static_cast<std::size_t>(center_.size()) != embed.dim()) throw DomainError("build_taylor: centre has wrong dimension");
  if (!embed.box().contains(center_, 1e-12)) throw DomainError("build_taylor: centre outside the parameter box");

  double mass = 1.0;
  for (std::size_t i = 0; i < embed.dim(); ++i) mass *= embed.axis_profile(i, center_[static_cast<Eigen::Index>(i)]).norm();
  if (1.0 - mass > DiscreteEmbedding::kTruncationTolerance) {
    throw TruncationError("build_taylor: norm deficit " + std::to_string(1.0 - mass) + " exceeds tolerance");
  }

  // Cache per-axis derivative profiles up to the order.
  std::vector<std::vector<Vector>> profiles(embed.dim());
  for (std::size_t i = 0; i < embed.dim(); ++i) {
    for (int n = 0; n <= order; ++n) profiles[i].push_back(embed.axis_profile(i, center_[static_cast<Eigen::Index>(i)], n));
  }
  for (const auto& alpha : indices_) {
    std::vector<Vector> factors;
    for (std::size_t i = 0; i < alpha.size(); ++i) factors.push_back(profiles[i][static_cast<std::size_t>(alpha[i])]);
    basis_.push_back(tensor_product(factors));
  }
}

Vector TaylorApproximation::monomials(const Vector& theta) const {
  if (theta.size() != center_.size()) throw DomainError("taylor_atom: parameter has wrong dimension");
  Vector out(static_cast<Eigen::Index>(indices_.size()));
  for (std::size_t a = 0; a < indices_.size(); ++a) {
    double value = 1.0;
    for (std::size_t i = 0; i < indices_[a].size(); ++i) {
      const int k = indices_[a][i];
      value *= std::pow(theta[static_cast<Eigen::Index>(i)] - center_[static_cast<Eigen::Index>(i)], k) / std::tgamma(k + 1.0);
    }
    out[static_cast<Eigen::Index>(a)] = value;
  }
  return out;
}

Vector TaylorApproximation::atom(const Vector& theta) const {
  const Vector mono = monomials(theta);
  Vector out = Vector::Zero(basis_.front().size());
  for (std::size_t a = 0; a < basis_.size(); ++a) out += mono[static_cast<Eigen::Index>(a)] * basis_[a];
  return out;
}

TaylorApproximation build_taylor(const DiscreteEmbedding& embed, const Vector& center, int order) {
  return {embed, center, order};
}

Vector taylor_atom(const TaylorApproximation& ta, const Vector& theta) { return ta.atom(theta); }

double taylor_error(const TaylorApproximation& ta, const DiscreteEmbedding& embed, const Vector& theta) {
  return (embed.discretize_atom(theta) - ta.atom(theta)).norm();
}

}  // namespace tidict
