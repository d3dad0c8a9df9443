#ifndef TIDICT_RAISED_COSINE_HPP
#define TIDICT_RAISED_COSINE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidict/kernel_space.hpp"

namespace tidict {

struct CosineTerm {
  double weight;
  Vector freq;  // radians per parameter unit
};

struct ValidationIssue {
  std::string check;  // "rank", "parity", "psd", "frequencies", "dimension"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool passed() const noexcept { return issues.empty(); }
  bool failed(const std::string& check) const;
};

/// kappa(delta) = lambda0 + sum_k lambda_k cos(w_k . delta), the inner-product
/// kernel of a rank-L interpolating approximation.
///
/// Frequencies are stored with their first nonzero component positive. Terms
/// with |lambda_k| below kPruneThreshold are dropped on construction. Nothing
/// else is enforced here: negative weights or a wrong term count are legal
/// values and are reported by validate().
class RaisedCosineKernel {
 public:
  static constexpr double kPruneThreshold = 1e-12;
  static constexpr double kFrequencyTolerance = 1e-8;
  static constexpr double kValidationTolerance = 1e-10;

  RaisedCosineKernel(std::size_t dim, double lambda0, std::vector<CosineTerm> terms, std::size_t rank);

  /// Pure DC kernel lambda0 = 1, the decomposition of a single-node grid.
  static RaisedCosineKernel constant(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  double lambda0() const noexcept { return lambda0_; }
  const std::vector<CosineTerm>& terms() const noexcept { return terms_; }
  std::size_t num_terms() const noexcept { return terms_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t pruned_terms() const noexcept { return pruned_; }

  double eval(const Vector& delta) const;
  /// Value, gradient and Hessian with respect to delta.
  double eval(const Vector& delta, Vector& gradient, Matrix& hessian) const;

  /// Length of feature_map(): 2K, plus one when lambda0 > 0.
  std::size_t feature_dim() const noexcept;
  /// [sqrt(lambda0)] ++ {sqrt(lambda_k) cos(w_k.theta), sqrt(lambda_k) sin(w_k.theta)}.
  /// Inner products reproduce eval(theta - theta') for nonnegative weights.
  Vector feature_map(const Vector& theta) const;

  ValidationReport validate() const;

  nlohmann::ordered_json to_json() const;
  static RaisedCosineKernel from_json(const nlohmann::json& j);

 private:
  void check_dim(const Vector& v, const char* what) const;

  std::size_t dim_;
  double lambda0_;
  std::vector<CosineTerm> terms_;
  std::size_t rank_;
  std::size_t pruned_ = 0;
};

double rc_eval(const RaisedCosineKernel& rc, const Vector& delta);
Vector feature_map(const RaisedCosineKernel& rc, const Vector& theta);
ValidationReport rc_validate(const RaisedCosineKernel& rc);

/// Flips the sign of w so that its first nonzero component is positive.
Vector canonical_frequency(Vector w);

}  // namespace tidict

#endif  // TIDICT_RAISED_COSINE_HPP
