#include "tidict/kernel_space.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tidict/errors.hpp"

namespace tidict {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Probabilists' Hermite polynomial He_n(u).
double hermite_e(int n, double u) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double curr = u;
  for (int k = 1; k < n; ++k) {
    const double next = u * curr - k * prev;
    prev = curr;
    curr = next;
  }
  return curr;
}

Vector contract(const std::vector<Matrix>& axis_atoms, std::size_t axis,
                const double* signal, std::size_t length) {
  const Matrix& atoms = axis_atoms[axis];
  const auto n = static_cast<std::size_t>(atoms.cols());
  if (axis + 1 == axis_atoms.size()) {
    return atoms * Eigen::Map<const Vector>(signal, static_cast<Eigen::Index>(n));
  }
  const std::size_t rest = length / n;
  Eigen::Map<const RowMajorMatrix> view(signal, static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(rest));
  const RowMajorMatrix partial = atoms * view;

  Vector out;
  for (Eigen::Index m = 0; m < partial.rows(); ++m) {
    const Vector sub = contract(axis_atoms, axis + 1, partial.row(m).data(), rest);
    if (m == 0) out.resize(partial.rows() * sub.size());
    out.segment(m * sub.size(), sub.size()) = sub;
  }
  return out;
}

}  // namespace

ParamBox::ParamBox(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw DomainError("ParamBox: lower and upper must be non-empty and of equal length");
  }
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw DomainError("ParamBox: lower[" + std::to_string(i) + "] must be < upper[" +
                        std::to_string(i) + "]");
    }
  }
}

bool ParamBox::contains(const Vector& theta, double tol) const {
  if (theta.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta[i] < lower_[i] - tol || theta[i] > upper_[i] + tol) return false;
  }
  return true;
}

double TIKernel::eval(const Vector& delta) const {
  if (static_cast<std::size_t>(delta.size()) != dim()) {
    throw DomainError("kernel_eval: displacement has length " + std::to_string(delta.size()) +
                      ", kernel dimension is " + std::to_string(dim()));
  }
  return eval_unchecked(delta);
}

double TIKernel::eval_axis(std::size_t, double) const {
  throw DomainError("kernel '" + name() + "' is not separable");
}

GaussianKernel::GaussianKernel(double sigma, std::size_t dim) : sigma_(sigma), dim_(dim) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("GaussianKernel: sigma must be > 0");
  if (dim == 0) throw DomainError("GaussianKernel: dim must be positive");
}

double GaussianKernel::eval_axis(std::size_t axis, double delta) const {
  if (axis >= dim_) throw DomainError("GaussianKernel: axis out of range");
  return std::exp(-delta * delta / (4.0 * sigma_ * sigma_));
}

double GaussianKernel::eval_unchecked(const Vector& delta) const {
  return std::exp(-delta.squaredNorm() / (4.0 * sigma_ * sigma_));
}

double kernel_eval(const TIKernel& kernel, const Vector& delta) { return kernel.eval(delta); }

DiscreteEmbedding::DiscreteEmbedding(const GaussianKernel& kernel, ParamBox box,
                                     std::size_t samples_per_axis, double margin_sigmas)
    : sigma_(kernel.sigma()), box_(std::move(box)), samples_(samples_per_axis) {
  if (box_.dim() != kernel.dim()) throw DomainError("DiscreteEmbedding: kernel/box dimension mismatch");
  if (samples_ < 2) throw DomainError("DiscreteEmbedding: need at least 2 samples per axis");
  if (!(margin_sigmas >= 0.0)) throw DomainError("DiscreteEmbedding: margin must be >= 0");

  for (std::size_t i = 0; i < box_.dim(); ++i) {
    const double lo = box_.lower()[static_cast<Eigen::Index>(i)] - margin_sigmas * sigma_;
    const double hi = box_.upper()[static_cast<Eigen::Index>(i)] + margin_sigmas * sigma_;
    const double h = (hi - lo) / static_cast<double>(samples_);
    Vector pts(static_cast<Eigen::Index>(samples_));
    for (std::size_t k = 0; k < samples_; ++k) pts[static_cast<Eigen::Index>(k)] = lo + (k + 0.5) * h;
    points_.push_back(std::move(pts));
    steps_.push_back(h);
  }
}

std::size_t DiscreteEmbedding::size() const noexcept {
  std::size_t n = 1;
  for (std::size_t i = 0; i < dim(); ++i) n *= samples_;
  return n;
}

Vector DiscreteEmbedding::axis_profile(std::size_t axis, double center, int derivative_order) const {
  if (axis >= dim()) throw DomainError("DiscreteEmbedding: axis out of range");
  if (derivative_order < 0) throw DomainError("DiscreteEmbedding: negative derivative order");
  const Vector& pts = points_[axis];
  const double scale = std::pow(std::numbers::pi * sigma_ * sigma_, -0.25) * std::sqrt(steps_[axis]) *
                       std::pow(sigma_, -derivative_order);
  Vector out(pts.size());
  for (Eigen::Index k = 0; k < pts.size(); ++k) {
    const double u = (pts[k] - center) / sigma_;
    out[k] = scale * hermite_e(derivative_order, u) * std::exp(-0.5 * u * u);
  }
  return out;
}

std::vector<Vector> DiscreteEmbedding::atom_factors(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) {
    throw DomainError("discretize_atom: theta has wrong dimension");
  }
  if (!box_.contains(theta, 1e-12)) throw DomainError("discretize_atom: theta outside the parameter box");

  std::vector<Vector> factors;
  double mass = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    Vector f = axis_profile(i, theta[static_cast<Eigen::Index>(i)]);
    const double norm = f.norm();
    mass *= norm;
    factors.push_back(f / norm);
  }
  if (1.0 - mass > kTruncationTolerance) {
    throw TruncationError("discretize_atom: norm deficit " + std::to_string(1.0 - mass) +
                          " exceeds tolerance; widen the sample grid");
  }
  return factors;
}

Matrix DiscreteEmbedding::axis_atoms(std::size_t axis, const Vector& centers) const {
  Matrix out(centers.size(), static_cast<Eigen::Index>(samples_));
  for (Eigen::Index r = 0; r < centers.size(); ++r) {
    const Vector f = axis_profile(axis, centers[r]);
    out.row(r) = f.transpose() / f.norm();
  }
  return out;
}

Vector DiscreteEmbedding::discretize_atom(const Vector& theta) const {
  return tensor_product(atom_factors(theta));
}

Vector DiscreteEmbedding::separable_inner_products(const std::vector<Matrix>& axis_atoms,
                                                   const Vector& signal) const {
  if (axis_atoms.size() != dim()) throw DomainError("separable_inner_products: wrong number of axes");
  for (const auto& a : axis_atoms) {
    if (static_cast<std::size_t>(a.cols()) != samples_) {
      throw DomainError("separable_inner_products: axis atoms have wrong length");
    }
  }
  if (static_cast<std::size_t>(signal.size()) != size()) {
    throw DomainError("separable_inner_products: signal has wrong length");
  }
  return contract(axis_atoms, 0, signal.data(), size());
}

Vector tensor_product(const std::vector<Vector>& factors) {
  Vector out = Vector::Ones(1);
  for (const auto& f : factors) {
    Vector next(out.size() * f.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * f.size(), f.size()) = out[i] * f;
    out = std::move(next);
  }
  return out;
}

}  // namespace tidict
