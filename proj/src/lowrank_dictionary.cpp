#include "tidict/lowrank_dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "tidict/errors.hpp"

namespace tidict {

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

Vector clamp_to(const ParamBox& box, Vector theta) {
  return theta.cwiseMax(box.lower()).cwiseMin(box.upper());
}

}  // namespace

LowRankDictionary::LowRankDictionary(Unchecked, std::shared_ptr<const TIKernel> kernel, GramSystem gram,
                                     RaisedCosineKernel rc, ParamBox box)
    : kernel_(std::move(kernel)), gram_(std::move(gram)), rc_(std::move(rc)), box_(std::move(box)),
      residual_{0.0, 0.0} {
  if (!kernel_) throw DomainError("LowRankDictionary: null kernel");
  if (kernel_->dim() != gram_.dim() || rc_.dim() != gram_.dim() || box_.dim() != gram_.dim()) {
    throw DomainError("LowRankDictionary: kernel, Gram system, raised-cosine kernel and box dimensions differ");
  }
  residual_ = verify_decomposition(gram_, rc_);
}

LowRankDictionary::LowRankDictionary(std::shared_ptr<const TIKernel> kernel, GramSystem gram, RaisedCosineKernel rc,
                                     ParamBox box)
    : LowRankDictionary(Unchecked{}, std::move(kernel), std::move(gram), std::move(rc), std::move(box)) {
  if (!(residual_.residual <= kResidualTolerance)) {
    throw NoValidDecomposition("raised-cosine kernel does not reproduce the Gram matrix (residual " +
                               std::to_string(residual_.residual) + ")");
  }
}

LowRankDictionary LowRankDictionary::build(std::shared_ptr<const TIKernel> kernel, const NodeGrid& grid,
                                           std::optional<ParamBox> box, const DecompositionTolerances& tol) {
  if (!kernel) throw DomainError("LowRankDictionary: null kernel");
  GramSystem gram = build_gram(*kernel, grid);
  RaisedCosineKernel rc = decompose_gram(*kernel, grid, tol);
  ParamBox domain = box ? *box : grid.bounding_box();
  for (const auto& t : gram.nodes()) {
    if (!domain.contains(t, 1e-12)) throw DomainError("LowRankDictionary: grid node outside the parameter box");
  }
  return {std::move(kernel), std::move(gram), std::move(rc), std::move(domain)};
}

LowRankDictionary LowRankDictionary::unverified(std::shared_ptr<const TIKernel> kernel, GramSystem gram,
                                                RaisedCosineKernel rc, ParamBox box) {
  return {Unchecked{}, std::move(kernel), std::move(gram), std::move(rc), std::move(box)};
}

void LowRankDictionary::check_theta(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) {
    throw DomainError("LowRankDictionary: parameter has length " + std::to_string(theta.size()) + ", expected " +
                      std::to_string(dim()));
  }
}

Vector LowRankDictionary::coefficients(const Vector& theta) const {
  check_theta(theta);
  const auto& nodes = gram_.nodes();
  Vector c(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t l = 0; l < nodes.size(); ++l) c[static_cast<Eigen::Index>(l)] = rc_.eval(theta - nodes[l]);
  return c;
}

Vector LowRankDictionary::kernel_vector(const Vector& theta) const {
  check_theta(theta);
  const auto& nodes = gram_.nodes();
  Vector k(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) k[static_cast<Eigen::Index>(j)] = kernel_->eval(theta - nodes[j]);
  return k;
}

Matrix LowRankDictionary::dual_atom_coords() const { return gram_.inverse(); }

double LowRankDictionary::approx_inner(const Vector& theta, const Vector& theta_prime) const {
  return coefficients(theta).dot(gram_.solve(coefficients(theta_prime)));
}

double LowRankDictionary::cross_inner(const Vector& theta, const Vector& theta_prime) const {
  return kernel_vector(theta).dot(gram_.solve(coefficients(theta_prime)));
}

double LowRankDictionary::approx_error(const Vector& theta) const {
  const Vector c = coefficients(theta);
  const Vector k = kernel_vector(theta);
  const Vector dual = gram_.solve(c);
  const double radicand = kernel_->eval(Vector::Zero(theta.size())) - 2.0 * k.dot(dual) + c.dot(dual);
  return std::sqrt(std::max(0.0, radicand));
}

double LowRankDictionary::surrogate(const Vector& projections, const Vector& theta) const {
  return projections.dot(coefficients(theta));
}

double LowRankDictionary::surrogate(const Vector& projections, const Vector& theta, Vector& gradient,
                                    Matrix& hessian) const {
  check_theta(theta);
  const auto d = static_cast<Eigen::Index>(dim());
  gradient = Vector::Zero(d);
  hessian = Matrix::Zero(d, d);
  Vector g;
  Matrix h;
  double value = 0.0;
  const auto& nodes = gram_.nodes();
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    const double p = projections[static_cast<Eigen::Index>(l)];
    value += p * rc_.eval(theta - nodes[l], g, h);
    gradient += p * g;
    hessian += p * h;
  }
  return value;
}

AtomSelection LowRankDictionary::select_atom(const Vector& projections, const ParamBox& search,
                                             const SelectAtomSettings& settings) const {
  if (static_cast<std::size_t>(projections.size()) != rank()) {
    throw DomainError("select_atom: expected " + std::to_string(rank()) + " projections");
  }
  if (search.dim() != dim()) throw DomainError("select_atom: search box has the wrong dimension");
  if (!box_.contains(search.lower(), 1e-12) || !box_.contains(search.upper(), 1e-12)) {
    throw DomainError("select_atom: search box is not inside the parameter box");
  }
  if (settings.coarse_points < 2) throw DomainError("select_atom: need at least 2 coarse points per axis");

  const std::size_t d = dim();
  const std::size_t n = settings.coarse_points;
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= n;

  auto coarse_index = [&](std::size_t flat) {
    std::vector<std::size_t> m(d);
    for (std::size_t i = d; i-- > 0;) {
      m[i] = flat % n;
      flat /= n;
    }
    return m;
  };
  auto coarse_point = [&](const std::vector<std::size_t>& m) {
    Vector theta(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double lo = search.lower()[ii];
      const double hi = search.upper()[ii];
      theta[ii] = (m[i] + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(m[i]) / static_cast<double>(n - 1);
    }
    return theta;
  };

  std::vector<double> values(total);
  for (std::size_t f = 0; f < total; ++f) values[f] = surrogate(projections, coarse_point(coarse_index(f)));

  // Starts: coarse points no smaller than any of their 3^d - 1 neighbours.
  std::vector<std::size_t> starts;
  for (std::size_t f = 0; f < total; ++f) {
    const auto m = coarse_index(f);
    bool is_max = true;
    std::size_t neighbours = 1;
    for (std::size_t i = 0; i < d; ++i) neighbours *= 3;
    for (std::size_t code = 0; code < neighbours && is_max; ++code) {
      std::size_t c = code;
      std::size_t flat = 0;
      bool inside = true;
      bool self = true;
      for (std::size_t i = 0; i < d; ++i) {
        const long long off = static_cast<long long>(c % 3) - 1;
        c /= 3;
        if (off != 0) self = false;
        const long long mi = static_cast<long long>(m[i]) + off;
        if (mi < 0 || mi >= static_cast<long long>(n)) inside = false;
        flat = flat * n + static_cast<std::size_t>(std::max(mi, 0LL));
      }
      if (inside && !self && values[flat] > values[f]) is_max = false;
    }
    if (is_max) starts.push_back(f);
  }

  auto ascend = [&](Vector theta) {
    Vector grad;
    Matrix hess;
    double value = surrogate(projections, theta, grad, hess);
    for (std::size_t it = 0; it < settings.max_iterations; ++it) {
      // Variables pinned at a bound with the gradient pointing outward are frozen.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const bool at_lo = theta[i] <= search.lower()[i] && grad[i] < 0.0;
        const bool at_hi = theta[i] >= search.upper()[i] && grad[i] > 0.0;
        if (!at_lo && !at_hi) free.push_back(i);
      }
      const auto nf = static_cast<Eigen::Index>(free.size());
      Vector g_free(nf);
      Matrix h_free(nf, nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        g_free[a] = grad[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) h_free(a, b) = hess(free[a], free[b]);
      }
      if (nf == 0 || g_free.norm() <= settings.gradient_tolerance) break;

      Vector step_free;
      bool newton = false;
      Eigen::LLT<Matrix> llt(-h_free);
      if (llt.info() == Eigen::Success) {
        step_free = llt.solve(g_free);
        newton = true;
      } else {
        step_free = g_free;
      }
      Vector direction = Vector::Zero(theta.size());
      for (Eigen::Index a = 0; a < nf; ++a) direction[free[a]] = step_free[a];

      bool moved = false;
      double t = 1.0;
      for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
        const Vector candidate = clamp_to(search, theta + t * direction);
        Vector cg;
        Matrix ch;
        const double cv = surrogate(projections, candidate, cg, ch);
        const double slack = newton ? 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value) : 0.0;
        if (cv > value - slack && (candidate - theta).norm() > 0.0) {
          theta = candidate;
          value = cv;
          grad = cg;
          hess = ch;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    return AtomSelection{theta, value};
  };

  AtomSelection best{Vector(), -std::numeric_limits<double>::infinity()};
  for (std::size_t f : starts) {
    const AtomSelection candidate = ascend(coarse_point(coarse_index(f)));
    const double scale = std::max(1.0, std::abs(candidate.objective));
    const bool better = candidate.objective > best.objective + 1e-12 * scale;
    const bool tie = std::abs(candidate.objective - best.objective) <= 1e-12 * scale;
    if (better || (tie && lex_less(candidate.theta, best.theta))) best = candidate;
  }
  return best;
}

}  // namespace tidict
