// Test-only reference computations, independent of the library's solvers.
#ifndef TIDICT_TESTS_ORACLES_HPP
#define TIDICT_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct LineSpectrum {
  double lambda0 = 0.0;
  std::vector<double> weights;
  std::vector<double> freqs;  // ascending
  double residual = 0.0;      // max_m |g_m - model(m * spacing)|
};

// Weights for fixed frequencies by least squares; returns the sum of squared
// residuals and fills `fit`.
inline double profile_fit(std::span<const double> g, double spacing, const std::vector<double>& freqs,
                          bool with_dc, LineSpectrum& fit) {
  const auto L = static_cast<Eigen::Index>(g.size());
  const auto K = static_cast<Eigen::Index>(freqs.size());
  const Eigen::Index cols = K + (with_dc ? 1 : 0);
  Eigen::MatrixXd a(L, cols);
  Eigen::VectorXd b(L);
  for (Eigen::Index m = 0; m < L; ++m) {
    for (Eigen::Index k = 0; k < K; ++k) a(m, k) = std::cos(freqs[static_cast<std::size_t>(k)] * m * spacing);
    if (with_dc) a(m, K) = 1.0;
    b[m] = g[static_cast<std::size_t>(m)];
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd r = a * x - b;
  fit.freqs = freqs;
  fit.weights.assign(x.data(), x.data() + K);
  fit.lambda0 = with_dc ? x[K] : 0.0;
  fit.residual = r.cwiseAbs().maxCoeff();
  return r.squaredNorm();
}

// Gauss-Newton on all parameters (lambda0, lambda_k, w_k) with the analytic
// Jacobian of the model; keeps the best iterate.
inline LineSpectrum gauss_newton_polish(std::span<const double> g, double spacing, LineSpectrum start) {
  const auto L = static_cast<Eigen::Index>(g.size());
  const auto K = static_cast<Eigen::Index>(start.freqs.size());
  const bool dc = g.size() % 2 == 1;
  LineSpectrum best = start;
  LineSpectrum cur = start;
  for (int it = 0; it < 20; ++it) {
    const Eigen::Index n = 2 * K + (dc ? 1 : 0);
    Eigen::MatrixXd jac(L, n);
    Eigen::VectorXd r(L);
    for (Eigen::Index m = 0; m < L; ++m) {
      const double t = static_cast<double>(m) * spacing;
      double model = cur.lambda0;
      for (Eigen::Index k = 0; k < K; ++k) {
        const double w = cur.freqs[static_cast<std::size_t>(k)];
        const double lam = cur.weights[static_cast<std::size_t>(k)];
        model += lam * std::cos(w * t);
        jac(m, k) = std::cos(w * t);
        jac(m, K + k) = -lam * t * std::sin(w * t);
      }
      if (dc) jac(m, 2 * K) = 1.0;
      r[m] = model - g[static_cast<std::size_t>(m)];
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
    for (Eigen::Index k = 0; k < K; ++k) {
      cur.weights[static_cast<std::size_t>(k)] += step[k];
      cur.freqs[static_cast<std::size_t>(k)] += step[K + k];
    }
    if (dc) cur.lambda0 += step[2 * K];
    double res = 0.0;
    for (Eigen::Index m = 0; m < L; ++m) {
      double model = cur.lambda0;
      for (Eigen::Index k = 0; k < K; ++k) {
        model += cur.weights[static_cast<std::size_t>(k)] *
                 std::cos(cur.freqs[static_cast<std::size_t>(k)] * static_cast<double>(m) * spacing);
      }
      res = std::max(res, std::abs(model - g[static_cast<std::size_t>(m)]));
    }
    cur.residual = res;
    if (res < best.residual) best = cur;
  }
  return best;
}

// Dense grid search over frequency tuples in (0, pi / spacing), then compass
// search refinement. Handles K = floor(L/2) <= 2.
inline LineSpectrum brute_force_decompose_1d(std::span<const double> g, double spacing) {
  const std::size_t L = g.size();
  const std::size_t K = L / 2;
  const bool dc = L % 2 == 1;
  const double top = std::numbers::pi / spacing;
  LineSpectrum best;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_freqs;

  if (K == 1) {
    const int n = 20000;
    for (int i = 1; i < n; ++i) {
      LineSpectrum fit;
      const double obj = profile_fit(g, spacing, {top * i / n}, dc, fit);
      if (obj < best_obj) {
        best_obj = obj;
        best_freqs = fit.freqs;
      }
    }
  } else if (K == 2) {
    const int n = 800;
    for (int i = 1; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        LineSpectrum fit;
        const double obj = profile_fit(g, spacing, {top * i / n, top * j / n}, dc, fit);
        if (obj < best_obj) {
          best_obj = obj;
          best_freqs = fit.freqs;
        }
      }
    }
  } else {
    return best;
  }

  std::vector<double> x = best_freqs;
  double step = top / 800.0;
  while (step > 1e-15) {
    bool improved = false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> trial = x;
        trial[k] += dir * step;
        if (trial[k] <= 0.0 || trial[k] >= top) continue;
        LineSpectrum fit;
        const double obj = profile_fit(g, spacing, trial, dc, fit);
        if (obj < best_obj) {
          best_obj = obj;
          x = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  std::sort(x.begin(), x.end());
  profile_fit(g, spacing, x, dc, best);
  return gauss_newton_polish(g, spacing, best);
}

// Materialized approximation in a sampled space: the dual atoms are built
// from sampled node atoms and the inverse of their sampled Gram matrix, then
// h_N(theta) = sum_l v_l c_l. Returns h_N.
inline Eigen::VectorXd materialized_approx(const std::vector<Eigen::VectorXd>& node_atoms,
                                           const Eigen::VectorXd& coefficients) {
  const auto L = static_cast<Eigen::Index>(node_atoms.size());
  Eigen::MatrixXd a(node_atoms.front().size(), L);
  for (Eigen::Index j = 0; j < L; ++j) a.col(j) = node_atoms[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd gram = a.transpose() * a;
  const Eigen::MatrixXd inv = gram.fullPivLu().inverse();
  const Eigen::MatrixXd duals = a * inv.transpose();  // column l is v_l
  return duals * coefficients;
}

}  // namespace oracle

#endif  // TIDICT_TESTS_ORACLES_HPP
