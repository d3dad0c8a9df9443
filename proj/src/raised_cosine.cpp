#include "tidict/raised_cosine.hpp"

#include <cmath>
#include <iostream>

#include "tidict/errors.hpp"

namespace tidict {

bool ValidationReport::failed(const std::string& check) const {
  for (const auto& issue : issues) {
    if (issue.check == check) return true;
  }
  return false;
}

Vector canonical_frequency(Vector w) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) {
      if (w[i] < 0.0) w = -w;
      break;
    }
  }
  return w;
}

RaisedCosineKernel::RaisedCosineKernel(std::size_t dim, double lambda0, std::vector<CosineTerm> terms,
                                       std::size_t rank)
    : dim_(dim), lambda0_(lambda0), rank_(rank) {
  if (dim == 0) throw DomainError("RaisedCosineKernel: dim must be positive");
  if (rank == 0) throw DomainError("RaisedCosineKernel: rank must be positive");
  for (auto& t : terms) {
    check_dim(t.freq, "frequency");
    if (std::abs(t.weight) < kPruneThreshold) {
      ++pruned_;
      continue;
    }
    terms_.push_back({t.weight, canonical_frequency(std::move(t.freq))});
  }
  if (pruned_ > 0) {
    std::clog << "warning: pruned " << pruned_ << " raised-cosine term(s) with |lambda| < "
              << kPruneThreshold << "\n";
  }
}

RaisedCosineKernel RaisedCosineKernel::constant(std::size_t dim) { return {dim, 1.0, {}, 1}; }

void RaisedCosineKernel::check_dim(const Vector& v, const char* what) const {
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw DomainError(std::string("raised-cosine kernel: ") + what + " has length " +
                      std::to_string(v.size()) + ", expected " + std::to_string(dim_));
  }
}

double RaisedCosineKernel::eval(const Vector& delta) const {
  check_dim(delta, "displacement");
  double value = lambda0_;
  for (const auto& t : terms_) value += t.weight * std::cos(t.freq.dot(delta));
  return value;
}

double RaisedCosineKernel::eval(const Vector& delta, Vector& gradient, Matrix& hessian) const {
  check_dim(delta, "displacement");
  const auto d = static_cast<Eigen::Index>(dim_);
  gradient = Vector::Zero(d);
  hessian = Matrix::Zero(d, d);
  double value = lambda0_;
  for (const auto& t : terms_) {
    const double phase = t.freq.dot(delta);
    const double c = t.weight * std::cos(phase);
    value += c;
    gradient -= t.weight * std::sin(phase) * t.freq;
    hessian -= c * t.freq * t.freq.transpose();
  }
  return value;
}

std::size_t RaisedCosineKernel::feature_dim() const noexcept {
  return 2 * terms_.size() + (lambda0_ > 0.0 ? 1 : 0);
}

Vector RaisedCosineKernel::feature_map(const Vector& theta) const {
  check_dim(theta, "parameter");
  Vector phi(static_cast<Eigen::Index>(feature_dim()));
  Eigen::Index i = 0;
  if (lambda0_ > 0.0) phi[i++] = std::sqrt(lambda0_);
  for (const auto& t : terms_) {
    const double s = std::sqrt(std::max(t.weight, 0.0));
    const double phase = t.freq.dot(theta);
    phi[i++] = s * std::cos(phase);
    phi[i++] = s * std::sin(phase);
  }
  return phi;
}

ValidationReport RaisedCosineKernel::validate() const {
  ValidationReport report;
  auto fail = [&](const char* check, std::string msg) { report.issues.push_back({check, std::move(msg)}); };
  const double tol = kValidationTolerance;

  const std::size_t expected_terms = rank_ / 2;
  if (terms_.size() != expected_terms) {
    fail("rank", "K = " + std::to_string(terms_.size()) + " but floor(L/2) = " +
                     std::to_string(expected_terms) + " for L = " + std::to_string(rank_));
  }

  if (rank_ % 2 == 0 && std::abs(lambda0_) > tol) {
    fail("parity", "lambda0 = " + std::to_string(lambda0_) + " must be 0 for even L = " +
                       std::to_string(rank_));
  }
  if (rank_ % 2 == 1 && !(lambda0_ > tol)) {
    fail("parity", "lambda0 = " + std::to_string(lambda0_) + " must be > 0 for odd L = " +
                       std::to_string(rank_));
  }

  if (lambda0_ < -tol || !std::isfinite(lambda0_)) {
    fail("psd", "negative lambda0 = " + std::to_string(lambda0_) + " breaks positive semidefiniteness");
  }
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const auto& t = terms_[k];
    if (!std::isfinite(t.weight) || t.weight < -tol) {
      fail("psd", "term " + std::to_string(k) + ": negative weight " + std::to_string(t.weight) +
                      " breaks positive semidefiniteness");
    }
    if (!t.freq.allFinite()) fail("frequencies", "term " + std::to_string(k) + ": non-finite frequency");
    if (t.freq.norm() < kFrequencyTolerance) {
      fail("frequencies", "term " + std::to_string(k) + ": zero frequency duplicates the DC term");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto& o = terms_[j].freq;
      if ((t.freq - o).norm() < kFrequencyTolerance || (t.freq + o).norm() < kFrequencyTolerance) {
        fail("frequencies", "terms " + std::to_string(j) + " and " + std::to_string(k) +
                                " have coinciding frequencies");
      }
    }
  }
  return report;
}

nlohmann::ordered_json RaisedCosineKernel::to_json() const {
  nlohmann::ordered_json j;
  j["lambda0"] = lambda0_;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : terms_) {
    nlohmann::ordered_json term;
    term["lambda"] = t.weight;
    term["w"] = std::vector<double>(t.freq.data(), t.freq.data() + t.freq.size());
    terms.push_back(std::move(term));
  }
  j["terms"] = std::move(terms);
  j["rank"] = rank_;
  j["dim"] = dim_;
  return j;
}

RaisedCosineKernel RaisedCosineKernel::from_json(const nlohmann::json& j) {
  auto require = [&](const nlohmann::json& obj, const char* key, const std::string& path) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + "/" + key, "missing required key");
    return obj.at(key);
  };
  const auto& l0 = require(j, "lambda0", "");
  if (!l0.is_number()) throw ConfigError("/lambda0", "expected a number");
  const auto& rank = require(j, "rank", "");
  if (!rank.is_number_integer() || rank.get<long long>() < 1) throw ConfigError("/rank", "expected a positive integer");
  const auto& terms = require(j, "terms", "");
  if (!terms.is_array()) throw ConfigError("/terms", "expected an array");

  std::size_t dim = 0;
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
      throw ConfigError("/dim", "expected a positive integer");
    }
    dim = j["dim"].get<std::size_t>();
  }
  std::vector<CosineTerm> parsed;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const std::string path = "/terms/" + std::to_string(k);
    const auto& lam = require(terms[k], "lambda", path);
    if (!lam.is_number()) throw ConfigError(path + "/lambda", "expected a number");
    const auto& w = require(terms[k], "w", path);
    if (!w.is_array() || w.empty()) throw ConfigError(path + "/w", "expected a non-empty array");
    Vector freq(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_number()) throw ConfigError(path + "/w/" + std::to_string(i), "expected a number");
      freq[static_cast<Eigen::Index>(i)] = w[i].get<double>();
    }
    if (dim == 0) dim = w.size();
    if (w.size() != dim) throw ConfigError(path + "/w", "frequency length disagrees with kernel dimension");
    parsed.push_back({lam.get<double>(), std::move(freq)});
  }
  if (dim == 0) throw ConfigError("/dim", "dimension cannot be inferred from an empty term list");
  return {dim, l0.get<double>(), std::move(parsed), rank.get<std::size_t>()};
}

double rc_eval(const RaisedCosineKernel& rc, const Vector& delta) { return rc.eval(delta); }
Vector feature_map(const RaisedCosineKernel& rc, const Vector& theta) { return rc.feature_map(theta); }
ValidationReport rc_validate(const RaisedCosineKernel& rc) { return rc.validate(); }

}  // namespace tidict
