#include "tidict/experiment_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tidict/errors.hpp"

namespace tidict {

namespace {

using nlohmann::json;

// Strict object reader: every key must be known; every value is typed and
// range-checked with the JSON pointer of the entry in the error.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::set<std::string> allowed) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
    for (const auto& [key, value] : obj_.items()) {
      if (!allowed.count(key)) throw ConfigError(at(key), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  const json& raw(const std::string& key) const { return obj_.at(key); }

  const json& required(const std::string& key) const {
    if (!has(key)) throw ConfigError(at(key), "missing required key");
    return obj_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      required(key);
    }
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ConfigError(at(key), "expected a positive number");
    return v;
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback, std::size_t minimum) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      required(key);
    }
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(minimum)) {
      throw ConfigError(at(key), "expected an integer >= " + std::to_string(minimum));
    }
    return v.get<std::size_t>();
  }

  Vector vector(const std::string& key, std::size_t length) const {
    const auto& v = required(key);
    if (!v.is_array() || v.size() != length) {
      throw ConfigError(at(key), "expected an array of " + std::to_string(length) + " numbers");
    }
    Vector out(static_cast<Eigen::Index>(length));
    for (std::size_t i = 0; i < length; ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::size_t length, std::size_t minimum) const {
    const auto& v = required(key);
    if (!v.is_array() || v.size() != length) {
      throw ConfigError(at(key), "expected an array of " + std::to_string(length) + " integers");
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < length; ++i) {
      if (!v[i].is_number_integer() || v[i].get<long long>() < static_cast<long long>(minimum)) {
        throw ConfigError(at(key) + "/" + std::to_string(i), "expected an integer >= " + std::to_string(minimum));
      }
      out.push_back(v[i].get<std::size_t>());
    }
    return out;
  }

  ParamBox box(const std::string& key, std::size_t dim) const {
    Reader r(required(key), at(key), {"lower", "upper"});
    Vector lo = r.vector("lower", dim);
    Vector hi = r.vector("upper", dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(lo[static_cast<Eigen::Index>(i)] < hi[static_cast<Eigen::Index>(i)])) {
        throw ConfigError(at(key) + "/upper/" + std::to_string(i), "upper bound must exceed lower bound");
      }
    }
    return {lo, hi};
  }

  Reader child(const std::string& key, std::set<std::string> allowed) const {
    return {obj_.at(key), at(key), std::move(allowed)};
  }

 private:
  const json& obj_;
  std::string path_;
};

}  // namespace

NodeGrid ExperimentConfig::grid() const { return {grid_origin, grid_spacing, grid_counts}; }

ParamBox ExperimentConfig::domain() const { return param_box ? *param_box : grid().bounding_box(); }

ParamBox ExperimentConfig::evaluation_region() const {
  return evaluation.region ? *evaluation.region : grid().central_cell();
}

std::shared_ptr<const GaussianKernel> ExperimentConfig::make_kernel() const {
  return std::make_shared<const GaussianKernel>(sigma, dim);
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  Reader root(j, "", {"kernel", "sigma", "dim", "grid", "param_box", "evaluation", "embedding", "taylor",
                      "select_atom", "validate", "tolerances", "seed"});
  ExperimentConfig cfg;

  const auto& kernel = root.required("kernel");
  if (!kernel.is_string()) throw ConfigError("/kernel", "expected a string");
  cfg.kernel = kernel.get<std::string>();
  if (cfg.kernel != "gaussian") throw ConfigError("/kernel", "unsupported kernel '" + cfg.kernel + "'");
  cfg.sigma = root.positive("sigma");
  cfg.dim = root.count("dim", std::nullopt, 1);
  const std::size_t d = cfg.dim;

  {
    root.required("grid");
    Reader g = root.child("grid", {"origin", "spacing", "counts"});
    cfg.grid_origin = g.vector("origin", d);
    cfg.grid_spacing = g.vector("spacing", d);
    for (std::size_t i = 0; i < d; ++i) {
      if (!(cfg.grid_spacing[static_cast<Eigen::Index>(i)] > 0.0)) {
        throw ConfigError("/grid/spacing/" + std::to_string(i), "expected a positive number");
      }
    }
    cfg.grid_counts = g.counts("counts", d, 1);
  }

  if (root.has("param_box")) {
    cfg.param_box = root.box("param_box", d);
    for (const auto& node : cfg.grid().nodes()) {
      if (!cfg.param_box->contains(node, 1e-12)) throw ConfigError("/param_box", "grid node outside the parameter box");
    }
  }

  cfg.evaluation.resolution.assign(d, 50);
  if (root.has("evaluation")) {
    Reader e = root.child("evaluation", {"lower", "upper", "resolution"});
    if (e.has("lower") || e.has("upper")) {
      Vector lo = e.vector("lower", d);
      Vector hi = e.vector("upper", d);
      for (std::size_t i = 0; i < d; ++i) {
        if (!(lo[static_cast<Eigen::Index>(i)] < hi[static_cast<Eigen::Index>(i)])) {
          throw ConfigError("/evaluation/upper/" + std::to_string(i), "upper bound must exceed lower bound");
        }
      }
      cfg.evaluation.region = ParamBox(lo, hi);
    }
    if (e.has("resolution")) cfg.evaluation.resolution = e.counts("resolution", d, 2);
  }

  if (root.has("embedding")) {
    Reader e = root.child("embedding", {"samples_per_axis", "margin_sigmas"});
    cfg.embedding.samples_per_axis = e.count("samples_per_axis", 256, 2);
    cfg.embedding.margin_sigmas = e.number("margin_sigmas", 6.0);
    if (cfg.embedding.margin_sigmas < 0.0) throw ConfigError("/embedding/margin_sigmas", "expected a number >= 0");
  }

  if (root.has("taylor")) {
    Reader t = root.child("taylor", {"order", "center"});
    cfg.taylor.order = static_cast<int>(t.count("order", 2, 0));
    if (t.has("center")) cfg.taylor.center = t.vector("center", d);
  }

  if (root.has("select_atom")) {
    Reader s = root.child("select_atom", {"theta_true", "noise_level", "search", "oracle_points", "coarse_points",
                                          "max_iterations", "gradient_tolerance"});
    if (s.has("theta_true")) cfg.select_atom.theta_true = s.vector("theta_true", d);
    cfg.select_atom.noise_level = s.number("noise_level", 0.0);
    if (cfg.select_atom.noise_level < 0.0) throw ConfigError("/select_atom/noise_level", "expected a number >= 0");
    if (s.has("search")) cfg.select_atom.search = s.box("search", d);
    cfg.select_atom.oracle_points = s.count("oracle_points", 200, 2);
    cfg.select_atom.settings.coarse_points = s.count("coarse_points", 32, 2);
    cfg.select_atom.settings.max_iterations = s.count("max_iterations", 50, 1);
    cfg.select_atom.settings.gradient_tolerance = s.positive("gradient_tolerance", 1e-10);
  }

  if (root.has("validate")) {
    Reader v = root.child("validate", {"random_samples", "rc_file"});
    cfg.validate.random_samples = v.count("random_samples", 1000, 1);
    if (v.has("rc_file")) {
      if (!v.raw("rc_file").is_string()) throw ConfigError("/validate/rc_file", "expected a string");
      std::filesystem::path p = v.raw("rc_file").get<std::string>();
      cfg.validate.rc_file = p.is_absolute() ? p : base_dir / p;
    }
  }

  if (root.has("tolerances")) {
    Reader t = root.child("tolerances", {"residual", "root_imag", "root_range", "negative_weight", "interpolation",
                                         "kernel_equality", "translation_shift", "unit_norm", "psd", "rank"});
    auto& tol = cfg.tolerances;
    tol.decomposition.residual = t.positive("residual", tol.decomposition.residual);
    tol.decomposition.root_imag = t.positive("root_imag", tol.decomposition.root_imag);
    tol.decomposition.root_range = t.positive("root_range", tol.decomposition.root_range);
    tol.decomposition.negative_weight = t.positive("negative_weight", tol.decomposition.negative_weight);
    tol.interpolation = t.positive("interpolation", tol.interpolation);
    tol.kernel_equality = t.positive("kernel_equality", tol.kernel_equality);
    tol.translation_shift = t.positive("translation_shift", tol.translation_shift);
    tol.unit_norm = t.positive("unit_norm", tol.unit_norm);
    tol.psd = t.positive("psd", tol.psd);
    tol.rank = t.positive("rank", tol.rank);
  }

  if (root.has("seed")) {
    const auto& s = root.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("/seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return from_json(j, path.parent_path());
}

}  // namespace tidict
