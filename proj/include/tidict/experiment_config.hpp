#ifndef TIDICT_EXPERIMENT_CONFIG_HPP
#define TIDICT_EXPERIMENT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidict/gram_decompose.hpp"
#include "tidict/kernel_space.hpp"
#include "tidict/lowrank_dictionary.hpp"

namespace tidict {

struct EvaluationSpec {
  std::optional<ParamBox> region;  // default: grid central cell
  std::vector<std::size_t> resolution;
};

struct EmbeddingSpec {
  std::size_t samples_per_axis = 256;
  double margin_sigmas = 6.0;
};

struct TaylorSpec {
  int order = 2;
  std::optional<Vector> center;  // default: evaluation region centroid
};

struct SelectAtomSpec {
  std::optional<Vector> theta_true;
  double noise_level = 0.0;  // expected |noise| relative to the unit-norm atom
  std::optional<ParamBox> search;  // default: parameter box
  std::size_t oracle_points = 200;
  SelectAtomSettings settings;
};

struct ValidateSpec {
  std::size_t random_samples = 1000;
  std::optional<std::filesystem::path> rc_file;
};

struct Tolerances {
  DecompositionTolerances decomposition;
  double interpolation = 1e-7;
  double kernel_equality = 1e-10;
  double translation_shift = 2e-10;
  double unit_norm = 1e-10;
  double psd = 1e-10;
  double rank = 1e-8;
};

/// Parsed experiment configuration. Layout documented in
/// schema/experiment_config.schema.json.
struct ExperimentConfig {
  std::string kernel = "gaussian";
  double sigma = 1.0;
  std::size_t dim = 1;
  Vector grid_origin;
  Vector grid_spacing;
  std::vector<std::size_t> grid_counts;
  std::optional<ParamBox> param_box;
  EvaluationSpec evaluation;
  EmbeddingSpec embedding;
  TaylorSpec taylor;
  SelectAtomSpec select_atom;
  ValidateSpec validate;
  Tolerances tolerances;
  std::uint64_t seed = 0;

  NodeGrid grid() const;
  ParamBox domain() const;
  ParamBox evaluation_region() const;
  std::shared_ptr<const GaussianKernel> make_kernel() const;

  /// Throws ConfigError carrying the JSON pointer of the first violation.
  /// Relative file references are resolved against base_dir.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace tidict

#endif  // TIDICT_EXPERIMENT_CONFIG_HPP
