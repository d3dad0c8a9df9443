#ifndef TIDICT_COMMANDS_HPP
#define TIDICT_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tidict/experiment_config.hpp"

namespace tidict::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 1,
  kNoDecomposition = 2,
  kValidationFailed = 3,
};

/// Where a command writes its artifacts. Without a directory, the primary
/// artifact goes to `out`.
struct Output {
  std::optional<std::filesystem::path> dir;
  std::ostream& out;
  std::ostream& err;
};

int cmd_decompose(const ExperimentConfig& cfg, const Output& io);
int cmd_errormap(const ExperimentConfig& cfg, const Output& io);
int cmd_compare_taylor(const ExperimentConfig& cfg, const Output& io);
int cmd_select_atom(const ExperimentConfig& cfg, const Output& io);
int cmd_validate(const ExperimentConfig& cfg, const Output& io);

/// `tidict decompose|errormap|compare-taylor|select-atom|validate --config <path> [--out <dir>]`.
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace tidict::cli

#endif  // TIDICT_COMMANDS_HPP
