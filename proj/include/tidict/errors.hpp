#ifndef TIDICT_ERRORS_HPP
#define TIDICT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tidict {

/// Dimension mismatch, parameter outside its domain, empty search region.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampled atom loses too much mass outside the embedding grid.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gram matrix is numerically singular (interpolated atoms nearly dependent).
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Gram matrix does not admit a raised-cosine decomposition on this grid.
class NoValidDecomposition : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration. `path()` is a JSON pointer to the
/// offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error((path.empty() ? std::string("(document root)") : path) + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace tidict

#endif  // TIDICT_ERRORS_HPP
