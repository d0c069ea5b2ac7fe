#pragma once

#include <string>
#include <string_view>

#include "spinenv/rate_model.hpp"

namespace spinenv {

/// Parse failure in a model config; `line()` is 1-based, 0 when the problem
/// is a missing section or key.
class ConfigError : public ModelError {
public:
  ConfigError(int line, const std::string& message);
  int line() const { return line_; }

private:
  int line_;
};

/// Reads the sectioned key/value model format:
///
///   [spin.c0]   keys 000..111
///   [spin.c1]   keys 000..111
///   [env]       range = R, then one key per (2R+1)-bit window
///   [lattice]   size = N, boundary = periodic | frozen:L|R[/L|R]
///
/// Blank lines and lines starting with '#' or ';' are ignored.
ModelSpec parse_model_config(std::string_view text);

/// Canonical text form; parse_model_config(write_model_config(s)) == s.
std::string write_model_config(const ModelSpec& spec);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace spinenv
