#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "agentinv/core.hpp"

namespace agentinv {

/// Raw key/value pairs collected from parameter files and `key=value` overrides.
/// Keys are restricted to the nine ModelParams field names.
class ParamSource {
 public:
  /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
  /// unknown or repeated keys throw ModelError with the offending line number.
  void read(std::istream& in, std::string_view origin = "<stream>");
  void read_file(const std::filesystem::path& path);
  /// Applies one `key=value` override; later overrides win.
  void set(std::string_view assignment);
  void set(const std::string& key, double value);
  /// Seeds every field from an existing parameter set.
  void assign(const ModelParams& params);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  /// Builds and validates the parameter set; throws if any field is missing.
  ModelParams build() const;

 private:
  std::map<std::string, double> values_;
};

ModelParams read_params(std::istream& in);
/// Emits the nine fields in `key = value` form, round-trip exact.
std::string format_params(const ModelParams& params);

}  // namespace agentinv
