#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ptbcc::cli {

enum class Kind { String, Real, Count, Flag };

/// One configurable key. The JSON config uses `name`; the flag is
/// `--name` with underscores turned into dashes. A null fallback marks the
/// key as required.
struct Key {
  std::string name;
  Kind kind;
  nlohmann::json fallback;
  std::string help;
};

std::string flag_name(const std::string& key);

/// Merges defaults, then the flat JSON config file (if any), then flags
/// given on the command line. Unknown config keys, type mismatches and
/// missing required keys raise Error(Config).
nlohmann::json resolve(const std::vector<Key>& keys, const std::string& config_path,
                       const std::map<std::string, std::string>& given_flags);

}  // namespace ptbcc::cli
