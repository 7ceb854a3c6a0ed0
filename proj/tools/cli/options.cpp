#include "options.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ptbcc/error.hpp"

namespace ptbcc::cli {

namespace {

constexpr const char* kOrigin = "cli";

[[noreturn]] void fail(const std::string& message) {
  throw Error(ErrorKind::Config, kOrigin, message);
}

nlohmann::json from_json_value(const Key& key, const nlohmann::json& v) {
  switch (key.kind) {
    case Kind::String:
      if (!v.is_string()) fail("'" + key.name + "' must be a string");
      return v;
    case Kind::Real:
      if (!v.is_number() || !std::isfinite(v.get<double>())) fail("'" + key.name + "' must be a number");
      return v.get<double>();
    case Kind::Count:
      if (!v.is_number_unsigned()) fail("'" + key.name + "' must be a non-negative integer");
      return v;
    case Kind::Flag:
      if (!v.is_boolean()) fail("'" + key.name + "' must be true or false");
      return v;
  }
  return v;
}

nlohmann::json from_text(const Key& key, const std::string& text) {
  switch (key.kind) {
    case Kind::String:
      return text;
    case Kind::Real: {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != text.size() || !std::isfinite(value))
        fail(flag_name(key.name) + " expects a number, got '" + text + "'");
      return value;
    }
    case Kind::Count: {
      if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail(flag_name(key.name) + " expects a non-negative integer, got '" + text + "'");
      try {
        return static_cast<std::uint64_t>(std::stoull(text));
      } catch (const std::exception&) {
        fail(flag_name(key.name) + " is out of range");
      }
    }
    case Kind::Flag:
      return true;
  }
  return text;
}

}  // namespace

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

nlohmann::json resolve(const std::vector<Key>& keys, const std::string& config_path,
                       const std::map<std::string, std::string>& given_flags) {
  nlohmann::json effective = nlohmann::json::object();
  for (const auto& key : keys) effective[key.name] = key.fallback;
  auto find = [&](const std::string& name) -> const Key* {
    for (const auto& key : keys)
      if (key.name == name) return &key;
    return nullptr;
  };

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorKind::Io, kOrigin, "cannot open config '" + config_path + "'");
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      fail("config '" + config_path + "' is not valid JSON: " + e.what());
    }
    if (!file.is_object()) fail("config '" + config_path + "' must be a flat JSON object");
    for (const auto& [name, value] : file.items()) {
      const Key* key = find(name);
      if (!key) fail("unknown config key '" + name + "'");
      effective[name] = from_json_value(*key, value);
    }
  }
  for (const auto& [name, text] : given_flags) {
    const Key* key = find(name);
    if (!key) fail("unknown option '" + flag_name(name) + "'");
    effective[name] = from_text(*key, text);
  }
  for (const auto& key : keys) {
    if (effective[key.name].is_null())
      fail("missing required " + flag_name(key.name) + " (or config key '" + key.name + "')");
  }
  return effective;
}

}  // namespace ptbcc::cli
