#include "ptbcc/hyperparams.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ptbcc/error.hpp"

namespace ptbcc {

namespace {
constexpr const char* kOrigin = "ptbcc-core";

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::Hyperparameter, kOrigin,
                std::string(name) + " must be a positive finite real");
  }
}

double as_positive(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorKind::Config, kOrigin, "'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw Error(ErrorKind::Config, kOrigin, "'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}
}  // namespace

std::string_view to_string(ExtraPrototypeMode mode) noexcept {
  return mode == ExtraPrototypeMode::FlatRan ? "flat_ran" : "uniform_dirichlet";
}

ExtraPrototypeMode parse_extra_prototype_mode(std::string_view text) {
  if (text == "uniform_dirichlet") return ExtraPrototypeMode::UniformDirichlet;
  if (text == "flat_ran") return ExtraPrototypeMode::FlatRan;
  throw Error(ErrorKind::Hyperparameter, kOrigin,
              "extra_prototype_mode must be uniform_dirichlet or flat_ran, got '" +
                  std::string(text) + "'");
}

void Hyperparams::validate() const {
  if (num_prototypes < 2) {
    throw Error(ErrorKind::Hyperparameter, kOrigin, "num_prototypes must be at least 2");
  }
  require_positive(e, "e");
  require_positive(f, "f");
  require_positive(m, "m");
  require_positive(xi, "xi");
  require_positive(beta_scale, "beta_scale");
  require_positive(a_scale, "a_scale");
  if (max_iterations < 1) {
    throw Error(ErrorKind::Hyperparameter, kOrigin, "max_iterations must be at least 1");
  }
}

void apply_overrides(Hyperparams& hp, const nlohmann::json& overrides) {
  if (!overrides.is_object()) {
    throw Error(ErrorKind::Config, kOrigin, "hyperparameter config must be a flat JSON object");
  }
  for (const auto& [key, value] : overrides.items()) {
    if (key == "s") hp.num_prototypes = as_count(value, key);
    else if (key == "e") hp.e = as_positive(value, key);
    else if (key == "f") hp.f = as_positive(value, key);
    else if (key == "m") hp.m = as_positive(value, key);
    else if (key == "xi") hp.xi = as_positive(value, key);
    else if (key == "beta_scale") hp.beta_scale = as_positive(value, key);
    else if (key == "a_scale") hp.a_scale = as_positive(value, key);
    else if (key == "max_iter") hp.max_iterations = as_count(value, key);
    else if (key == "seed") hp.seed = as_count(value, key);
    else if (key == "extra_prototype_mode") {
      if (!value.is_string()) {
        throw Error(ErrorKind::Config, kOrigin, "'extra_prototype_mode' must be a string");
      }
      hp.extra_prototype_mode = parse_extra_prototype_mode(value.get<std::string>());
    } else {
      throw Error(ErrorKind::Config, kOrigin, "unknown hyperparameter key '" + key + "'");
    }
  }
}

nlohmann::json to_json(const Hyperparams& hp) {
  return {
      {"s", hp.num_prototypes},
      {"e", hp.e},
      {"f", hp.f},
      {"m", hp.m},
      {"xi", hp.xi},
      {"beta_scale", hp.beta_scale},
      {"a_scale", hp.a_scale},
      {"max_iter", hp.max_iterations},
      {"seed", hp.seed},
      {"extra_prototype_mode", std::string(to_string(hp.extra_prototype_mode))},
  };
}

}  // namespace ptbcc
