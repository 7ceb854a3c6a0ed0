#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace ptbcc {

/// How prototypes beyond the first two are seeded at initialization.
enum class ExtraPrototypeMode {
  UniformDirichlet,  ///< each row drawn from Dirichlet(1, ..., 1)
  FlatRan,           ///< every entry 1/|K|
};

std::string_view to_string(ExtraPrototypeMode mode) noexcept;
ExtraPrototypeMode parse_extra_prototype_mode(std::string_view text);

struct Hyperparams {
  std::size_t num_prototypes = 2;
  double e = 1.0;
  double f = 5.0;
  double m = 1.35;
  double xi = 0.001;
  double beta_scale = 0.4;
  double a_scale = 0.5;
  std::size_t max_iterations = 500;
  ExtraPrototypeMode extra_prototype_mode = ExtraPrototypeMode::UniformDirichlet;
  std::uint64_t seed = 0;

  /// Throws Error(Hyperparameter) on any invalid field.
  void validate() const;
};

/// Applies a flat JSON object of overrides. Recognized keys are
/// s, e, f, m, xi, beta_scale, a_scale, max_iter, seed and
/// extra_prototype_mode; any other key throws Error(Config).
void apply_overrides(Hyperparams& hp, const nlohmann::json& overrides);

nlohmann::json to_json(const Hyperparams& hp);

}  // namespace ptbcc
