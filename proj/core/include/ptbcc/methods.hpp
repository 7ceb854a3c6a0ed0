#pragma once

#include <string_view>
#include <vector>

#include "ptbcc/baselines.hpp"
#include "ptbcc/dataset.hpp"
#include "ptbcc/hyperparams.hpp"
#include "ptbcc/matrix.hpp"

namespace ptbcc {

enum class Method { Ptbcc, MajorityVote, DawidSkene };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

struct MethodOutput {
  std::vector<std::size_t> predictions;
  Matrix posterior;
  std::size_t iterations = 0;
  bool converged = true;
};

MethodOutput run_method(Method method, const Dataset& dataset, const Hyperparams& hp = {},
                        const DawidSkeneOptions& ds = {});

}  // namespace ptbcc
