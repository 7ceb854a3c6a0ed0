#include "ptbcc/methods.hpp"

#include <string>

#include "ptbcc/error.hpp"
#include "ptbcc/inference.hpp"

namespace ptbcc {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Ptbcc: return "ptbcc";
    case Method::MajorityVote: return "mv";
    case Method::DawidSkene: return "ds";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "ptbcc") return Method::Ptbcc;
  if (text == "mv") return Method::MajorityVote;
  if (text == "ds") return Method::DawidSkene;
  throw Error(ErrorKind::Config, "cli", "unknown method '" + std::string(text) + "'");
}

MethodOutput run_method(Method method, const Dataset& dataset, const Hyperparams& hp,
                        const DawidSkeneOptions& ds) {
  switch (method) {
    case Method::Ptbcc: {
      auto r = fit(dataset, hp);
      return {std::move(r.predictions), std::move(r.phi), r.iterations, r.converged};
    }
    case Method::MajorityVote: {
      auto r = majority_vote(dataset);
      return {std::move(r.predictions), std::move(r.posterior), 0, true};
    }
    case Method::DawidSkene: {
      auto r = dawid_skene(dataset, ds);
      return {std::move(r.predictions), std::move(r.posterior), r.iterations, r.converged};
    }
  }
  throw Error(ErrorKind::Config, "cli", "unknown method");
}

}  // namespace ptbcc
