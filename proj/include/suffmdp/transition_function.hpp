#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "suffmdp/error.hpp"

namespace suffmdp {

/// The map g indexing the simulation models.
enum class TransitionFunction { identity, quad, exp };

inline double apply_transition(TransitionFunction g, double u) noexcept {
  switch (g) {
    case TransitionFunction::quad: return std::min(u * u, 3.0);
    case TransitionFunction::exp: return std::min(std::exp(u), 3.0);
    case TransitionFunction::identity: break;
  }
  return u;
}

inline std::string to_string(TransitionFunction g) {
  switch (g) {
    case TransitionFunction::quad: return "quad";
    case TransitionFunction::exp: return "exp";
    case TransitionFunction::identity: break;
  }
  return "linear";
}

inline TransitionFunction parse_transition_function(std::string_view name) {
  if (name == "linear" || name == "identity") return TransitionFunction::identity;
  if (name == "quad") return TransitionFunction::quad;
  if (name == "exp") return TransitionFunction::exp;
  throw ValidationError("unknown model '" + std::string(name) + "' (expected linear|quad|exp)");
}

}  // namespace suffmdp
