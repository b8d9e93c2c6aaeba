#pragma once

#include "ctm/baselines.hpp"
#include "ctm/transition.hpp"

#include <string>
#include <variant>

namespace ctm {

// Versioned JSON model document ("ctm.model.v1"). All reals are written as
// C99 hex-float strings so a save/load round trip is bit exact.
void save_model(const std::string& path, const FittedTransitionModel& model);
void save_model(const std::string& path, const BaselineFit& model);

using AnyModel = std::variant<FittedTransitionModel, BaselineFit>;
AnyModel load_model(const std::string& path);

}  // namespace ctm
