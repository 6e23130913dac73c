#pragma once

#include <string>
#include <variant>

#include "bugclass/forest.hpp"
#include "bugclass/logistic.hpp"

namespace bugclass {

using AnyModel = std::variant<LogisticModel, Forest>;

// Versioned JSON envelope; numeric fields round-trip exactly, so reloaded
// models reproduce the original classification decisions bit for bit.
void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& text, const std::string& name);

}  // namespace bugclass
