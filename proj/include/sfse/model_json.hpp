#pragma once

#include <json.hpp>

#include "sfse/model_io.hpp"

namespace sfse {

// JSON-value entry points shared with the experiment-config parser.
ModelDocument model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json_value(const ModelDocument& model);

}  // namespace sfse
