#pragma once

#include <json.hpp>

#include "priorgan/gan.hpp"
#include "priorgan/prior_model.hpp"
#include "priorgan/toy_world.hpp"

namespace priorgan::codec {

using nlohmann::json;

json world_to_json(const WorldSpec& w);
WorldSpec world_from_json(const json& j);

json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const json& j);

json prior_settings_to_json(const PriorFitSettings& s);
PriorFitSettings prior_settings_from_json(const json& j);

/// Typed member lookup; missing or ill-typed members raise FormatError.
template <typename T>
T get(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::FormatError, std::string("missing field '") + key + "'");
    try {
        return it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::FormatError, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace priorgan::codec
