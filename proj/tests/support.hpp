#pragma once

#include <string>

#include "vulnopt/config_io.hpp"
#include "vulnopt/model.hpp"

namespace testing {

inline std::string data_path(const std::string& name) {
    return std::string(VULNOPT_DATA_DIR) + "/" + name;
}

// Reference parameter set with the L = 0.9 convention and any extra overrides.
inline vulnopt::HybridModelConfig reference_config(std::initializer_list<std::string> sets = {}) {
    auto doc = vulnopt::load_json_file(data_path("reference.json"));
    vulnopt::apply_override(doc, "contract.lgd=0.9");
    for (const auto& s : sets) vulnopt::apply_override(doc, s);
    return vulnopt::config_from_json(doc);
}

inline void zero_intensity(vulnopt::HybridModelConfig& c) {
    c.intensity = vulnopt::IntensityParams{};
}

}  // namespace testing
