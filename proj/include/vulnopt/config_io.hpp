#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "vulnopt/inversion.hpp"
#include "vulnopt/model.hpp"

namespace vulnopt {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads the sections market, stock, firm, intensity, contract and grid.
//
// Asset blocks take either `initial_log_price` or `initial_price`, and one of
// `h0` (idiosyncratic first-period variance), `total_h0` (h0 + beta^2 h_m0),
// or their annualized forms `h0_annual` / `total_h0_annual`. The contract takes
// either the per-step `r` or `r_annual`, and either `maturity_steps` or
// `maturity_years`; all annual forms are converted with grid.steps_per_year.
HybridModelConfig config_from_json(const nlohmann::json& doc);

nlohmann::json load_json_file(const std::string& path);
HybridModelConfig load_config(const std::string& path);

// Applies a dotted `path=value` assignment, e.g. "intensity.lambda0=0".
// Setting one member of an alternative pair (r / r_annual, h0 / total_h0, ...)
// removes the other so the override is the one that takes effect.
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Optional `quadrature` section (phi_max, panels, nodes_per_panel, abs_tol,
// rel_tol); missing members keep their defaults.
QuadratureSpec quadrature_from_json(const nlohmann::json& doc);

// Per-step view of a parsed config, written with the primary field names.
nlohmann::json config_to_json(const HybridModelConfig& config);

}  // namespace vulnopt
