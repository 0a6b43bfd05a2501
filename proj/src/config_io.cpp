#include "vulnopt/config_io.hpp"

#include <cmath>
#include <fstream>
#include <map>

namespace vulnopt {

using nlohmann::json;

namespace {

const json& section(const json& doc, const char* name) {
    if (!doc.is_object() || !doc.contains(name) || !doc.at(name).is_object()) {
        throw ConfigError(std::string("config: missing section '") + name + "'");
    }
    return doc.at(name);
}

double number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) throw ConfigError("config: missing " + where + "." + key);
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) {
        throw ConfigError(std::string("config: ") + key + " must be a number");
    }
    return obj.at(key).get<double>();
}

GarchParams read_garch(const json& obj, const std::string& where) {
    GarchParams g;
    g.w = number(obj, where, "w");
    g.b = number(obj, where, "b");
    g.a = number(obj, where, "a");
    g.c = number(obj, where, "c");
    return g;
}

AssetBlock read_block(const json& obj, const std::string& where, double beta_default,
                      const double* market_h0, int steps_per_year) {
    AssetBlock block;
    if (obj.contains("initial_log_price")) {
        block.initial_log_price = number(obj, where, "initial_log_price");
    } else {
        const double price = number(obj, where, "initial_price");
        if (!(price > 0.0)) throw ConfigError("config: " + where + ".initial_price must be > 0");
        block.initial_log_price = std::log(price);
    }
    block.beta = number_or(obj, "beta", beta_default);
    // Annual forms are divided by steps_per_year.
    double total = 0.0;
    bool is_total = false;
    if (obj.contains("h0")) {
        block.h0 = number(obj, where, "h0");
    } else if (obj.contains("h0_annual")) {
        block.h0 = number(obj, where, "h0_annual") / steps_per_year;
    } else if (obj.contains("total_h0")) {
        total = number(obj, where, "total_h0");
        is_total = true;
    } else if (obj.contains("total_h0_annual")) {
        total = number(obj, where, "total_h0_annual") / steps_per_year;
        is_total = true;
    } else {
        throw ConfigError("config: missing " + where +
                          ".h0 (or h0_annual, total_h0, total_h0_annual)");
    }
    if (is_total) {
        if (market_h0 == nullptr) throw ConfigError("config: " + where + " cannot use total_h0");
        block.h0 = total - block.beta * block.beta * (*market_h0);
    }
    block.garch = read_garch(obj, where);
    return block;
}

// Members that are alternatives to each other, keyed by section.
const std::map<std::string, std::vector<std::vector<std::string>>>& alternatives() {
    static const std::map<std::string, std::vector<std::vector<std::string>>> table = {
        {"market", {{"h0", "h0_annual", "total_h0", "total_h0_annual"},
                    {"initial_log_price", "initial_price"}}},
        {"stock", {{"h0", "h0_annual", "total_h0", "total_h0_annual"},
                    {"initial_log_price", "initial_price"}}},
        {"firm", {{"h0", "h0_annual", "total_h0", "total_h0_annual"},
                    {"initial_log_price", "initial_price"}}},
        {"contract", {{"r", "r_annual"}, {"maturity_steps", "maturity_years"}}},
    };
    return table;
}

}  // namespace

HybridModelConfig config_from_json(const json& doc) {
    HybridModelConfig config;
    try {
        const json& grid = section(doc, "grid");
        const double spy = number(grid, "grid", "steps_per_year");
        if (!(spy >= 1.0) || std::floor(spy) != spy) {
            throw ConfigError("config: grid.steps_per_year must be a positive integer");
        }
        config.steps_per_year = static_cast<int>(spy);

        config.market = read_block(section(doc, "market"), "market", 1.0, nullptr,
                                   config.steps_per_year);
        config.stock = read_block(section(doc, "stock"), "stock", 1.0, &config.market.h0,
                                  config.steps_per_year);
        config.firm = read_block(section(doc, "firm"), "firm", 1.0, &config.market.h0,
                                  config.steps_per_year);

        const json& in = section(doc, "intensity");
        config.intensity.w_lambda = number(in, "intensity", "w_lambda");
        config.intensity.b_lambda = number(in, "intensity", "b_lambda");
        config.intensity.a_lambda = number(in, "intensity", "a_lambda");
        config.intensity.c_lambda = number(in, "intensity", "c_lambda");
        config.intensity.lambda0 = number(in, "intensity", "lambda0");

        const json& k = section(doc, "contract");
        if (k.contains("r")) {
            config.contract.r = number(k, "contract", "r");
        } else {
            config.contract.r = number(k, "contract", "r_annual") / config.steps_per_year;
        }
        config.contract.strike = number(k, "contract", "strike");
        if (k.contains("maturity_steps")) {
            const double steps = number(k, "contract", "maturity_steps");
            if (std::floor(steps) != steps) {
                throw ConfigError("config: contract.maturity_steps must be an integer");
            }
            config.contract.maturity_steps = static_cast<int>(steps);
        } else {
            const double years = number(k, "contract", "maturity_years");
            config.contract.maturity_steps =
                static_cast<int>(std::lround(years * config.steps_per_year));
        }
        config.contract.alpha = number(k, "contract", "alpha");
        config.contract.lgd = number(k, "contract", "lgd");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse config file '" + path + "': " + e.what());
    }
}

HybridModelConfig load_config(const std::string& path) {
    return config_from_json(load_json_file(path));
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not of the form path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }

    json* node = &doc;
    std::string parent;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("override path '" + path + "' has an empty component");
        if (dot == std::string::npos) {
            if (!node->is_object()) *node = json::object();
            auto alt = alternatives().find(parent);
            if (alt != alternatives().end()) {
                for (const auto& group : alt->second) {
                    bool in_group = false;
                    for (const auto& name : group) in_group = in_group || name == key;
                    if (!in_group) continue;
                    for (const auto& name : group) {
                        if (name != key) node->erase(name);
                    }
                }
            }
            (*node)[key] = value;
            return;
        }
        if (!node->is_object()) *node = json::object();
        node = &(*node)[key];
        parent = key;
        start = dot + 1;
    }
}

json config_to_json(const HybridModelConfig& config) {
    auto block = [](const AssetBlock& b) {
        return json{{"initial_log_price", b.initial_log_price},
                    {"beta", b.beta},
                    {"h0", b.h0},
                    {"w", b.garch.w},
                    {"b", b.garch.b},
                    {"a", b.garch.a},
                    {"c", b.garch.c}};
    };
    return json{
        {"market", block(config.market)},
        {"stock", block(config.stock)},
        {"firm", block(config.firm)},
        {"intensity",
         {{"w_lambda", config.intensity.w_lambda},
          {"b_lambda", config.intensity.b_lambda},
          {"a_lambda", config.intensity.a_lambda},
          {"c_lambda", config.intensity.c_lambda},
          {"lambda0", config.intensity.lambda0}}},
        {"contract",
         {{"r", config.contract.r},
          {"strike", config.contract.strike},
          {"maturity_steps", config.contract.maturity_steps},
          {"alpha", config.contract.alpha},
          {"lgd", config.contract.lgd}}},
        {"grid", {{"steps_per_year", config.steps_per_year}}},
    };
}

QuadratureSpec quadrature_from_json(const json& doc) {
    QuadratureSpec spec;
    if (!doc.is_object() || !doc.contains("quadrature")) return spec;
    const json& q = doc.at("quadrature");
    if (!q.is_object()) throw ConfigError("config: 'quadrature' must be an object");
    spec.phi_max = number_or(q, "phi_max", spec.phi_max);
    spec.abs_tol = number_or(q, "abs_tol", spec.abs_tol);
    spec.rel_tol = number_or(q, "rel_tol", spec.rel_tol);
    const double panels = number_or(q, "panels", spec.panels);
    const double nodes = number_or(q, "nodes_per_panel", spec.nodes_per_panel);
    if (std::floor(panels) != panels || std::floor(nodes) != nodes) {
        throw ConfigError("config: quadrature.panels and nodes_per_panel must be integers");
    }
    spec.panels = static_cast<int>(panels);
    spec.nodes_per_panel = static_cast<int>(nodes);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return spec;
}

}  // namespace vulnopt
