#include "vulnopt/model.hpp"

#include <cmath>
#include <sstream>

namespace vulnopt {

namespace {

void check_finite(ValidationReport& report, const std::string& name, double value) {
    if (!std::isfinite(value)) report.violations.push_back(name + " is not finite");
}

void check_nonnegative(ValidationReport& report, const std::string& name, double value) {
    check_finite(report, name, value);
    if (value < 0.0) {
        std::ostringstream msg;
        msg << name << " = " << value << " must be >= 0";
        report.violations.push_back(msg.str());
    }
}

void check_block(ValidationReport& report, const std::string& name, const AssetBlock& block) {
    check_finite(report, name + ".initial_log_price", block.initial_log_price);
    check_finite(report, name + ".beta", block.beta);
    // h0 == 0 is the degenerate (shock-free) block; only negative values are invalid.
    check_nonnegative(report, name + ".h0", block.h0);
    check_nonnegative(report, name + ".w", block.garch.w);
    check_nonnegative(report, name + ".b", block.garch.b);
    check_nonnegative(report, name + ".a", block.garch.a);
    check_finite(report, name + ".c", block.garch.c);

    const double persistence = block.garch.persistence();
    if (std::isfinite(persistence) && persistence >= 1.0) {
        std::ostringstream msg;
        msg << name << ": b + a*c^2 = " << persistence << " >= 1 (variance not stationary)";
        report.warnings.push_back(msg.str());
    }
}

}  // namespace

ValidationReport validate_config(const HybridModelConfig& config) {
    ValidationReport report;
    check_block(report, "market", config.market);
    check_block(report, "stock", config.stock);
    check_block(report, "firm", config.firm);
    if (config.market.beta != 1.0) {
        report.violations.push_back("market.beta must be 1 (the index loads on its own shock)");
    }

    const auto& in = config.intensity;
    check_nonnegative(report, "intensity.w_lambda", in.w_lambda);
    check_nonnegative(report, "intensity.b_lambda", in.b_lambda);
    check_nonnegative(report, "intensity.a_lambda", in.a_lambda);
    check_nonnegative(report, "intensity.c_lambda", in.c_lambda);
    check_nonnegative(report, "intensity.lambda0", in.lambda0);

    const auto& k = config.contract;
    check_finite(report, "contract.r", k.r);
    if (!(k.alpha >= 0.0 && k.alpha <= 1.0)) {
        std::ostringstream msg;
        msg << "contract.alpha = " << k.alpha << " outside the recovery-rate range [0, 1]";
        report.violations.push_back(msg.str());
    }
    if (!(k.strike > 0.0) || !std::isfinite(k.strike)) {
        report.violations.push_back("contract.strike must be > 0");
    }
    if (!(k.lgd > 0.0) || !std::isfinite(k.lgd)) {
        report.violations.push_back("contract.lgd must be > 0");
    }
    if (k.maturity_steps < 1) report.violations.push_back("contract.maturity_steps must be >= 1");
    if (config.steps_per_year < 1) report.violations.push_back("grid.steps_per_year must be >= 1");
    return report;
}

PathState initial_state(const HybridModelConfig& config) {
    PathState s;
    s.log_m = config.market.initial_log_price;
    s.log_s = config.stock.initial_log_price;
    s.log_v = config.firm.initial_log_price;
    s.h_m = config.market.h0;
    s.h_s = config.stock.h0;
    s.h_v = config.firm.h0;
    s.lambda_next = config.intensity.lambda0;
    s.cum_lambda = 0.0;
    s.t = 0;
    return s;
}

namespace {

inline double next_variance(const GarchParams& g, double h, double z) {
    const double innovation = z - g.c * std::sqrt(h);
    return g.w + g.b * h + g.a * innovation * innovation;
}

}  // namespace

PathState step(const PathState& state, double z_m, double z_s, double z_v,
               const HybridModelConfig& config) {
    const double r = config.contract.r;
    const double beta_s = config.stock.beta;
    const double beta_v = config.firm.beta;
    const double sq_m = std::sqrt(state.h_m);
    const double sq_s = std::sqrt(state.h_s);
    const double sq_v = std::sqrt(state.h_v);
    const double systematic_s = -0.5 * beta_s * beta_s * state.h_m + beta_s * sq_m * z_m;
    const double systematic_v = -0.5 * beta_v * beta_v * state.h_m + beta_v * sq_m * z_m;

    PathState next;
    next.log_m = state.log_m + r - 0.5 * state.h_m + sq_m * z_m;
    next.log_s = state.log_s + r - 0.5 * state.h_s + sq_s * z_s + systematic_s;
    next.log_v = state.log_v + r - 0.5 * state.h_v + sq_v * z_v + systematic_v;
    next.h_m = next_variance(config.market.garch, state.h_m, z_m);
    next.h_s = next_variance(config.stock.garch, state.h_s, z_s);
    next.h_v = next_variance(config.firm.garch, state.h_v, z_v);

    const auto& in = config.intensity;
    next.cum_lambda = state.cum_lambda + state.lambda_next;
    next.lambda_next = in.w_lambda + in.b_lambda * state.lambda_next + in.a_lambda * z_m * z_m +
                       in.c_lambda * z_v * z_v;
    next.t = state.t + 1;
    return next;
}

double return_correlation(const HybridModelConfig& config, double h_m, double h_s, double h_v) {
    const double bs = config.stock.beta;
    const double bv = config.firm.beta;
    const double denom = std::sqrt(h_s + bs * bs * h_m) * std::sqrt(h_v + bv * bv * h_m);
    if (denom == 0.0) return 0.0;
    return bs * bv * h_m / denom;
}

}  // namespace vulnopt
