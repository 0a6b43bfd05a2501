#pragma once

#include <string>
#include <vector>

namespace vulnopt {

// One Heston-Nandi variance recursion:
//   h(t+1) = w + b h(t) + a (Z(t) - c sqrt(h(t)))^2
struct GarchParams {
    double w = 0.0;  // variance drift, per-step variance units
    double b = 0.0;  // persistence
    double a = 0.0;  // noise loading, per-step variance units
    double c = 0.0;  // asymmetry, inverse volatility units

    double persistence() const { return b + a * c * c; }
};

// Cox-process intensity recursion:
//   Lambda(t+1) = w + b Lambda(t) + a Z_m(t)^2 + c Z_v(t)^2
struct IntensityParams {
    double w_lambda = 0.0;
    double b_lambda = 0.0;
    double a_lambda = 0.0;  // systematic shock loading
    double c_lambda = 0.0;  // idiosyncratic (issuer) shock loading
    double lambda0 = 0.0;   // Lambda(1)
};

struct AssetBlock {
    double initial_log_price = 0.0;
    double beta = 1.0;  // systematic loading; identically 1 for the index
    double h0 = 0.0;    // h(1), the variance of the first period's return
    GarchParams garch;
};

struct ContractTerms {
    double r = 0.0;  // continuously compounded, per step
    double strike = 1.0;
    int maturity_steps = 1;
    double alpha = 0.0;  // recovery rate
    double lgd = 1.0;    // asset threshold L, same units as V
};

struct HybridModelConfig {
    AssetBlock market;
    AssetBlock stock;
    AssetBlock firm;
    IntensityParams intensity;
    ContractTerms contract;
    int steps_per_year = 252;  // labelling only; all dynamics are per step
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const HybridModelConfig& config);

// Joint state after t periods. Variances and lambda_next are already known
// at t (they are predictable), cum_lambda covers Lambda(1..t).
struct PathState {
    double log_m = 0.0;
    double log_s = 0.0;
    double log_v = 0.0;
    double h_m = 0.0;  // h_m(t+1)
    double h_s = 0.0;
    double h_v = 0.0;
    double lambda_next = 0.0;  // Lambda(t+1)
    double cum_lambda = 0.0;   // sum_{k=1..t} Lambda(k)
    int t = 0;
};

PathState initial_state(const HybridModelConfig& config);

// Advances one period using the period-(t+1) shocks. Lambda(t+2) is driven
// by the same z_m, z_v that move the period-(t+1) returns.
PathState step(const PathState& state, double z_m, double z_s, double z_v,
               const HybridModelConfig& config);

// Conditional correlation of one-step log returns of S and V given the
// predictable variances of the coming period.
double return_correlation(const HybridModelConfig& config, double h_m, double h_s,
                          double h_v);

}  // namespace vulnopt
