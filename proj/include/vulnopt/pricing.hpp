#pragma once

// Default-free, hybrid and reduced-form prices of a European call, the
// survival curve and the default premium.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vulnopt/inversion.hpp"
#include "vulnopt/model.hpp"

namespace vulnopt {

enum class PriceMode { default_free, hybrid, reduced };

const char* to_string(PriceMode mode);
PriceMode parse_price_mode(const std::string& text);

struct PriceValue {
    double value = 0.0;
    double error = 0.0;
    std::vector<std::string> warnings;
};

// Per trigger period: Pi_{j,1..8} in hybrid mode, (Pibar_{j,1}, Pibar_{j,2})
// in the first two slots in reduced mode. Values are undiscounted.
struct PeriodTerms {
    int j = 0;
    int count = 0;
    std::array<double, 8> pi{};
    std::array<double, 8> error{};
    double contribution = 0.0;  // discounted change of the price from this period
    double contribution_error = 0.0;
};

struct PriceBreakdown {
    PriceMode mode = PriceMode::default_free;
    double default_free = 0.0;
    double default_free_error = 0.0;
    std::vector<PeriodTerms> per_j_terms;
    double cva = 0.0;
    double final_price = 0.0;
    double raw_final = 0.0;  // before the small-negative clamp
    double quadrature_error = 0.0;
    std::vector<std::string> warnings;
};

// Called after each trigger period with (j, T).
using ProgressFn = std::function<void(int, int)>;

PriceValue default_free_price(const HybridModelConfig& config, const QuadratureSpec& spec);
PriceValue default_free_price(PiEngine& engine);

PriceBreakdown hybrid_price(const HybridModelConfig& config, const QuadratureSpec& spec,
                            const ProgressFn& progress = {});

PriceBreakdown reduced_form_price(const HybridModelConfig& config, const QuadratureSpec& spec,
                                  const ProgressFn& progress = {});

PriceBreakdown price(const HybridModelConfig& config, const QuadratureSpec& spec, PriceMode mode,
                     const ProgressFn& progress = {});

// P(tau > j) = E[exp(-sum_{k<=j} Lambda(k))]. j may exceed the contract
// maturity; the survival probability does not depend on it.
double survival_probability(const HybridModelConfig& config, int j);

// survival_probability for j = 1..horizon.
std::vector<double> survival_curve(const HybridModelConfig& config, int horizon);

// default_free - final for a vulnerable mode.
PriceValue default_premium(const HybridModelConfig& config, const QuadratureSpec& spec,
                           PriceMode mode);

}  // namespace vulnopt
