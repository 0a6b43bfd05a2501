#pragma once

// Batch front end: pricing, parameter sweeps, Monte Carlo validation and
// survival reports, written as LF-terminated CSV.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "vulnopt/inversion.hpp"
#include "vulnopt/mc_oracle.hpp"
#include "vulnopt/model.hpp"
#include "vulnopt/pricing.hpp"

namespace vulnopt {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitValidation = 4,
};

// ---------------------------------------------------------------------------
// Sweeps.

enum class SweepParameter { maturity_years, strike, beta_s, beta_v, alpha, lgd };

const char* to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(const std::string& text);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::strike;
    std::vector<double> values;
    std::vector<PriceMode> modes = {PriceMode::default_free, PriceMode::hybrid, PriceMode::reduced};
};

// Returns `config` with one parameter replaced. Betas change the systematic
// loading only; the idiosyncratic variances stay as parsed.
HybridModelConfig with_parameter(const HybridModelConfig& config, SweepParameter p, double value);

struct SweepRow {
    double value = 0.0;
    double default_free = 0.0;
    double default_free_error = 0.0;
    PriceBreakdown hybrid;
    PriceBreakdown reduced;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by value
    bool partial = false;        // a row failed; rows holds the ones before it
    std::string failure;
};

SweepResult run_sweep(const HybridModelConfig& config, const QuadratureSpec& spec,
                      const SweepSpec& sweep);
std::string sweep_csv(const SweepSpec& sweep, const SweepResult& result);

// ---------------------------------------------------------------------------
// Monte Carlo validation.

enum class CompareStatus { pass, fail, low_power };

const char* to_string(CompareStatus s);

struct Comparison {
    std::string quantity;
    int j = 0;  // 0 when not tied to a trigger period
    double closed_form = 0.0;
    double closed_form_error = 0.0;
    double mc_mean = 0.0;
    double mc_std_error = 0.0;
    double z = 0.0;  // (closed - mc) / joint SE
    CompareStatus status = CompareStatus::pass;
};

// A comparison passes when |closed - mc| <= 4 sqrt(se^2 + err^2). It is
// LOW_POWER when n_paths < kMinPowerPaths or the 4-SE band is wider than
// kMaxRelativeBand of the compared magnitude.
inline constexpr std::int64_t kMinPowerPaths = 1000;
inline constexpr double kMaxRelativeBand = 0.25;

Comparison compare(std::string quantity, int j, double closed_form, double closed_form_error,
                   const McEstimate& mc);

struct ValidationOptions {
    McOptions mc;
    bool genfun = true;
    bool pi = true;
    bool prices = true;
    bool survival = true;
    bool telescoping = true;  // tau-sampled minus survival-weighted hybrid
};

// Trigger periods checked for Pi terms and survival: T/4, T/2, T (distinct, >= 1).
std::vector<int> validation_periods(int T);

std::vector<Comparison> run_validation(const HybridModelConfig& config,
                                       const QuadratureSpec& spec,
                                       const ValidationOptions& options,
                                       std::ostream* log = nullptr);
std::string validation_csv(const std::vector<Comparison>& rows);

// ---------------------------------------------------------------------------
// Survival.

struct SurvivalReference {
    double years;
    double cumulative_default;  // fraction
};

// Average cumulative default rates of B-rated corporate bonds at 1, 3, 5, 7 years.
const std::vector<SurvivalReference>& rating_b_reference();

std::string survival_csv(const std::vector<double>& curve);

// ---------------------------------------------------------------------------
// Command line.

// Formats a double deterministically ("%.12g").
std::string format_number(double v);

// Config file plus --set overrides, parsed into model and quadrature settings.
struct LoadedConfig {
    nlohmann::json doc;
    HybridModelConfig model;
    QuadratureSpec quadrature;
};
LoadedConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vulnopt
