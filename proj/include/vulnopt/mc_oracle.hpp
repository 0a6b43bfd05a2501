#pragma once

// Monte Carlo estimators of every expectation the closed form computes.
//
// Paths are driven by model step() only. Shocks come from a Philox4x32-10
// stream keyed by the seed and addressed by (path, step, channel), so any
// path can be regenerated alone and results do not depend on the number of
// workers. Paths are processed in fixed blocks whose statistics are merged
// in block order.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vulnopt/genfun.hpp"
#include "vulnopt/inversion.hpp"
#include "vulnopt/model.hpp"

namespace vulnopt {

// Philox4x32-10 counter-based generator.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key);

    // Four standard normals (two Box-Muller pairs) for (seed, path, step, channel).
    static std::array<double, 4> normals(std::uint64_t seed, std::uint64_t path,
                                         std::uint32_t step, std::uint32_t channel);
    // Two uniforms on (0, 1) with 53-bit resolution.
    static std::array<double, 2> uniforms(std::uint64_t seed, std::uint64_t path,
                                          std::uint32_t step, std::uint32_t channel);
};

enum class ShockSource {
    philox,
    zero,  // every shock 0: the deterministic zero-shock recursion (test hook)
};

enum class HybridMode { survival_weighted, tau_sampled };

const char* to_string(HybridMode mode);

struct McOptions {
    std::uint64_t seed = 20240601;
    std::int64_t n_paths = 1'000'000;
    bool antithetic = false;  // pairs (z, -z) averaged into one sample
    int workers = 0;          // 0: hardware concurrency
    ShockSource shocks = ShockSource::philox;
};

// One simulated path. Index j runs 0..T; entry 0 is the initial state.
struct PathRecord {
    double log_s_T = 0.0;
    std::vector<double> log_v;   // ln V(j)
    std::vector<double> lambda;  // Lambda(j); lambda[0] unused
    std::vector<double> cum;     // sum_{k<=j} Lambda(k)
    int tau = 0;                 // first default period, T + 1 if none (tau-sampled paths only)
};

// Generates path `index` (the antithetic partner flips every normal and
// reflects the default uniforms). tau is drawn only when `draw_tau` is set.
void simulate_path(const HybridModelConfig& config, const McOptions& options,
                   std::uint64_t index, bool antithetic_partner, bool draw_tau,
                   PathRecord& out);

// Records for paths 0..n_paths-1 (no antithetics), in path order.
std::vector<PathRecord> simulate_batch(const HybridModelConfig& config, std::int64_t n_paths,
                                       std::uint64_t seed,
                                       ShockSource shocks = ShockSource::philox,
                                       bool draw_tau = false);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    HybridMode mode = HybridMode::survival_weighted;
};

struct McComplexEstimate {
    Complex mean;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    bool overflow = false;  // some sample exponent exceeded the safety bound
};

// A real-valued function of one path; evaluated on every sample.
using PathFunctional = std::function<double(const PathRecord&)>;

// Sample means of several functionals from one pass over the paths.
// With antithetics each sample is the average over a (z, -z) pair and the
// standard error is computed over pairs.
std::vector<McEstimate> mc_expectations(const HybridModelConfig& config,
                                        const std::vector<PathFunctional>& functionals,
                                        const McOptions& options, bool draw_tau = false);

// Payoff functionals, shared by the single-quantity estimators and batch runs.
PathFunctional default_free_payoff(const HybridModelConfig& config);
PathFunctional hybrid_payoff(const HybridModelConfig& config, HybridMode mode);
PathFunctional reduced_payoff(const HybridModelConfig& config, HybridMode mode);
PathFunctional survival_weight(int j);
PathFunctional pi_integrand(const HybridModelConfig& config, const PiRequest& request);
// Real (part = 0) or imaginary (part = 1) component of the generating-function sample.
PathFunctional genfun_sample(const PhiVector& phi, int part);

McComplexEstimate mc_genfun(const HybridModelConfig& config, const PhiVector& phi,
                            const McOptions& options);
McEstimate mc_pi(const HybridModelConfig& config, const PiRequest& request,
                 const McOptions& options);
McEstimate mc_default_free(const HybridModelConfig& config, const McOptions& options);
McEstimate mc_price_hybrid(const HybridModelConfig& config, const McOptions& options,
                           HybridMode mode = HybridMode::survival_weighted);
McEstimate mc_price_reduced(const HybridModelConfig& config, const McOptions& options,
                            HybridMode mode = HybridMode::survival_weighted);
McEstimate mc_survival(const HybridModelConfig& config, int j, const McOptions& options);

// Exponent real part above which a generating-function sample counts as overflowing.
inline constexpr double kGenfunExponentBound = 700.0;

}  // namespace vulnopt
