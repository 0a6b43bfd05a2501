#include "vulnopt/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace vulnopt {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

Philox4x32::Counter counter_for(std::uint64_t path, std::uint32_t step, std::uint32_t channel) {
    return {static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), step,
            channel};
}

Philox4x32::Key key_for(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// (0, 1), never 0 so the Box-Muller log is finite.
inline double unit32(std::uint32_t x) { return (static_cast<double>(x) + 0.5) * 0x1p-32; }

inline double unit53(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(a) << 21) ^ (b >> 11);
    return (static_cast<double>(bits) + 0.5) * 0x1p-53;
}

constexpr int kBlockSamples = 2048;

struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * (o.n / total);
        m2 += o.m2 + d * d * (n * o.n / total);
        n = total;
    }
};

double discount(const HybridModelConfig& config) {
    return std::exp(-config.contract.r * config.contract.maturity_steps);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

std::array<double, 4> Philox4x32::normals(std::uint64_t seed, std::uint64_t path,
                                          std::uint32_t step, std::uint32_t channel) {
    const Counter x = block(counter_for(path, step, channel), key_for(seed));
    std::array<double, 4> z;
    for (int p = 0; p < 2; ++p) {
        const double radius = std::sqrt(-2.0 * std::log(unit32(x[2 * p])));
        const double angle = 2.0 * std::numbers::pi * unit32(x[2 * p + 1]);
        z[2 * p] = radius * std::cos(angle);
        z[2 * p + 1] = radius * std::sin(angle);
    }
    return z;
}

std::array<double, 2> Philox4x32::uniforms(std::uint64_t seed, std::uint64_t path,
                                           std::uint32_t step, std::uint32_t channel) {
    const Counter x = block(counter_for(path, step, channel), key_for(seed));
    return {unit53(x[0], x[1]), unit53(x[2], x[3])};
}

const char* to_string(HybridMode mode) {
    return mode == HybridMode::tau_sampled ? "tau_sampled" : "survival_weighted";
}

void simulate_path(const HybridModelConfig& config, const McOptions& options,
                   std::uint64_t index, bool antithetic_partner, bool draw_tau,
                   PathRecord& out) {
    const int T = config.contract.maturity_steps;
    out.log_v.resize(T + 1);
    out.lambda.assign(T + 1, 0.0);
    out.cum.resize(T + 1);
    out.tau = T + 1;

    const bool zero = options.shocks == ShockSource::zero;
    const double sign = antithetic_partner ? -1.0 : 1.0;
    PathState s = initial_state(config);
    out.log_v[0] = s.log_v;
    out.cum[0] = 0.0;
    for (int t = 1; t <= T; ++t) {
        std::array<double, 4> z{};
        if (!zero) z = Philox4x32::normals(options.seed, index, t, 0);
        out.lambda[t] = s.lambda_next;
        s = step(s, sign * z[0], sign * z[1], sign * z[2], config);
        out.log_v[t] = s.log_v;
        out.cum[t] = s.cum_lambda;
        if (draw_tau && out.tau > T) {
            double u = zero ? 0.5 : Philox4x32::uniforms(options.seed, index, t, 1)[0];
            if (antithetic_partner) u = 1.0 - u;
            if (u > std::exp(-out.lambda[t])) out.tau = t;
        }
    }
    out.log_s_T = s.log_s;
}

std::vector<PathRecord> simulate_batch(const HybridModelConfig& config, std::int64_t n_paths,
                                       std::uint64_t seed, ShockSource shocks, bool draw_tau) {
    McOptions options;
    options.seed = seed;
    options.n_paths = n_paths;
    options.shocks = shocks;
    std::vector<PathRecord> out(static_cast<std::size_t>(std::max<std::int64_t>(n_paths, 0)));
    for (std::int64_t p = 0; p < n_paths; ++p) {
        simulate_path(config, options, static_cast<std::uint64_t>(p), false, draw_tau, out[p]);
    }
    return out;
}

std::vector<McEstimate> mc_expectations(const HybridModelConfig& config,
                                        const std::vector<PathFunctional>& functionals,
                                        const McOptions& options, bool draw_tau) {
    if (options.antithetic && options.n_paths % 2 != 0) {
        throw std::invalid_argument("antithetic sampling needs an even number of paths");
    }
    const std::int64_t samples = options.antithetic ? options.n_paths / 2 : options.n_paths;
    if (samples < 2) throw std::invalid_argument("Monte Carlo needs at least 2 samples");

    const std::size_t nf = functionals.size();
    const std::int64_t blocks = (samples + kBlockSamples - 1) / kBlockSamples;
    std::vector<std::vector<Moments>> partial(blocks, std::vector<Moments>(nf));

    std::atomic<std::int64_t> next{0};
    auto work = [&] {
        PathRecord rec;
        PathRecord partner;
        std::vector<double> values(nf);
        for (std::int64_t b = next++; b < blocks; b = next++) {
            auto& acc = partial[b];
            const std::int64_t end = std::min(samples, (b + 1) * kBlockSamples);
            for (std::int64_t s = b * kBlockSamples; s < end; ++s) {
                const auto index = static_cast<std::uint64_t>(s);
                simulate_path(config, options, index, false, draw_tau, rec);
                for (std::size_t f = 0; f < nf; ++f) values[f] = functionals[f](rec);
                if (options.antithetic) {
                    simulate_path(config, options, index, true, draw_tau, partner);
                    for (std::size_t f = 0; f < nf; ++f) {
                        values[f] = 0.5 * (values[f] + functionals[f](partner));
                    }
                }
                for (std::size_t f = 0; f < nf; ++f) acc[f].add(values[f]);
            }
        }
    };

    int workers = options.workers > 0 ? options.workers
                                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = static_cast<int>(std::clamp<std::int64_t>(workers, 1, blocks));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::vector<McEstimate> out(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        Moments total;
        for (const auto& block : partial) total.merge(block[f]);
        out[f].mean = total.mean;
        out[f].std_error = std::sqrt(std::max(total.m2, 0.0) / (total.n - 1.0) / total.n);
        out[f].n_paths = options.n_paths;
        out[f].seed = options.seed;
    }
    return out;
}

PathFunctional default_free_payoff(const HybridModelConfig& config) {
    const double df = discount(config);
    const double K = config.contract.strike;
    return [=](const PathRecord& p) { return df * std::max(std::exp(p.log_s_T) - K, 0.0); };
}

PathFunctional hybrid_payoff(const HybridModelConfig& config, HybridMode mode) {
    const double df = discount(config);
    const double K = config.contract.strike;
    const double alpha = config.contract.alpha;
    const double L = config.contract.lgd;
    const double log_L = std::log(L);
    const int T = config.contract.maturity_steps;
    if (mode == HybridMode::tau_sampled) {
        return [=](const PathRecord& p) {
            const double payoff = std::max(std::exp(p.log_s_T) - K, 0.0);
            if (p.tau <= T && p.log_v[p.tau] < log_L) {
                return df * payoff * alpha * std::exp(p.log_v[p.tau]) / L;
            }
            return df * payoff;
        };
    }
    return [=](const PathRecord& p) {
        const double payoff = std::max(std::exp(p.log_s_T) - K, 0.0);
        if (payoff == 0.0) return 0.0;
        // Loss weight: sum_j P(j-1 < tau <= j | path) 1{V(j) < L} (1 - alpha V(j)/L).
        double loss = 0.0;
        double survive_before = 1.0;
        for (int j = 1; j <= T; ++j) {
            const double survive = std::exp(-p.cum[j]);
            if (p.log_v[j] < log_L) {
                loss += (survive_before - survive) * (1.0 - alpha * std::exp(p.log_v[j]) / L);
            }
            survive_before = survive;
        }
        return df * payoff * (1.0 - loss);
    };
}

PathFunctional reduced_payoff(const HybridModelConfig& config, HybridMode mode) {
    const double df = discount(config);
    const double K = config.contract.strike;
    const double alpha = config.contract.alpha;
    const int T = config.contract.maturity_steps;
    if (mode == HybridMode::tau_sampled) {
        return [=](const PathRecord& p) {
            const double payoff = std::max(std::exp(p.log_s_T) - K, 0.0);
            return df * payoff * (p.tau <= T ? alpha : 1.0);
        };
    }
    return [=](const PathRecord& p) {
        const double payoff = std::max(std::exp(p.log_s_T) - K, 0.0);
        return df * payoff * (1.0 - (1.0 - alpha) * -std::expm1(-p.cum[T]));
    };
}

PathFunctional survival_weight(int j) {
    return [=](const PathRecord& p) { return std::exp(-p.cum.at(j)); };
}

PathFunctional pi_integrand(const HybridModelConfig& config, const PiRequest& request) {
    const double log_K = std::log(config.contract.strike);
    const double log_L = std::log(config.contract.lgd);
    const PiWeights w = request.weights;
    const int j = request.j;
    if (j < 1 || j > config.contract.maturity_steps) {
        throw std::invalid_argument("pi_integrand: need 1 <= j <= T");
    }
    return [=](const PathRecord& p) {
        if (p.log_s_T < log_K || !(p.log_v[j] < log_L)) return 0.0;
        return std::exp(w.lambda_j * p.lambda[j] + w.lambda_before * p.cum[j - 1] +
                        w.s_power * p.log_s_T + w.v_power * p.log_v[j]);
    };
}

namespace {

Complex genfun_exponent(const PhiVector& phi, const PathRecord& p) {
    return phi.phi1 * p.log_s_T + phi.phi2 * p.log_v[phi.j] + phi.phi3 * p.lambda[phi.j] +
           phi.phi4 * p.cum[phi.j - 1];
}

}  // namespace

PathFunctional genfun_sample(const PhiVector& phi, int part) {
    return [=](const PathRecord& p) {
        const Complex e = genfun_exponent(phi, p);
        if (e.real() > kGenfunExponentBound) return 0.0;
        const Complex v = std::exp(e);
        return part == 0 ? v.real() : v.imag();
    };
}

McComplexEstimate mc_genfun(const HybridModelConfig& config, const PhiVector& phi,
                            const McOptions& options) {
    if (phi.T != config.contract.maturity_steps || phi.j < 1 || phi.j > phi.T) {
        throw std::invalid_argument("mc_genfun: phi.T must equal the config maturity, 1 <= j <= T");
    }
    const PathFunctional overflow = [=](const PathRecord& p) {
        return genfun_exponent(phi, p).real() > kGenfunExponentBound ? 1.0 : 0.0;
    };
    const auto est =
        mc_expectations(config, {genfun_sample(phi, 0), genfun_sample(phi, 1), overflow}, options);
    McComplexEstimate out;
    out.mean = Complex(est[0].mean, est[1].mean);
    out.std_error_re = est[0].std_error;
    out.std_error_im = est[1].std_error;
    out.n_paths = options.n_paths;
    out.seed = options.seed;
    out.overflow = est[2].mean > 0.0;
    return out;
}

McEstimate mc_pi(const HybridModelConfig& config, const PiRequest& request,
                 const McOptions& options) {
    return mc_expectations(config, {pi_integrand(config, request)}, options)[0];
}

McEstimate mc_default_free(const HybridModelConfig& config, const McOptions& options) {
    return mc_expectations(config, {default_free_payoff(config)}, options)[0];
}

McEstimate mc_price_hybrid(const HybridModelConfig& config, const McOptions& options,
                           HybridMode mode) {
    McEstimate e = mc_expectations(config, {hybrid_payoff(config, mode)}, options,
                                   mode == HybridMode::tau_sampled)[0];
    e.mode = mode;
    return e;
}

McEstimate mc_price_reduced(const HybridModelConfig& config, const McOptions& options,
                            HybridMode mode) {
    McEstimate e = mc_expectations(config, {reduced_payoff(config, mode)}, options,
                                   mode == HybridMode::tau_sampled)[0];
    e.mode = mode;
    return e;
}

McEstimate mc_survival(const HybridModelConfig& config, int j, const McOptions& options) {
    if (j < 1) throw std::invalid_argument("mc_survival: need j >= 1");
    HybridModelConfig c = config;
    c.contract.maturity_steps = std::max(c.contract.maturity_steps, j);
    return mc_expectations(c, {survival_weight(j)}, options)[0];
}

}  // namespace vulnopt
