#include "vulnopt/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vulnopt/genfun.hpp"

namespace vulnopt {

namespace {

constexpr Complex kI(0.0, 1.0);

std::string describe(const char* text, double a) {
    std::ostringstream os;
    os.precision(6);
    os << text << a;
    return os.str();
}

// Repeated per-period diagnostics, collapsed to one line each.
class PeriodWarnings {
public:
    void add(const std::vector<std::string>& from, int j) {
        for (const auto& w : from) {
            auto it = std::find_if(seen_.begin(), seen_.end(),
                                   [&](const Seen& s) { return s.text == w; });
            if (it == seen_.end()) {
                seen_.push_back({w, j, 1});
            } else {
                ++it->count;
            }
        }
    }
    void flush(std::vector<std::string>& to) const {
        for (const auto& s : seen_) {
            to.push_back(s.text + " (" + std::to_string(s.count) + " terms, first j=" +
                         std::to_string(s.first_j) + ")");
        }
    }

private:
    struct Seen {
        std::string text;
        int first_j;
        int count;
    };
    std::vector<Seen> seen_;
};

// E[S(T)^s 1{S(T) >= K}] = f(s) (1/2 + 1/pi int Re[e^{-iu ln K} f(s + iu)/f(s)/(iu)] du).
PriceValue call_leg(PiEngine& engine, int s) {
    const auto& config = engine.config();
    const double x = std::log(config.contract.strike);
    const Complex log_norm = engine.log_f(Complex(s, 0.0), 0.0, 0.0, 0.0, 1);
    auto h = [&](double u) {
        const Complex cf = std::exp(engine.log_f(Complex(s, u), 0.0, 0.0, 0.0, 1) - log_norm);
        return std::exp(-kI * (u * x)) * cf / (kI * u);
    };
    const AxisIntegral a =
        integrate_half_line(h, engine.spec(), std::numbers::pi * engine.spec().abs_tol);
    const double scale = std::exp(log_norm.real());
    const double value = scale * (0.5 + a.value / std::numbers::pi);
    const double error = scale * a.error / std::numbers::pi;
    const QuadratureSpec& spec = engine.spec();
    if (!std::isfinite(value) ||
        error > 10.0 * std::max(spec.abs_tol, spec.rel_tol * std::abs(value))) {
        throw QuadratureError(describe("call leg did not converge, error estimate ", error), error);
    }
    return {value, error, a.warnings};
}

double discount(const HybridModelConfig& config) {
    return std::exp(-config.contract.r * config.contract.maturity_steps);
}

void check_config(const HybridModelConfig& config) {
    const ValidationReport report = validate_config(config);
    if (!report.ok()) {
        std::string msg = "invalid config:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
}

// Clamps small negative prices and rejects large ones.
void finish(PriceBreakdown& out, const QuadratureSpec& spec) {
    out.final_price = out.default_free - out.cva;
    out.raw_final = out.final_price;
    const double tol = std::max(spec.abs_tol, out.quadrature_error);
    if (out.final_price < 0.0) {
        if (out.final_price < -10.0 * tol) {
            throw QuadratureError(describe("price is negative beyond tolerance: ", out.final_price),
                                  out.quadrature_error);
        }
        out.warnings.push_back(describe("small negative price clamped to 0: ", out.final_price));
        out.final_price = 0.0;
        out.cva = out.default_free;
    }
}

void flag_period_errors(PriceBreakdown& out, const QuadratureSpec& spec) {
    int flagged = 0;
    int first = 0;
    double running = out.default_free;
    for (const auto& t : out.per_j_terms) {
        running -= t.contribution;
        if (t.contribution_error > spec.rel_tol * std::abs(running)) {
            if (flagged++ == 0) first = t.j;
        }
    }
    if (flagged > 0) {
        out.warnings.push_back(std::to_string(flagged) +
                               " trigger periods have an error estimate above rel_tol of the "
                               "running total (first j=" +
                               std::to_string(first) + ")");
    }
}

}  // namespace

const char* to_string(PriceMode mode) {
    switch (mode) {
        case PriceMode::default_free: return "default_free";
        case PriceMode::hybrid: return "hybrid";
        case PriceMode::reduced: return "reduced";
    }
    return "?";
}

PriceMode parse_price_mode(const std::string& text) {
    if (text == "default_free" || text == "default-free") return PriceMode::default_free;
    if (text == "hybrid") return PriceMode::hybrid;
    if (text == "reduced" || text == "reduced_form") return PriceMode::reduced;
    throw std::invalid_argument("unknown price mode '" + text + "'");
}

PriceValue default_free_price(const HybridModelConfig& config, const QuadratureSpec& spec) {
    check_config(config);
    PiEngine engine(config, spec);
    return default_free_price(engine);
}

PriceValue default_free_price(PiEngine& engine) {
    const auto& config = engine.config();
    const double K = config.contract.strike;
    const double df = discount(config);
    const PriceValue s_leg = call_leg(engine, 1);
    const PriceValue k_leg = call_leg(engine, 0);
    PriceValue out;
    out.value = df * (s_leg.value - K * k_leg.value);
    out.error = df * (s_leg.error + K * k_leg.error);
    out.warnings = s_leg.warnings;
    out.warnings.insert(out.warnings.end(), k_leg.warnings.begin(), k_leg.warnings.end());
    const double tol = std::max(engine.spec().abs_tol, out.error);
    if (!std::isfinite(out.value) || out.value < -10.0 * tol) {
        throw QuadratureError(describe("default-free price failed: ", out.value), out.error);
    }
    if (out.value < 0.0) {
        out.warnings.push_back(describe("small negative price clamped to 0: ", out.value));
        out.value = 0.0;
    }
    return out;
}

PriceBreakdown hybrid_price(const HybridModelConfig& config, const QuadratureSpec& spec,
                            const ProgressFn& progress) {
    check_config(config);
    PiEngine engine(config, spec);
    PriceBreakdown out;
    out.mode = PriceMode::hybrid;
    const PriceValue df_price = default_free_price(engine);
    out.default_free = df_price.value;
    out.default_free_error = df_price.error;
    out.warnings = df_price.warnings;

    const int T = config.contract.maturity_steps;
    const double K = config.contract.strike;
    const double q = config.contract.alpha / config.contract.lgd;
    const double df = discount(config);
    // Per-kind coefficient in the period term:
    //   Pi1 - Pi3 - q Pi5 + q Pi7 - K (Pi2 - Pi4 - q Pi6 + q Pi8).
    const std::array<double, 8> coef = {1.0, -K, -1.0, K, -q, K * q, q, -K * q};

    double sum = 0.0;
    double err = 0.0;
    PeriodWarnings period_warnings;
    out.per_j_terms.reserve(T);
    for (int j = 1; j <= T; ++j) {
        PeriodTerms t;
        t.j = j;
        t.count = 8;
        double term = 0.0;
        double term_err = 0.0;
        for (int kind : {1, 2, 5, 6}) {
            auto [with_default, without] = engine.compute_pair(kind, j);
            const int k = kind - 1;
            t.pi[k] = with_default.value;
            t.error[k] = with_default.error;
            t.pi[k + 2] = without.value;
            t.error[k + 2] = without.error;
            period_warnings.add(with_default.warnings, j);
            period_warnings.add(without.warnings, j);
            term += coef[k] * with_default.value + coef[k + 2] * without.value;
            term_err += std::abs(coef[k]) * with_default.error +
                        std::abs(coef[k + 2]) * without.error;
        }
        t.contribution = -df * term;
        t.contribution_error = df * term_err;
        sum += term;
        err += term_err;
        out.per_j_terms.push_back(t);
        if (progress) progress(j, T);
    }
    out.cva = -df * sum;
    out.quadrature_error = out.default_free_error + df * err;
    period_warnings.flush(out.warnings);
    flag_period_errors(out, spec);
    finish(out, spec);
    return out;
}

PriceBreakdown reduced_form_price(const HybridModelConfig& config, const QuadratureSpec& spec,
                                  const ProgressFn& progress) {
    check_config(config);
    PiEngine engine(config, spec);
    PriceBreakdown out;
    out.mode = PriceMode::reduced;
    const PriceValue df_price = default_free_price(engine);
    out.default_free = df_price.value;
    out.default_free_error = df_price.error;
    out.warnings = df_price.warnings;

    const int T = config.contract.maturity_steps;
    const double loss = 1.0 - config.contract.alpha;
    const double df = discount(config);
    double sum = 0.0;
    double err = 0.0;
    PeriodWarnings period_warnings;
    out.per_j_terms.reserve(T);
    for (int j = 1; j <= T; ++j) {
        auto [before, after] = engine.compute_reduced_pair(j);
        PeriodTerms t;
        t.j = j;
        t.count = 2;
        t.pi[0] = before.value;
        t.error[0] = before.error;
        t.pi[1] = after.value;
        t.error[1] = after.error;
        period_warnings.add(before.warnings, j);
        period_warnings.add(after.warnings, j);
        const double gap = before.value - after.value;
        const double gap_err = before.error + after.error;
        t.contribution = df * loss * gap;
        t.contribution_error = df * std::abs(loss) * gap_err;
        sum += gap;
        err += gap_err;
        out.per_j_terms.push_back(t);
        if (progress) progress(j, T);
    }
    out.cva = df * loss * sum;
    out.quadrature_error = out.default_free_error + df * std::abs(loss) * err;
    period_warnings.flush(out.warnings);
    flag_period_errors(out, spec);
    finish(out, spec);
    return out;
}

PriceBreakdown price(const HybridModelConfig& config, const QuadratureSpec& spec, PriceMode mode,
                     const ProgressFn& progress) {
    switch (mode) {
        case PriceMode::hybrid: return hybrid_price(config, spec, progress);
        case PriceMode::reduced: return reduced_form_price(config, spec, progress);
        case PriceMode::default_free: break;
    }
    const PriceValue v = default_free_price(config, spec);
    PriceBreakdown out;
    out.mode = PriceMode::default_free;
    out.default_free = v.value;
    out.default_free_error = v.error;
    out.final_price = v.value;
    out.raw_final = v.value;
    out.quadrature_error = v.error;
    out.warnings = v.warnings;
    return out;
}

double survival_probability(const HybridModelConfig& config, int j) {
    if (j < 1) throw std::invalid_argument("survival_probability: need j >= 1");
    HybridModelConfig c = config;
    c.contract.maturity_steps = std::max(c.contract.maturity_steps, j);
    PhiVector phi{0.0, 0.0, -1.0, -1.0, j, c.contract.maturity_steps};
    const double s = std::exp(log_genfun(phi, c).real());
    if (!(s > 0.0 && s <= 1.0 + 1e-12)) {
        throw std::logic_error(describe("survival probability out of (0, 1]: ", s));
    }
    return std::min(s, 1.0);
}

std::vector<double> survival_curve(const HybridModelConfig& config, int horizon) {
    if (horizon < 1) throw std::invalid_argument("survival_curve: need horizon >= 1");
    HybridModelConfig c = config;
    c.contract.maturity_steps = std::max(c.contract.maturity_steps, horizon);
    const StockChain stock = make_stock_chain(0.0, c);
    const IssuerChain issuer = make_issuer_chain(0.0, -1.0, -1.0, horizon, c);
    std::vector<double> out(horizon);
    for (int j = 1; j <= horizon; ++j) {
        const double s = std::exp(log_genfun_split(stock, issuer, j, c).real());
        if (!(s > 0.0 && s <= 1.0 + 1e-12)) {
            throw std::logic_error(describe("survival probability out of (0, 1]: ", s));
        }
        out[j - 1] = std::min(s, 1.0);
    }
    return out;
}

PriceValue default_premium(const HybridModelConfig& config, const QuadratureSpec& spec,
                           PriceMode mode) {
    if (mode == PriceMode::default_free) return {};
    const PriceBreakdown b = price(config, spec, mode);
    return {b.default_free - b.final_price, b.quadrature_error, b.warnings};
}

}  // namespace vulnopt
