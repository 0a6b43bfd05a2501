#include "vulnopt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "vulnopt/config_io.hpp"
#include "vulnopt/genfun.hpp"

namespace vulnopt {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string format_complex(Complex z) {
    std::string s = format_number(z.real());
    if (z.imag() != 0.0) {
        if (z.imag() >= 0.0) s += "+";
        s += format_number(z.imag()) + "i";
    }
    return s;
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    return line + '\n';
}

bool has_mode(const std::vector<PriceMode>& modes, PriceMode m) {
    return std::find(modes.begin(), modes.end(), m) != modes.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// Sweeps.

const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::maturity_years: return "maturity_years";
        case SweepParameter::strike: return "strike";
        case SweepParameter::beta_s: return "beta_s";
        case SweepParameter::beta_v: return "beta_v";
        case SweepParameter::alpha: return "alpha";
        case SweepParameter::lgd: return "lgd";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(const std::string& text) {
    for (auto p : {SweepParameter::maturity_years, SweepParameter::strike, SweepParameter::beta_s,
                   SweepParameter::beta_v, SweepParameter::alpha, SweepParameter::lgd}) {
        if (text == to_string(p)) return p;
    }
    throw ConfigError("unknown sweep parameter '" + text + "'");
}

HybridModelConfig with_parameter(const HybridModelConfig& config, SweepParameter p, double value) {
    HybridModelConfig c = config;
    switch (p) {
        case SweepParameter::maturity_years: {
            const long steps = std::lround(value * c.steps_per_year);
            if (!(value > 0.0) || steps < 1) {
                throw ConfigError("sweep: maturity_years " + format_number(value) +
                                  " gives no steps");
            }
            c.contract.maturity_steps = static_cast<int>(steps);
            break;
        }
        case SweepParameter::strike: c.contract.strike = value; break;
        case SweepParameter::beta_s: c.stock.beta = value; break;
        case SweepParameter::beta_v: c.firm.beta = value; break;
        case SweepParameter::alpha: c.contract.alpha = value; break;
        case SweepParameter::lgd: c.contract.lgd = value; break;
    }
    const ValidationReport report = validate_config(c);
    if (!report.ok()) {
        throw ConfigError("sweep: " + std::string(to_string(p)) + "=" + format_number(value) +
                          " is invalid: " + report.violations.front());
    }
    return c;
}

SweepResult run_sweep(const HybridModelConfig& config, const QuadratureSpec& spec,
                      const SweepSpec& sweep) {
    if (sweep.values.empty()) throw ConfigError("sweep: no values");
    if (sweep.modes.empty()) throw ConfigError("sweep: no modes");
    std::vector<double> values = sweep.values;
    std::sort(values.begin(), values.end());
    std::vector<HybridModelConfig> configs;
    for (double v : values) configs.push_back(with_parameter(config, sweep.parameter, v));

    SweepResult result;
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepRow row;
        row.value = values[i];
        try {
            const PriceValue df = default_free_price(configs[i], spec);
            row.default_free = df.value;
            row.default_free_error = df.error;
            if (has_mode(sweep.modes, PriceMode::hybrid)) {
                row.hybrid = hybrid_price(configs[i], spec);
            }
            if (has_mode(sweep.modes, PriceMode::reduced)) {
                row.reduced = reduced_form_price(configs[i], spec);
            }
        } catch (const std::exception& e) {
            result.partial = true;
            result.failure = std::string(to_string(sweep.parameter)) + "=" +
                             format_number(values[i]) + ": " + e.what();
            break;
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::string sweep_csv(const SweepSpec& sweep, const SweepResult& result) {
    std::vector<std::string> header = {to_string(sweep.parameter)};
    const bool df = has_mode(sweep.modes, PriceMode::default_free);
    const bool hy = has_mode(sweep.modes, PriceMode::hybrid);
    const bool rd = has_mode(sweep.modes, PriceMode::reduced);
    if (df) header.insert(header.end(), {"default_free", "default_free_error"});
    if (hy) header.insert(header.end(), {"hybrid", "hybrid_error", "hybrid_premium"});
    if (rd) header.insert(header.end(), {"reduced", "reduced_error", "reduced_premium"});
    std::string csv = join_row(header);
    for (const auto& r : result.rows) {
        std::vector<std::string> cells = {format_number(r.value)};
        if (df) {
            cells.push_back(format_number(r.default_free));
            cells.push_back(format_number(r.default_free_error));
        }
        for (auto [on, b] : {std::pair{hy, &r.hybrid}, std::pair{rd, &r.reduced}}) {
            if (!on) continue;
            cells.push_back(format_number(b->final_price));
            cells.push_back(format_number(b->quadrature_error));
            cells.push_back(format_number(b->default_free - b->final_price));
        }
        csv += join_row(cells);
    }
    return csv;
}

// ---------------------------------------------------------------------------
// Validation.

const char* to_string(CompareStatus s) {
    switch (s) {
        case CompareStatus::pass: return "PASS";
        case CompareStatus::fail: return "FAIL";
        case CompareStatus::low_power: return "LOW_POWER";
    }
    return "?";
}

namespace {

Comparison compare_scaled(std::string quantity, int j, double closed_form,
                          double closed_form_error, const McEstimate& mc, double scale) {
    Comparison c;
    c.quantity = std::move(quantity);
    c.j = j;
    c.closed_form = closed_form;
    c.closed_form_error = closed_form_error;
    c.mc_mean = mc.mean;
    c.mc_std_error = mc.std_error;
    const double joint = std::hypot(mc.std_error, closed_form_error);
    const double diff = closed_form - mc.mean;
    c.z = joint > 0.0 ? diff / joint : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
    const double magnitude = std::max({std::abs(closed_form), std::abs(mc.mean), scale});
    if (mc.n_paths < kMinPowerPaths || 4.0 * mc.std_error > kMaxRelativeBand * magnitude) {
        c.status = CompareStatus::low_power;
    } else {
        c.status = std::abs(diff) <= 4.0 * joint ? CompareStatus::pass : CompareStatus::fail;
    }
    return c;
}

struct GenfunCheck {
    Complex phi1, phi2;
    double phi3, phi4;
    int j;
};

std::vector<GenfunCheck> genfun_checks(int T) {
    const int q = std::max(1, T / 4);
    const int h = std::max(1, T / 2);
    return {
        {1.0, 0.0, 0.0, 0.0, T},
        {Complex(0.5, 1.0), 0.0, 0.0, 0.0, T},
        {Complex(0.3, -0.7), Complex(0.4, 0.8), -1.0, -1.0, h},
        {Complex(0.0, 2.0), Complex(0.0, -3.0), 0.0, -1.0, q},
        {0.0, 1.0, -1.0, -1.0, T},
    };
}

}  // namespace

Comparison compare(std::string quantity, int j, double closed_form, double closed_form_error,
                   const McEstimate& mc) {
    return compare_scaled(std::move(quantity), j, closed_form, closed_form_error, mc, 0.0);
}

std::vector<int> validation_periods(int T) {
    std::vector<int> js = {std::max(1, T / 4), std::max(1, T / 2), T};
    js.erase(std::unique(js.begin(), js.end()), js.end());
    return js;
}

std::vector<Comparison> run_validation(const HybridModelConfig& config,
                                       const QuadratureSpec& spec,
                                       const ValidationOptions& options, std::ostream* log) {
    const int T = config.contract.maturity_steps;
    const std::vector<int> periods = validation_periods(T);

    // Closed forms first, each paired with the functional that estimates it.
    struct Pending {
        std::string quantity;
        int j;
        double value;
        double error;
        double scale;
    };
    std::vector<Pending> pending;
    std::vector<PathFunctional> functionals;
    auto note = [&](const std::string& msg) {
        if (log) *log << msg << '\n' << std::flush;
    };

    if (options.genfun) {
        note("closed form: generating function spot checks");
        for (const auto& g : genfun_checks(T)) {
            const PhiVector phi{g.phi1, g.phi2, g.phi3, g.phi4, g.j, T};
            const Complex f = eval_genfun(phi, config);
            const std::string label = "genfun[" + format_complex(g.phi1) + ";" +
                                      format_complex(g.phi2) + ";" + format_number(g.phi3) +
                                      ";" + format_number(g.phi4) + "]";
            const double err = 1e-12 * std::abs(f);
            pending.push_back({label + ".re", g.j, f.real(), err, 0.0});
            functionals.push_back(genfun_sample(phi, 0));
            pending.push_back({label + ".im", g.j, f.imag(), err, std::abs(f)});
            functionals.push_back(genfun_sample(phi, 1));
        }
    }
    if (options.prices) {
        note("closed form: default-free price");
        const PriceValue df = default_free_price(config, spec);
        pending.push_back({"default_free_price", 0, df.value, df.error, 0.0});
        functionals.push_back(default_free_payoff(config));
        note("closed form: hybrid price");
        const PriceBreakdown hy = hybrid_price(config, spec);
        pending.push_back({"hybrid_price", 0, hy.final_price, hy.quadrature_error, 0.0});
        functionals.push_back(hybrid_payoff(config, HybridMode::survival_weighted));
        note("closed form: reduced-form price");
        const PriceBreakdown rd = reduced_form_price(config, spec);
        pending.push_back({"reduced_price", 0, rd.final_price, rd.quadrature_error, 0.0});
        functionals.push_back(reduced_payoff(config, HybridMode::survival_weighted));
        if (options.telescoping) {
            const PathFunctional sw = hybrid_payoff(config, HybridMode::survival_weighted);
            const PathFunctional ts = hybrid_payoff(config, HybridMode::tau_sampled);
            pending.push_back({"hybrid_tau_minus_survival_weighted", 0, 0.0, 0.0,
                               hy.final_price});
            functionals.push_back([sw, ts](const PathRecord& p) { return ts(p) - sw(p); });
        }
    }
    if (options.pi) {
        note("closed form: Pi terms");
        PiEngine engine(config, spec);
        for (int j : periods) {
            for (int kind : {1, 2, 5, 6}) {
                const auto [a, b] = engine.compute_pair(kind, j);
                for (auto [k, v] : {std::pair{kind, &a}, std::pair{kind + 2, &b}}) {
                    pending.push_back({"pi_" + std::to_string(k), j, v->value, v->error, 0.0});
                    functionals.push_back(pi_integrand(config, make_pi_request(k, j)));
                }
            }
        }
    }
    if (options.survival) {
        for (int j : periods) {
            pending.push_back({"survival", j, survival_probability(config, j), 0.0, 0.0});
            functionals.push_back(survival_weight(j));
        }
    }

    note("monte carlo: " + std::to_string(options.mc.n_paths) + " paths, seed " +
         std::to_string(options.mc.seed));
    const bool tau = options.prices && options.telescoping;
    const std::vector<McEstimate> mc = mc_expectations(config, functionals, options.mc, tau);

    std::vector<Comparison> rows;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        const Pending& p = pending[i];
        rows.push_back(compare_scaled(p.quantity, p.j, p.value, p.error, mc[i], p.scale));
    }
    return rows;
}

std::string validation_csv(const std::vector<Comparison>& rows) {
    std::string csv = join_row({"quantity", "j", "closed_form", "closed_form_error", "mc_mean",
                                "mc_std_error", "z", "status"});
    for (const auto& r : rows) {
        csv += join_row({r.quantity, std::to_string(r.j), format_number(r.closed_form),
                         format_number(r.closed_form_error), format_number(r.mc_mean),
                         format_number(r.mc_std_error), format_number(r.z),
                         to_string(r.status)});
    }
    return csv;
}

// ---------------------------------------------------------------------------
// Survival.

const std::vector<SurvivalReference>& rating_b_reference() {
    static const std::vector<SurvivalReference> table = {
        {1.0, 0.0533}, {3.0, 0.1619}, {5.0, 0.2589}, {7.0, 0.3447}};
    return table;
}

std::string survival_csv(const std::vector<double>& curve) {
    std::string csv = join_row({"j", "survival", "cumulative_default"});
    for (std::size_t i = 0; i < curve.size(); ++i) {
        csv += join_row({std::to_string(i + 1), format_number(curve[i]),
                         format_number(1.0 - curve[i])});
    }
    return csv;
}

// ---------------------------------------------------------------------------
// Command line.

LoadedConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
    LoadedConfig c;
    c.doc = load_json_file(path);
    for (const auto& s : sets) apply_override(c.doc, s);
    c.model = config_from_json(c.doc);
    c.quadrature = quadrature_from_json(c.doc);
    const ValidationReport report = validate_config(c.model);
    if (!report.ok()) {
        std::string msg = "config '" + path + "' is invalid:";
        for (const auto& v : report.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    return c;
}

namespace {

struct GlobalArgs {
    std::string config;
    std::string positional_config;
    std::string out;
    std::uint64_t seed = McOptions{}.seed;
    std::int64_t paths = 1'000'000;
    double phi_max = 0.0;
    double tol = 0.0;
    std::vector<std::string> sets;
    bool quiet = false;
};

LoadedConfig load(const GlobalArgs& g, std::ostream& err) {
    const std::string path = !g.positional_config.empty() ? g.positional_config : g.config;
    if (path.empty()) throw ConfigError("no config file given (use --config PATH)");
    LoadedConfig c = load_with_overrides(path, g.sets);
    if (g.phi_max > 0.0) c.quadrature.phi_max = g.phi_max;
    if (g.tol > 0.0) c.quadrature.abs_tol = g.tol;
    c.quadrature.validate();
    for (const auto& w : validate_config(c.model).warnings) err << "warning: " << w << '\n';
    return c;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::string terms_csv(const PriceBreakdown& b) {
    if (b.per_j_terms.empty()) {
        return join_row({"mode", "default_free", "default_free_error"}) +
               join_row({to_string(b.mode), format_number(b.default_free),
                         format_number(b.default_free_error)});
    }
    const int n = b.per_j_terms.front().count;
    const std::string prefix = b.mode == PriceMode::reduced ? "pibar_" : "pi_";
    std::vector<std::string> header = {"j"};
    for (int k = 1; k <= n; ++k) header.push_back(prefix + std::to_string(k));
    for (int k = 1; k <= n; ++k) header.push_back(prefix + std::to_string(k) + "_error");
    header.insert(header.end(), {"contribution", "contribution_error"});
    std::string csv = join_row(header);
    for (const auto& t : b.per_j_terms) {
        std::vector<std::string> cells = {std::to_string(t.j)};
        for (int k = 0; k < n; ++k) cells.push_back(format_number(t.pi[k]));
        for (int k = 0; k < n; ++k) cells.push_back(format_number(t.error[k]));
        cells.push_back(format_number(t.contribution));
        cells.push_back(format_number(t.contribution_error));
        csv += join_row(cells);
    }
    return csv;
}

int cmd_price(const GlobalArgs& g, const std::string& mode_text, std::ostream& out,
              std::ostream& err) {
    const LoadedConfig c = load(g, err);
    const PriceMode mode = parse_price_mode(mode_text);
    ProgressFn progress;
    if (!g.quiet) {
        progress = [&err](int j, int T) {
            if (j % 50 == 0 || j == T) err << "  period " << j << "/" << T << '\n' << std::flush;
        };
    }
    const PriceBreakdown b = price(c.model, c.quadrature, mode, progress);
    out << "mode              " << to_string(b.mode) << '\n';
    out << "maturity_steps    " << c.model.contract.maturity_steps << '\n';
    out << "strike            " << format_number(c.model.contract.strike) << '\n';
    out << "default_free      " << format_number(b.default_free) << '\n';
    out << "final             " << format_number(b.final_price) << '\n';
    out << "cva               " << format_number(b.cva) << '\n';
    out << "quadrature_error  " << format_number(b.quadrature_error) << '\n';
    for (const auto& w : b.warnings) out << "warning           " << w << '\n';
    if (!g.out.empty()) write_file(g.out, terms_csv(b));
    return kExitOk;
}

int cmd_sweep(const GlobalArgs& g, const std::string& param,
              const std::vector<double>& values, const std::vector<std::string>& modes,
              std::ostream& out, std::ostream& err) {
    const LoadedConfig c = load(g, err);
    SweepSpec sweep;
    sweep.parameter = parse_sweep_parameter(param);
    sweep.values = values;
    if (!modes.empty()) {
        sweep.modes.clear();
        for (const auto& m : modes) {
            try {
                sweep.modes.push_back(parse_price_mode(m));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    const SweepResult r = run_sweep(c.model, c.quadrature, sweep);
    const std::string csv = sweep_csv(sweep, r);
    if (g.out.empty()) {
        out << csv;
    } else {
        write_file(g.out, csv);
    }
    if (r.partial) {
        err << "PARTIAL_OUTPUT: " << r.rows.size() << " of " << values.size()
            << " rows written; failed at " << r.failure << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_validate(const GlobalArgs& g, bool antithetic, int workers, std::ostream& out,
                 std::ostream& err) {
    const LoadedConfig c = load(g, err);
    ValidationOptions opt;
    opt.mc.seed = g.seed;
    opt.mc.n_paths = g.paths;
    opt.mc.antithetic = antithetic;
    opt.mc.workers = workers;
    const auto rows = run_validation(c.model, c.quadrature, opt, g.quiet ? nullptr : &err);
    int failed = 0;
    int low = 0;
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-9s %-44s j=%-5d closed=%-16s mc=%-16s se=%-12s z=%s",
                      to_string(r.status), r.quantity.c_str(), r.j,
                      format_number(r.closed_form).c_str(), format_number(r.mc_mean).c_str(),
                      format_number(r.mc_std_error).c_str(), format_number(r.z).c_str());
        out << line << '\n';
        failed += r.status == CompareStatus::fail;
        low += r.status == CompareStatus::low_power;
    }
    out << rows.size() << " comparisons, " << failed << " failed, " << low << " low power\n";
    if (!g.out.empty()) write_file(g.out, validation_csv(rows));
    return failed > 0 ? kExitValidation : kExitOk;
}

int cmd_survival(const GlobalArgs& g, int horizon, std::ostream& out, std::ostream& err) {
    const LoadedConfig c = load(g, err);
    const int spy = c.model.steps_per_year;
    if (horizon <= 0) horizon = std::max(c.model.contract.maturity_steps, 7 * spy);
    const std::vector<double> curve = survival_curve(c.model, horizon);
    if (!g.out.empty()) write_file(g.out, survival_csv(curve));
    out << "years,steps,cumulative_default,reference\n";
    for (const auto& ref : rating_b_reference()) {
        const int j = static_cast<int>(std::lround(ref.years * spy));
        if (j < 1 || j > horizon) continue;
        out << format_number(ref.years) << ',' << j << ','
            << format_number(1.0 - curve[j - 1]) << ',' << format_number(ref.cumulative_default)
            << '\n';
    }
    return kExitOk;
}

Complex parse_complex(const std::string& text) {
    std::stringstream ss(text);
    std::string re;
    std::string im;
    std::getline(ss, re, ',');
    std::getline(ss, im);
    try {
        std::size_t used = 0;
        const double a = std::stod(re, &used);
        if (used != re.size()) throw std::invalid_argument(text);
        double b = 0.0;
        if (!im.empty()) {
            b = std::stod(im, &used);
            if (used != im.size()) throw std::invalid_argument(text);
        }
        return {a, b};
    } catch (const std::exception&) {
        throw ConfigError("cannot parse complex number '" + text + "' (expected re[,im])");
    }
}

int cmd_genfun(const GlobalArgs& g, const std::vector<std::string>& phi, int j, std::ostream& out,
               std::ostream& err) {
    const LoadedConfig c = load(g, err);
    const int T = c.model.contract.maturity_steps;
    if (j <= 0) j = T;
    if (j > T) throw ConfigError("genfun: j must be <= maturity_steps");
    PhiVector v{parse_complex(phi[0]), parse_complex(phi[1]), parse_complex(phi[2]),
                parse_complex(phi[3]), j, T};
    const Complex lf = log_genfun(v, c.model);
    const Complex f = std::exp(lf);
    out << "j      " << j << '\n';
    out << "log_f  " << format_number(lf.real()) << ' ' << format_number(lf.imag()) << '\n';
    out << "f      " << format_number(f.real()) << ' ' << format_number(f.imag()) << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vulnerable European call pricing under a hybrid credit model"};
    app.name("vulnopt");
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--config", g.config, "Config file (JSON, comments allowed)");
    app.add_option("--out", g.out, "CSV output path");
    app.add_option("--seed", g.seed, "Monte Carlo seed");
    app.add_option("--paths", g.paths, "Monte Carlo paths")->check(CLI::Range(2LL, 1LL << 40));
    app.add_option("--phi-max", g.phi_max, "Quadrature truncation bound per axis");
    app.add_option("--tol", g.tol, "Quadrature absolute tolerance");
    app.add_option("--set", g.sets, "Override a config value, e.g. intensity.lambda0=0")
        ->allow_extra_args(false);
    app.add_flag("--quiet", g.quiet, "No progress output");

    std::string mode = "hybrid";
    auto* price = app.add_subcommand("price", "Price one contract");
    price->add_option("config_file", g.positional_config, "Config file");
    price->add_option("--mode", mode, "default_free | hybrid | reduced")
        ->check(CLI::IsMember({"default_free", "hybrid", "reduced"}));

    std::string param;
    std::vector<double> values;
    std::vector<std::string> modes;
    auto* sweep = app.add_subcommand("sweep", "Price over a grid of one parameter");
    sweep->add_option("config_file", g.positional_config, "Config file");
    sweep->add_option("--param", param, "maturity_years | strike | beta_s | beta_v | alpha | lgd")
        ->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--modes", modes, "Subset of default_free,hybrid,reduced")->delimiter(',');

    bool antithetic = false;
    int workers = 0;
    auto* validate = app.add_subcommand("validate", "Compare closed forms with Monte Carlo");
    validate->add_option("config_file", g.positional_config, "Config file");
    validate->add_flag("--antithetic", antithetic, "Antithetic variates");
    validate->add_option("--workers", workers, "Monte Carlo threads (0: all cores)");

    int horizon = 0;
    auto* survival = app.add_subcommand("survival", "Survival curve and cumulative defaults");
    survival->add_option("config_file", g.positional_config, "Config file");
    survival->add_option("--horizon", horizon, "Last period (default: 7 years)");

    std::vector<std::string> phi = {"0", "0", "0", "0"};
    int j = 0;
    auto* genfun = app.add_subcommand("genfun", "Evaluate the generating function");
    genfun->add_option("config_file", g.positional_config, "Config file");
    genfun->add_option("--phi1", phi[0], "re[,im]");
    genfun->add_option("--phi2", phi[1], "re[,im]");
    genfun->add_option("--phi3", phi[2], "re[,im]");
    genfun->add_option("--phi4", phi[3], "re[,im]");
    genfun->add_option("--j", j, "Trigger period (default: maturity)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*price) return cmd_price(g, mode, out, err);
        if (*sweep) return cmd_sweep(g, param, values, modes, out, err);
        if (*validate) return cmd_validate(g, antithetic, workers, out, err);
        if (*survival) return cmd_survival(g, horizon, out, err);
        if (*genfun) return cmd_genfun(g, phi, j, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const QuadratureError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const GenfunDomainError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}

}  // namespace vulnopt
