#include "vulnopt/inversion.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace vulnopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};
constexpr int kMaxDomainRetries = 6;
constexpr int kMax2dRefinements = 3;
constexpr std::size_t kIssuerCacheLimit = 4096;
constexpr std::size_t kStockCacheLimit = 2048;

struct Rule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

const Rule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    Rule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        gsl_integration_glfixed_point(-1.0, 1.0, i, &rule.x[i], &rule.w[i], table);
    }
    gsl_integration_glfixed_table_free(table);
    return cache.emplace(n, std::move(rule)).first->second;
}

// Raised internally when the integrand is undefined at u.
struct DomainCut {
    double u;
};

Complex eval_or_cut(const std::function<Complex(double)>& h, double u) {
    Complex v;
    try {
        v = h(u);
    } catch (const GenfunDomainError&) {
        throw DomainCut{u};
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainCut{u};
    return v;
}

double panel_sum(const std::function<Complex(double)>& h, const Panel& p, int n) {
    const Rule& rule = gauss_legendre(n);
    const double half = 0.5 * (p.hi - p.lo);
    const double mid = 0.5 * (p.hi + p.lo);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.w[i] * eval_or_cut(h, mid + half * rule.x[i]).real();
    return half * sum;
}

struct PanelEval {
    Panel panel;
    double coarse = 0.0;  // order / 2
    double fine = 0.0;    // order
    double err() const { return std::abs(fine - coarse); }
};

PanelEval eval_panel(const std::function<Complex(double)>& h, const Panel& p, int order) {
    return {p, panel_sum(h, p, order / 2), panel_sum(h, p, order)};
}

double target(const QuadratureSpec& spec, double value) {
    return std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
}

std::string fmt(const char* text, double a) {
    std::ostringstream s;
    s << text << a;
    return s.str();
}

int max_order(const QuadratureSpec& spec) { return 16 * spec.nodes_per_panel; }

// U = 2^(k/2), so that truncation points repeat exactly across calls.
double ladder(int k) { return std::ldexp(k % 2 == 0 ? 1.0 : std::numbers::sqrt2, k / 2); }

// Smallest U in {1, sqrt2, 2, ...} (capped at phi_max) past which the envelope
// |h(u)| u stays under abs_tol/10 on [U, 2U]. Shrinks below a domain failure.
double find_upper(const std::function<Complex(double)>& h, const QuadratureSpec& spec,
                  double& tail_err, std::vector<std::string>& warnings) {
    const double threshold = spec.abs_tol / 10.0;
    int k = 0;
    double U = std::min(1.0, spec.phi_max);
    while (true) {
        double env = 0.0;
        double failed_at = -1.0;
        for (double f : {1.0, 1.25, 1.5, 1.75, 2.0}) {
            const double u = std::min(f * U, spec.phi_max);
            try {
                env = std::max(env, std::abs(eval_or_cut(h, u)) * u);
            } catch (const DomainCut& cut) {
                failed_at = cut.u;
                break;
            }
        }
        if (failed_at > 0.0) {
            double cut = std::min(U, 0.5 * failed_at);
            for (int k = 0; k < 60; ++k) {
                try {
                    tail_err = std::abs(eval_or_cut(h, cut)) * cut;
                    warnings.push_back(fmt("integrand undefined beyond u=", cut));
                    return cut;
                } catch (const DomainCut&) {
                    cut *= 0.5;
                }
            }
            throw QuadratureError("integrand undefined arbitrarily close to u=0",
                                  std::numeric_limits<double>::infinity());
        }
        if (env < threshold) {
            tail_err = env;
            return U;
        }
        if (U >= spec.phi_max) {
            tail_err = env;
            warnings.push_back(fmt("integrand envelope not negligible at phi_max: ", env));
            return U;
        }
        U = std::min(ladder(++k), spec.phi_max);
    }
}

// [0, U] starts as one panel at order 2n; the order is doubled while a single
// panel is in use (the previous rule becomes the comparison rule), then the
// worst panel is bisected until the estimate meets `goal`.
AxisIntegral adapt_on(const std::function<Complex(double)>& h, double U, double tail_err,
                      double goal, const QuadratureSpec& spec) {
    int order = 2 * spec.nodes_per_panel;
    std::vector<PanelEval> ps{eval_panel(h, Panel{0.0, U}, order)};
    while (true) {
        double err = 0.0;
        for (const auto& p : ps) err += p.err();
        if (err <= goal) break;
        if (ps.size() == 1 && 2 * order <= max_order(spec)) {
            order *= 2;
            ps[0].coarse = ps[0].fine;
            ps[0].fine = panel_sum(h, ps[0].panel, order);
            continue;
        }
        if (static_cast<int>(ps.size()) >= spec.panels) break;
        auto worst = std::max_element(ps.begin(), ps.end(), [](const auto& a, const auto& b) {
            return a.err() < b.err();
        });
        const Panel p = worst->panel;
        const double mid = 0.5 * (p.lo + p.hi);
        *worst = eval_panel(h, Panel{p.lo, mid}, order);
        ps.push_back(eval_panel(h, Panel{mid, p.hi}, order));
    }
    std::sort(ps.begin(), ps.end(),
              [](const auto& a, const auto& b) { return a.panel.lo < b.panel.lo; });
    AxisIntegral out;
    out.layout.upper = U;
    out.layout.order = order;
    for (const auto& p : ps) {
        out.value += p.fine;
        out.error += p.err();
        out.layout.panels.push_back(p.panel);
    }
    if (out.error > goal)
        out.warnings.push_back(fmt("panel limit reached, error estimate ", out.error));
    out.error += tail_err;
    return out;
}

AxisLayout truncate_layout(const AxisLayout& layout, double cut) {
    AxisLayout out;
    for (const auto& p : layout.panels) {
        if (p.hi <= cut) out.panels.push_back(p);
    }
    if (out.panels.empty() && !layout.panels.empty()) out.panels.push_back({0.0, cut * 0.5});
    out.upper = out.panels.empty() ? 0.0 : out.panels.back().hi;
    return out;
}

AxisLayout extend_layout(const AxisLayout& layout, double phi_max) {
    AxisLayout out = layout;
    const double lo = layout.upper;
    const double hi = std::min(2.0 * lo, phi_max);
    if (hi > lo) out.panels.push_back({lo, hi});
    out.upper = hi;
    return out;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void QuadratureSpec::validate() const {
    if (!(phi_max > 0.0)) throw std::invalid_argument("quadrature: phi_max must be > 0");
    if (panels < 1) throw std::invalid_argument("quadrature: panels must be >= 1");
    if (nodes_per_panel < 2)
        throw std::invalid_argument("quadrature: nodes_per_panel must be >= 2");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
        throw std::invalid_argument("quadrature: tolerances must be > 0");
    }
}

AxisNodes layout_nodes(const AxisLayout& layout, int order) {
    const Rule& rule = gauss_legendre(order);
    AxisNodes out;
    out.u.reserve(layout.panels.size() * order);
    out.w.reserve(layout.panels.size() * order);
    for (const auto& p : layout.panels) {
        const double half = 0.5 * (p.hi - p.lo);
        const double mid = 0.5 * (p.hi + p.lo);
        for (int i = 0; i < order; ++i) {
            out.u.push_back(mid + half * rule.x[i]);
            out.w.push_back(half * rule.w[i]);
        }
    }
    return out;
}

AxisIntegral integrate_half_line(const std::function<Complex(double)>& h,
                                 const QuadratureSpec& spec, double goal) {
    spec.validate();
    if (!(goal > 0.0)) goal = spec.abs_tol;
    std::vector<std::string> warnings;
    double tail_err = 0.0;
    double U = find_upper(h, spec, tail_err, warnings);
    for (int attempt = 0;; ++attempt) {
        try {
            AxisIntegral out = adapt_on(h, U, tail_err, goal, spec);
            warnings.insert(warnings.end(), out.warnings.begin(), out.warnings.end());
            out.warnings = std::move(warnings);
            return out;
        } catch (const DomainCut& cut) {
            if (attempt >= kMaxDomainRetries) {
                throw QuadratureError("integrand undefined inside the integration range",
                                      std::numeric_limits<double>::infinity());
            }
            U = 0.5 * cut.u;
            try {
                tail_err = std::max(tail_err, std::abs(eval_or_cut(h, U)) * U);
            } catch (const DomainCut&) {
                tail_err = std::numeric_limits<double>::infinity();
            }
            warnings.push_back(fmt("integrand undefined beyond u=", U));
        }
    }
}

AxisIntegral integrate_on_layout(const std::function<Complex(double)>& h,
                                 const AxisLayout& layout) {
    AxisIntegral out;
    out.layout = layout;
    try {
        for (const auto& p : layout.panels) {
            const PanelEval e = eval_panel(h, p, layout.order);
            out.value += e.fine;
            out.error += e.err();
        }
    } catch (const DomainCut& cut) {
        out.value = std::numeric_limits<double>::quiet_NaN();
        out.error = std::numeric_limits<double>::infinity();
        out.warnings.push_back(fmt("integrand undefined on pinned layout at u=", cut.u));
    }
    return out;
}

InversionResult tail_prob_1d(const std::function<Complex(double)>& charfn, double x,
                             const QuadratureSpec& spec) {
    auto h = [&](double u) { return std::exp(-kI * (u * x)) * charfn(u) / (kI * u); };
    const AxisIntegral a = integrate_half_line(h, spec, kPi * spec.abs_tol);
    InversionResult out;
    out.raw = 0.5 + a.value / kPi;
    out.error = a.error / kPi;
    out.warnings = a.warnings;
    out.layouts.marginal1 = a.layout;
    if (!std::isfinite(out.raw) || out.error > 10.0 * target(spec, out.raw)) {
        throw QuadratureError(fmt("1D inversion did not converge, error estimate ", out.error),
                              out.error);
    }
    out.value = std::clamp(out.raw, -spec.abs_tol, 1.0 + spec.abs_tol);
    return out;
}

void JointCharFn::marginal1(const std::vector<double>& u, std::vector<Complex>& out) const {
    out.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = at(u[i], 0.0);
}

void JointCharFn::marginal2(const std::vector<double>& u, std::vector<Complex>& out) const {
    out.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = at(0.0, u[i]);
}

void JointCharFn::grid(const std::vector<double>& u1, const std::vector<double>& u2, int sign2,
                       std::vector<Complex>& out) const {
    out.resize(u1.size() * u2.size());
    for (std::size_t i = 0; i < u1.size(); ++i) {
        for (std::size_t k = 0; k < u2.size(); ++k) {
            try {
                out[i * u2.size() + k] = at(u1[i], sign2 * u2[k]);
            } catch (const GenfunDomainError&) {
                out[i * u2.size() + k] = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
            }
        }
    }
}

namespace {

struct GridSum {
    double value = 0.0;
    int first_bad_panel1 = -1;  // lowest axis-1 panel holding an undefined node
    int first_bad_panel2 = -1;
};

AxisLayout halved(AxisLayout l) {
    l.order /= 2;
    return l;
}

// Double integral of the cross term on the tensor grid of two layouts.
GridSum cross_term(const JointCharFn& cf, const AxisLayout& l1, const AxisLayout& l2, double x1,
                   double x2) {
    const AxisNodes a = layout_nodes(l1, l1.order);
    const AxisNodes b = layout_nodes(l2, l2.order);
    std::vector<Complex> plus;
    std::vector<Complex> minus;
    cf.grid(a.u, b.u, +1, plus);
    cf.grid(a.u, b.u, -1, minus);
    GridSum out;
    const std::size_t nb = b.u.size();
    std::vector<Complex> e2(nb);
    for (std::size_t k = 0; k < nb; ++k) e2[k] = std::exp(-kI * (b.u[k] * x2));
    for (std::size_t i = 0; i < a.u.size(); ++i) {
        const Complex e1 = std::exp(-kI * (a.u[i] * x1));
        double row = 0.0;
        for (std::size_t k = 0; k < nb; ++k) {
            const Complex p = plus[i * nb + k];
            const Complex m = minus[i * nb + k];
            if (!finite(p) || !finite(m)) {
                const int p1 = static_cast<int>(i) / l1.order;
                const int p2 = static_cast<int>(k) / l2.order;
                if (out.first_bad_panel1 < 0 || p1 < out.first_bad_panel1)
                    out.first_bad_panel1 = p1;
                if (out.first_bad_panel2 < 0 || p2 < out.first_bad_panel2)
                    out.first_bad_panel2 = p2;
                continue;
            }
            const double d = (e1 * e2[k] * p).real() - (e1 * std::conj(e2[k]) * m).real();
            row += b.w[k] * d / b.u[k];
        }
        out.value += a.w[i] * row / a.u[i];
    }
    return out;
}

// max |cf| along the far edge u1 = U1 (axis 1) or u2 = U2 (axis 2).
double edge_envelope(const JointCharFn& cf, const AxisLayout& l1, const AxisLayout& l2,
                     int axis) {
    const AxisLayout& across = axis == 1 ? l2 : l1;
    const AxisNodes other = layout_nodes(across, across.order);
    const std::vector<double> edge{axis == 1 ? l1.upper : l2.upper};
    double env = 0.0;
    for (int sign : {+1, -1}) {
        std::vector<Complex> vals;
        if (axis == 1) {
            cf.grid(edge, other.u, sign, vals);
        } else {
            cf.grid(other.u, edge, sign, vals);
        }
        for (const auto& v : vals) {
            if (!finite(v)) return std::numeric_limits<double>::infinity();
            env = std::max(env, std::abs(v));
        }
    }
    return env;
}

}  // namespace

InversionResult joint_tail_prob_2d(const JointCharFn& cf, double x1, double x2,
                                   const QuadratureSpec& spec, const InversionLayouts* pinned) {
    spec.validate();

    auto h1 = [&](double u) {
        std::vector<Complex> v;
        cf.marginal1({u}, v);
        if (!finite(v[0])) throw GenfunDomainError("marginal 1", 0, v[0]);
        return std::exp(-kI * (u * x1)) * v[0] / (kI * u);
    };
    auto h2 = [&](double u) {
        std::vector<Complex> v;
        cf.marginal2({u}, v);
        if (!finite(v[0])) throw GenfunDomainError("marginal 2", 0, v[0]);
        return std::exp(-kI * (u * x2)) * v[0] / (kI * u);
    };

    // Error budget: a third each to the two single integrals and the cross term.
    const double marginal_goal = 2.0 * kPi * spec.abs_tol / 3.0;
    const AxisIntegral m1 = pinned ? integrate_on_layout(h1, pinned->marginal1)
                                   : integrate_half_line(h1, spec, marginal_goal);
    const AxisIntegral m2 = pinned ? integrate_on_layout(h2, pinned->marginal2)
                                   : integrate_half_line(h2, spec, marginal_goal);

    InversionResult out;
    out.warnings = m1.warnings;
    out.warnings.insert(out.warnings.end(), m2.warnings.begin(), m2.warnings.end());

    // The cross term is integrated on the tensor product of the marginal panels.
    AxisLayout l1 = pinned ? pinned->grid1 : m1.layout;
    AxisLayout l2 = pinned ? pinned->grid2 : m2.layout;
    const double threshold = spec.abs_tol / 10.0;
    double cross = 0.0;
    double cross_err = 0.0;
    double edge_err = 0.0;
    int refinements = 0;
    int domain_cuts = 0;
    double previous_fine = 0.0;
    bool have_coarse = false;
    while (true) {
        if (!pinned) {
            // Off-axis decay can be slower than along the axes; widen the box
            // until both far edges are negligible.
            bool widened = false;
            for (int axis : {1, 2}) {
                AxisLayout& l = axis == 1 ? l1 : l2;
                for (;;) {
                    const double env = edge_envelope(cf, l1, l2, axis);
                    if (env < threshold || l.upper >= spec.phi_max || !std::isfinite(env)) {
                        edge_err = std::max(edge_err, std::isfinite(env) ? env : 0.0);
                        break;
                    }
                    l = extend_layout(l, spec.phi_max);
                    widened = true;
                }
            }
            if (widened) {
                out.warnings.push_back("joint box widened beyond marginal truncation");
                have_coarse = false;
            }
        }
        const GridSum fine = cross_term(cf, l1, l2, x1, x2);
        if (fine.first_bad_panel1 >= 0) {
            if (++domain_cuts > kMaxDomainRetries) {
                throw QuadratureError("joint characteristic function undefined inside box",
                                      std::numeric_limits<double>::infinity());
            }
            // Cut whichever axis loses less of the box.
            if (fine.first_bad_panel1 > 0 &&
                (fine.first_bad_panel2 == 0 ||
                 l1.panels[fine.first_bad_panel1].lo / l1.upper >=
                     l2.panels[fine.first_bad_panel2].lo / l2.upper)) {
                l1 = truncate_layout(l1, l1.panels[fine.first_bad_panel1].lo);
            } else if (fine.first_bad_panel2 > 0) {
                l2 = truncate_layout(l2, l2.panels[fine.first_bad_panel2].lo);
            } else {
                l1 = truncate_layout(l1, 0.5 * l1.upper);
                l2 = truncate_layout(l2, 0.5 * l2.upper);
            }
            out.warnings.push_back("joint characteristic function undefined on part of the box; "
                                   "truncated");
            edge_err = std::max({edge_err, edge_envelope(cf, l1, l2, 1),
                                 edge_envelope(cf, l1, l2, 2)});
            have_coarse = false;
            continue;
        }
        const double coarse =
            have_coarse ? previous_fine : cross_term(cf, halved(l1), halved(l2), x1, x2).value;
        cross = fine.value;
        cross_err = std::abs(fine.value - coarse);
        const double provisional =
            0.25 + (m1.value + m2.value) / (2.0 * kPi) - cross / (2.0 * kPi * kPi);
        if (pinned || cross_err <= 2.0 * kPi * kPi * target(spec, provisional) / 3.0 ||
            refinements >= kMax2dRefinements) {
            break;
        }
        // Raise the order; the current grid becomes the comparison rule.
        previous_fine = fine.value;
        have_coarse = true;
        l1.order *= 2;
        l2.order *= 2;
        ++refinements;
    }

    out.raw = 0.25 + (m1.value + m2.value) / (2.0 * kPi) - cross / (2.0 * kPi * kPi);
    out.error = (m1.error + m2.error) / (2.0 * kPi) + (cross_err + edge_err) / (2.0 * kPi * kPi);
    out.layouts = {m1.layout, m2.layout, l1, l2};
    if (!std::isfinite(out.raw) || out.error > 10.0 * target(spec, out.raw)) {
        throw QuadratureError(fmt("2D inversion did not converge, error estimate ", out.error),
                              out.error);
    }
    out.value = std::clamp(out.raw, -spec.abs_tol, 1.0 + spec.abs_tol);
    return out;
}

InversionResult joint_tail_prob_2d(const std::function<Complex(double, double)>& cf, double x1,
                                   double x2, const QuadratureSpec& spec) {
    return joint_tail_prob_2d(FunctionJointCharFn(cf), x1, x2, spec);
}

// ---------------------------------------------------------------------------

PiWeights pi_weights(int kind) {
    if (kind < 1 || kind > 8) throw std::invalid_argument("Pi kind must be in 1..8");
    const int k = kind - 1;
    PiWeights w;
    w.s_power = (k % 2 == 0) ? 1 : 0;
    w.lambda_j = ((k / 2) % 2 == 0) ? -1 : 0;
    w.v_power = k >= 4 ? 1 : 0;
    w.lambda_before = -1;
    return w;
}

PiRequest make_pi_request(int kind, int j) {
    PiRequest r;
    r.kind = kind;
    r.j = j;
    r.weights = pi_weights(kind);
    return r;
}

// cf(u1, u2) = f(iu1 + s, -iu2 + v, phi3, phi4) / f(s, v, phi3, phi4) at period j.
class PiEngine::JointKernel : public JointCharFn {
public:
    JointKernel(PiEngine& engine, const PiWeights& w, int j, Complex log_norm)
        : engine_(engine), w_(w), j_(j), log_norm_(log_norm) {}

    Complex at(double u1, double u2) const override {
        return std::exp(engine_.log_f(Complex(w_.s_power, u1), Complex(w_.v_power, -u2),
                                      w_.lambda_j, w_.lambda_before, j_) -
                        log_norm_);
    }

    void grid(const std::vector<double>& u1, const std::vector<double>& u2, int sign2,
              std::vector<Complex>& out) const override {
        const auto& config = engine_.config_;
        std::vector<const IssuerChain*> issuers(u2.size());
        for (std::size_t k = 0; k < u2.size(); ++k) {
            issuers[k] = &engine_.issuer_chain(Complex(w_.v_power, -sign2 * u2[k]), w_.lambda_j,
                                               w_.lambda_before);
        }
        out.resize(u1.size() * u2.size());
        for (std::size_t i = 0; i < u1.size(); ++i) {
            const StockChain& stock = engine_.stock_chain(Complex(w_.s_power, u1[i]));
            Complex* row = out.data() + i * u2.size();
            log_genfun_split_batch(stock, issuers.data(), u2.size(), j_, config, row);
            for (std::size_t k = 0; k < u2.size(); ++k) row[k] = std::exp(row[k] - log_norm_);
        }
    }

private:
    PiEngine& engine_;
    PiWeights w_;
    int j_;
    Complex log_norm_;
};

PiEngine::PiEngine(const HybridModelConfig& config, const QuadratureSpec& spec)
    : config_(config), spec_(spec) {
    spec_.validate();
}

PiEngine::~PiEngine() = default;

const StockChain& PiEngine::stock_chain(Complex phi1) {
    const auto key = std::make_pair(phi1.real(), phi1.imag());
    auto it = stock_cache_.find(key);
    if (it != stock_cache_.end()) return *it->second;
    auto chain = std::make_unique<StockChain>(make_stock_chain(phi1, config_));
    return *stock_cache_.emplace(key, std::move(chain)).first->second;
}

const IssuerChain& PiEngine::issuer_chain(Complex phi2, double phi3, double phi4) {
    const auto key = std::make_tuple(phi2.real(), phi2.imag(), phi3, phi4);
    auto it = issuer_cache_.find(key);
    if (it != issuer_cache_.end()) return *it->second;
    auto chain = std::make_unique<IssuerChain>(make_issuer_chain(
        phi2, phi3, phi4, config_.contract.maturity_steps, config_));
    return *issuer_cache_.emplace(key, std::move(chain)).first->second;
}

// Only called between kernel evaluations, never while chain references are held.
void PiEngine::trim_caches() {
    if (stock_cache_.size() >= kStockCacheLimit) stock_cache_.clear();
    if (issuer_cache_.size() >= kIssuerCacheLimit) issuer_cache_.clear();
}

Complex PiEngine::log_f(Complex phi1, Complex phi2, double phi3, double phi4, int j) {
    return log_genfun_split(stock_chain(phi1), issuer_chain(phi2, phi3, phi4), j, config_);
}

namespace {

void check_j(int j, const HybridModelConfig& config) {
    if (j < 1 || j > config.contract.maturity_steps) {
        throw std::invalid_argument("Pi kernel: need 1 <= j <= T");
    }
}

PiValue to_pi_value(const InversionResult& r, Complex log_norm) {
    PiValue v;
    v.normalizer = std::exp(log_norm.real());
    v.probability = r.raw;
    v.value = v.normalizer * r.raw;
    v.error = v.normalizer * r.error;
    v.warnings = r.warnings;
    return v;
}

}  // namespace

PiValue PiEngine::compute(const PiRequest& request) {
    trim_caches();
    check_j(request.j, config_);
    const PiWeights& w = request.weights;
    const Complex log_norm =
        log_f(Complex(w.s_power, 0.0), Complex(w.v_power, 0.0), w.lambda_j, w.lambda_before,
              request.j);
    JointKernel cf(*this, w, request.j, log_norm);
    // Y1 = ln S(T) >= ln K, Y2 = -ln V(j) > -ln L.
    const InversionResult r = joint_tail_prob_2d(cf, std::log(config_.contract.strike),
                                                 -std::log(config_.contract.lgd), spec_);
    return to_pi_value(r, log_norm);
}

std::pair<PiValue, PiValue> PiEngine::compute_pair(int kind_with_default, int j) {
    trim_caches();
    check_j(j, config_);
    const PiWeights w1 = pi_weights(kind_with_default);
    if (w1.lambda_j != -1) throw std::invalid_argument("compute_pair: expects kind 1, 2, 5 or 6");
    PiWeights w2 = w1;
    w2.lambda_j = 0;
    const double x1 = std::log(config_.contract.strike);
    const double x2 = -std::log(config_.contract.lgd);

    const Complex n1 = log_f(Complex(w1.s_power, 0.0), Complex(w1.v_power, 0.0), -1.0, -1.0, j);
    const Complex n2 = log_f(Complex(w2.s_power, 0.0), Complex(w2.v_power, 0.0), 0.0, -1.0, j);
    const InversionResult r1 = joint_tail_prob_2d(JointKernel(*this, w1, j, n1), x1, x2, spec_);
    const InversionResult r2 =
        joint_tail_prob_2d(JointKernel(*this, w2, j, n2), x1, x2, spec_, &r1.layouts);
    return {to_pi_value(r1, n1), to_pi_value(r2, n2)};
}

std::pair<PiValue, PiValue> PiEngine::compute_reduced_pair(int j) {
    trim_caches();
    check_j(j, config_);
    const double x = std::log(config_.contract.strike);
    const double K = config_.contract.strike;

    // One leg: E[w S(T)^s 1{S(T) >= K}] = f(s) P_s(ln S(T) >= ln K).
    struct Leg {
        double value;
        double error;
        std::vector<std::string> warnings;
    };
    auto leg = [&](int s, double phi3, const AxisLayout* layout, AxisLayout* layout_out) {
        const Complex log_norm = log_f(Complex(s, 0.0), 0.0, phi3, -1.0, j);
        auto h = [&](double u) {
            const Complex cf =
                std::exp(log_f(Complex(s, u), 0.0, phi3, -1.0, j) - log_norm);
            return std::exp(-kI * (u * x)) * cf / (kI * u);
        };
        AxisIntegral a = layout ? integrate_on_layout(h, *layout)
                                : integrate_half_line(h, spec_, kPi * spec_.abs_tol);
        if (layout_out) *layout_out = a.layout;
        const double scale = std::exp(log_norm.real());
        return Leg{scale * (0.5 + a.value / kPi), scale * a.error / kPi, a.warnings};
    };

    AxisLayout lay1;
    AxisLayout lay0;
    const Leg s_free = leg(1, 0.0, nullptr, &lay1);
    const Leg k_free = leg(0, 0.0, nullptr, &lay0);
    const Leg s_dflt = leg(1, -1.0, &lay1, nullptr);
    const Leg k_dflt = leg(0, -1.0, &lay0, nullptr);

    auto combine = [&](const Leg& a, const Leg& b) {
        PiValue v;
        v.value = a.value - K * b.value;
        v.error = a.error + K * b.error;
        v.warnings = a.warnings;
        v.warnings.insert(v.warnings.end(), b.warnings.begin(), b.warnings.end());
        return v;
    };
    PiValue first = combine(s_free, k_free);
    PiValue second = combine(s_dflt, k_dflt);
    for (PiValue* v : {&first, &second}) {
        if (!std::isfinite(v->value) || v->error > 10.0 * target(spec_, v->value)) {
            throw QuadratureError(fmt("reduced-form term did not converge, error estimate ",
                                      v->error),
                                  v->error);
        }
    }
    return {first, second};
}

PiValue compute_pi(const PiRequest& request, const HybridModelConfig& config,
                   const QuadratureSpec& spec) {
    PiEngine engine(config, spec);
    return engine.compute(request);
}

}  // namespace vulnopt
