#include "vulnopt/genfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace vulnopt {

namespace {

std::string describe(const std::string& where, int t, Complex argument) {
    std::ostringstream msg;
    msg << "generating function undefined: " << where << " at t=" << t
        << ", log argument " << argument << " has nonpositive real part";
    return msg.str();
}

// -1/2 ln(arg) on the principal branch, guarded by Re(arg) > 0.
inline Complex neg_half_log(Complex arg, const char* where, int t) {
    if (!(arg.real() > 0.0)) throw GenfunDomainError(where, t, arg);
    return -0.5 * std::log(arg);
}

inline void require_positive(Complex arg, const char* where, int t) {
    if (!(arg.real() > 0.0)) throw GenfunDomainError(where, t, arg);
}

// Completed-square coefficient update shared by every variance block:
//   (b + a c^2) x - quad + 2 (a c x - load/2)^2 / den
inline Complex square_update(const GarchParams& g, Complex x, Complex load, Complex quad,
                             Complex den) {
    const Complex k = g.a * g.c * x - 0.5 * load;
    return (g.b + g.a * g.c * g.c) * x + quad + 2.0 * k * k / den;
}

}  // namespace

GenfunDomainError::GenfunDomainError(const std::string& where, int t, Complex argument)
    : std::domain_error(describe(where, t, argument)), t_(t), argument_(argument) {}

Complex log_gauss_quadratic_expectation(Complex mu1, Complex mu2, double mu3, Complex mu4,
                                        double h) {
    const Complex den = 1.0 - 2.0 * (mu2 + mu4);
    if (!(den.real() > 0.0)) throw GenfunDomainError("gauss_quadratic_expectation", 0, den);
    const Complex k = mu2 * mu3 - 0.5 * mu1;
    return -0.5 * std::log(den) + (mu2 * mu3 * mu3 + 2.0 * k * k / den) * h;
}

Complex gauss_quadratic_expectation(Complex mu1, Complex mu2, double mu3, Complex mu4,
                                    double h) {
    return std::exp(log_gauss_quadratic_expectation(mu1, mu2, mu3, mu4, h));
}

ACoeffs a_step(const ACoeffs& next, Complex phi1, const HybridModelConfig& config, int t) {
    const auto& m = config.market.garch;
    const auto& s = config.stock.garch;
    const double beta = config.stock.beta;
    const Complex den_m = 1.0 - 2.0 * m.a * next.a1;
    const Complex den_s = 1.0 - 2.0 * s.a * next.a2;

    ACoeffs out;
    out.a0 = phi1 * config.contract.r + next.a0 + m.w * next.a1 + s.w * next.a2 +
             neg_half_log(den_m, "A0 (index)", t) + neg_half_log(den_s, "A0 (stock)", t);
    const Complex pb = phi1 * beta;
    out.a1 = m.b * next.a1 - 0.5 * phi1 * beta * beta + pb * m.c - 0.5 * m.c * m.c +
             0.5 * (pb - m.c) * (pb - m.c) / den_m;
    out.a2 = s.b * next.a2 - 0.5 * phi1 + phi1 * s.c - 0.5 * s.c * s.c +
             0.5 * (phi1 - s.c) * (phi1 - s.c) / den_s;
    return out;
}

ACoeffs a_step_completed_square(const ACoeffs& next, Complex phi1,
                                const HybridModelConfig& config, int t) {
    const auto& m = config.market.garch;
    const auto& s = config.stock.garch;
    const double beta = config.stock.beta;
    const Complex den_m = 1.0 - 2.0 * m.a * next.a1;
    const Complex den_s = 1.0 - 2.0 * s.a * next.a2;

    ACoeffs out;
    out.a0 = phi1 * config.contract.r + next.a0 + m.w * next.a1 + s.w * next.a2 +
             neg_half_log(den_m, "A0 (index)", t) + neg_half_log(den_s, "A0 (stock)", t);
    out.a1 = square_update(m, next.a1, phi1 * beta, -0.5 * phi1 * beta * beta, den_m);
    out.a2 = square_update(s, next.a2, phi1, -0.5 * phi1, den_s);
    return out;
}

std::vector<ACoeffs> a_recursion(Complex phi1, const HybridModelConfig& config, int from_t,
                                 int to_t) {
    if (to_t > from_t) throw std::invalid_argument("a_recursion: to_t must not exceed from_t");
    std::vector<ACoeffs> out;
    out.reserve(static_cast<std::size_t>(from_t - to_t + 1));
    out.push_back(ACoeffs{});
    for (int t = from_t - 1; t >= to_t; --t) out.push_back(a_step(out.back(), phi1, config, t));
    return out;
}

BCoeffs b_terminal_from_a(const ACoeffs& a_at_j, const PhiVector& phi,
                          const HybridModelConfig& config) {
    const auto& m = config.market.garch;
    const auto& s = config.stock.garch;
    const double beta_s = config.stock.beta;
    const double beta_v = config.firm.beta;
    const int t = phi.j - 1;
    const Complex den_m = 1.0 - 2.0 * m.a * a_at_j.a1;
    const Complex den_s = 1.0 - 2.0 * s.a * a_at_j.a2;

    BCoeffs out;
    out.b0 = a_at_j.a0 + (phi.phi2 + phi.phi1) * config.contract.r + m.w * a_at_j.a1 +
             s.w * a_at_j.a2 + neg_half_log(den_m, "B0 splice (index)", t) +
             neg_half_log(den_s, "B0 splice (stock)", t);
    const Complex load_m = phi.phi2 * beta_v + phi.phi1 * beta_s;
    const Complex quad_m = -0.5 * phi.phi2 * beta_v * beta_v - 0.5 * phi.phi1 * beta_s * beta_s;
    out.b1 = square_update(m, a_at_j.a1, load_m, quad_m, den_m);
    out.b2 = square_update(s, a_at_j.a2, phi.phi1, -0.5 * phi.phi1, den_s);
    out.b3 = -0.5 * phi.phi2 + 0.5 * phi.phi2 * phi.phi2;
    out.b4 = phi.phi3;
    return out;
}

BCoeffs b_step(const BCoeffs& next, const PhiVector& phi, const HybridModelConfig& config,
               int t) {
    const auto& m = config.market.garch;
    const auto& s = config.stock.garch;
    const auto& v = config.firm.garch;
    const auto& in = config.intensity;
    const double beta_s = config.stock.beta;
    const double beta_v = config.firm.beta;

    const Complex den_m = 1.0 - 2.0 * (m.a * next.b1 + in.a_lambda * next.b4);
    const Complex den_s = 1.0 - 2.0 * s.a * next.b2;
    const Complex den_v = 1.0 - 2.0 * (v.a * next.b3 + in.c_lambda * next.b4);

    BCoeffs out;
    out.b0 = next.b0 + (phi.phi2 + phi.phi1) * config.contract.r + m.w * next.b1 +
             s.w * next.b2 + v.w * next.b3 + in.w_lambda * next.b4 +
             neg_half_log(den_m, "B0 (index)", t) + neg_half_log(den_s, "B0 (stock)", t) +
             neg_half_log(den_v, "B0 (issuer)", t);
    const Complex load_m = phi.phi2 * beta_v + phi.phi1 * beta_s;
    const Complex quad_m = -0.5 * phi.phi2 * beta_v * beta_v - 0.5 * phi.phi1 * beta_s * beta_s;
    out.b1 = square_update(m, next.b1, load_m, quad_m, den_m);
    out.b2 = square_update(s, next.b2, phi.phi1, -0.5 * phi.phi1, den_s);
    out.b3 = square_update(v, next.b3, phi.phi2, -0.5 * phi.phi2, den_v);
    out.b4 = in.b_lambda * next.b4 + phi.phi4;
    return out;
}

BCoeffs b_recursion(const BCoeffs& terminal, const PhiVector& phi,
                    const HybridModelConfig& config, int from_t, int to_t) {
    if (to_t > from_t) throw std::invalid_argument("b_recursion: to_t must not exceed from_t");
    BCoeffs b = terminal;
    for (int t = from_t - 1; t >= to_t; --t) b = b_step(b, phi, config, t);
    return b;
}

Complex log_genfun(const PhiVector& phi, const HybridModelConfig& config) {
    if (phi.j < 1 || phi.j > phi.T) {
        throw std::invalid_argument("log_genfun: trigger period j must satisfy 1 <= j <= T");
    }
    const auto a = a_recursion(phi.phi1, config, phi.T, phi.j);
    const BCoeffs terminal = b_terminal_from_a(a.back(), phi, config);
    const BCoeffs b = b_recursion(terminal, phi, config, phi.j - 1, 0);
    return phi.phi2 * config.firm.initial_log_price + phi.phi1 * config.stock.initial_log_price +
           b.b0 + b.b1 * config.market.h0 + b.b2 * config.stock.h0 + b.b3 * config.firm.h0 +
           b.b4 * config.intensity.lambda0;
}

Complex eval_genfun(const PhiVector& phi, const HybridModelConfig& config) {
    return std::exp(log_genfun(phi, config));
}

StockChain make_stock_chain(Complex phi1, const HybridModelConfig& config) {
    const int T = config.contract.maturity_steps;
    const auto& m = config.market.garch;
    const auto& s = config.stock.garch;
    const double beta = config.stock.beta;

    StockChain chain;
    chain.phi1 = phi1;
    chain.T = T;
    chain.a1.assign(static_cast<std::size_t>(T + 1), Complex{});
    chain.a2.assign(static_cast<std::size_t>(T + 1), Complex{});
    chain.market_tail.assign(static_cast<std::size_t>(T + 1), Complex{});
    chain.lowest_valid_j = 1;

    // The stock-variance chain is needed all the way down to t = 0 for every j;
    // a domain error there propagates.
    Complex stock_total{};
    const Complex pb = phi1 * beta;
    bool market_ok = true;
    for (int t = T - 1; t >= 0; --t) {
        const Complex a2 = chain.a2[t + 1];
        const Complex den_s = 1.0 - 2.0 * s.a * a2;
        stock_total += s.w * a2 + neg_half_log(den_s, "A2 chain", t);
        chain.a2[t] = s.b * a2 - 0.5 * phi1 + phi1 * s.c - 0.5 * s.c * s.c +
                      0.5 * (phi1 - s.c) * (phi1 - s.c) / den_s;

        if (!market_ok) continue;
        const Complex a1 = chain.a1[t + 1];
        const Complex den_m = 1.0 - 2.0 * m.a * a1;
        if (!(den_m.real() > 0.0)) {
            // market_tail[t] and A1(t) are unusable, so j - 1 >= t + 1.
            market_ok = false;
            chain.lowest_valid_j = t + 2;
            continue;
        }
        chain.market_tail[t] = chain.market_tail[t + 1] + m.w * a1 - 0.5 * std::log(den_m);
        chain.a1[t] = m.b * a1 - 0.5 * phi1 * beta * beta + pb * m.c - 0.5 * m.c * m.c +
                      0.5 * (pb - m.c) * (pb - m.c) / den_m;
    }
    chain.stock_total = stock_total;
    return chain;
}

IssuerChain make_issuer_chain(Complex phi2, Complex phi3, Complex phi4, int max_j,
                              const HybridModelConfig& config) {
    const auto& v = config.firm.garch;
    const auto& in = config.intensity;

    IssuerChain chain;
    chain.phi2 = phi2;
    chain.phi3 = phi3;
    chain.phi4 = phi4;
    chain.b3.reserve(static_cast<std::size_t>(max_j));
    chain.b4.reserve(static_cast<std::size_t>(max_j));
    chain.sum.reserve(static_cast<std::size_t>(max_j));

    Complex b3 = -0.5 * phi2 + 0.5 * phi2 * phi2;
    Complex b4 = phi3;
    Complex sum{};
    chain.max_valid_j = 0;
    for (int d = 0; d < max_j; ++d) {
        // j = d + 1 uses B3, B4 at distance d and the sum over distances < d.
        chain.b3.push_back(b3);
        chain.b4.push_back(b4);
        chain.sum.push_back(sum);
        chain.max_valid_j = d + 1;
        if (d + 1 == max_j) break;
        const Complex den_v = 1.0 - 2.0 * (v.a * b3 + in.c_lambda * b4);
        if (!(den_v.real() > 0.0)) break;
        sum += v.w * b3 + in.w_lambda * b4 - 0.5 * std::log(den_v);
        b3 = square_update(v, b3, phi2, -0.5 * phi2, den_v);
        b4 = in.b_lambda * b4 + phi4;
    }
    return chain;
}

Complex log_genfun_split(const StockChain& stock, const IssuerChain& issuer, int j,
                         const HybridModelConfig& config) {
    const int T = stock.T;
    if (j < 1 || j > T) throw std::invalid_argument("log_genfun_split: need 1 <= j <= T");
    if (j < stock.lowest_valid_j) {
        throw GenfunDomainError("A1 chain", stock.lowest_valid_j - 1, Complex{});
    }
    if (j > issuer.max_valid_j) {
        throw GenfunDomainError("issuer chain", j - 1 - issuer.max_valid_j, Complex{});
    }
    const auto& m = config.market.garch;
    const double a_lambda = config.intensity.a_lambda;
    const Complex phi1 = stock.phi1;
    const Complex phi2 = issuer.phi2;
    const double beta_s = config.stock.beta;
    const double beta_v = config.firm.beta;
    const Complex load = phi2 * beta_v + phi1 * beta_s;
    const Complex quad = -0.5 * phi2 * beta_v * beta_v - 0.5 * phi1 * beta_s * beta_s;

    const Complex a1j = stock.a1[j];
    const Complex den_j = 1.0 - 2.0 * m.a * a1j;
    require_positive(den_j, "B1 splice", j - 1);
    Complex b1 = square_update(m, a1j, load, quad, den_j);

    // sum of ln(den) kept as a running product: every factor has Re > 0, so
    // the product turns by less than pi/2 per step and crossings of the
    // negative real axis can be counted from sign changes of Im.
    Complex linear{};
    Complex product{1.0, 0.0};
    double log_scale = 0.0;
    int winding = 0;
    for (int d = 0; d + 2 <= j; ++d) {
        const Complex den = 1.0 - 2.0 * (m.a * b1 + a_lambda * issuer.b4[d]);
        require_positive(den, "B1 chain", j - 2 - d);
        linear += b1;
        const Complex next = product * den;
        const bool was_upper = product.imag() >= 0.0;
        if (was_upper != (next.imag() >= 0.0) && next.real() < 0.0) {
            winding += was_upper ? 1 : -1;
        }
        product = next;
        if ((d & 63) == 63) {
            const double mag = std::abs(product);
            log_scale += std::log(mag);
            product /= mag;
        }
        b1 = square_update(m, b1, load, quad, den);
    }
    const Complex market_sum =
        m.w * linear -
        0.5 * (std::log(product) + Complex(log_scale, 2.0 * std::numbers::pi * winding));

    const double r = config.contract.r;
    const std::size_t last = static_cast<std::size_t>(j - 1);
    return phi2 * config.firm.initial_log_price + phi1 * config.stock.initial_log_price +
           phi1 * (r * T) + phi2 * (r * j) + stock.stock_total + stock.market_tail[last] +
           market_sum + issuer.sum[last] + b1 * config.market.h0 + stock.a2[0] * config.stock.h0 +
           issuer.b3[last] * config.firm.h0 + issuer.b4[last] * config.intensity.lambda0;
}

void log_genfun_split_batch(const StockChain& stock, const IssuerChain* const* issuers,
                            std::size_t count, int j, const HybridModelConfig& config,
                            Complex* out) {
    const int T = stock.T;
    if (j < 1 || j > T) throw std::invalid_argument("log_genfun_split_batch: need 1 <= j <= T");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (count == 0) return;
    for (std::size_t k = 1; k < count; ++k) {
        if (issuers[k]->phi3 != issuers[0]->phi3 || issuers[k]->phi4 != issuers[0]->phi4) {
            throw std::invalid_argument("log_genfun_split_batch: issuers must share phi3, phi4");
        }
    }
    const Complex a1j = j < stock.lowest_valid_j ? Complex(nan, 0.0) : stock.a1[j];
    const auto& m = config.market.garch;
    const Complex den_j = 1.0 - 2.0 * m.a * a1j;
    const double a_lambda = config.intensity.a_lambda;
    const double beta_s = config.stock.beta;
    const double beta_v = config.firm.beta;
    const Complex phi1 = stock.phi1;
    const double g = m.b + m.a * m.c * m.c;
    const double ac = m.a * m.c;
    const std::size_t steps = static_cast<std::size_t>(j - 1);
    // Lanes whose issuer chain stops short are evaluated on a shortened chain
    // and discarded at the end.
    const std::vector<Complex>& b4 = issuers[0]->b4;
    for (std::size_t k = 0; k < count; ++k) {
        if (issuers[k]->max_valid_j < j) {
            for (std::size_t q = 0; q < count; ++q) {
                try {
                    out[q] = log_genfun_split(stock, *issuers[q], j, config);
                } catch (const GenfunDomainError&) {
                    out[q] = Complex(nan, nan);
                }
            }
            return;
        }
    }

    // Lanes are processed in fixed-width blocks held in local arrays so the
    // inner loop vectorizes; short blocks repeat their last lane.
    constexpr std::size_t W = 8;
    const double am = m.a;
    std::vector<std::array<double, 5>> lane_out(count);  // b1 re/im, log-sum re/im, min Re(den)
    for (std::size_t base = 0; base < count; base += W) {
        double b1r[W], b1i[W], lr[W], li[W], pr[W], pi[W], wind[W], scale[W], minre[W];
        double qr[W], qi[W], hr[W], hi[W];
        for (std::size_t k = 0; k < W; ++k) {
            const std::size_t lane = std::min(base + k, count - 1);
            const Complex phi2 = issuers[lane]->phi2;
            const Complex load = phi2 * beta_v + phi1 * beta_s;
            const Complex quad = -0.5 * phi2 * beta_v * beta_v - 0.5 * phi1 * beta_s * beta_s;
            const Complex b1 = square_update(m, a1j, load, quad, den_j);
            b1r[k] = b1.real();
            b1i[k] = b1.imag();
            lr[k] = li[k] = pi[k] = wind[k] = scale[k] = 0.0;
            pr[k] = 1.0;
            minre[k] = den_j.real();
            qr[k] = quad.real();
            qi[k] = quad.imag();
            hr[k] = 0.5 * load.real();
            hi[k] = 0.5 * load.imag();
        }
        for (std::size_t d = 0; d < steps; ++d) {
            const double c0r = 1.0 - 2.0 * a_lambda * b4[d].real();
            const double c0i = -2.0 * a_lambda * b4[d].imag();
            for (std::size_t k = 0; k < W; ++k) {
                const double xr = b1r[k];
                const double xi = b1i[k];
                const double dr = c0r - 2.0 * am * xr;
                const double di = c0i - 2.0 * am * xi;
                minre[k] = dr < minre[k] ? dr : minre[k];
                lr[k] += xr;
                li[k] += xi;
                const double npr = pr[k] * dr - pi[k] * di;
                const double npi = pr[k] * di + pi[k] * dr;
                wind[k] += (npr < 0.0 ? 1.0 : 0.0) *
                           ((pi[k] >= 0.0 ? 1.0 : 0.0) - (npi >= 0.0 ? 1.0 : 0.0));
                pr[k] = npr;
                pi[k] = npi;
                // 2 (ac x - load/2)^2 / den
                const double kr = ac * xr - hr[k];
                const double ki = ac * xi - hi[k];
                const double sr = kr * kr - ki * ki;
                const double si = 2.0 * kr * ki;
                const double inv = 2.0 / (dr * dr + di * di);
                b1r[k] = g * xr + qr[k] + (sr * dr + si * di) * inv;
                b1i[k] = g * xi + qi[k] + (si * dr - sr * di) * inv;
            }
            if ((d & 63) == 63) {
                for (std::size_t k = 0; k < W; ++k) {
                    const double m2 = pr[k] * pr[k] + pi[k] * pi[k];
                    scale[k] += 0.5 * std::log(m2);
                    const double inv = 1.0 / std::sqrt(m2);
                    pr[k] *= inv;
                    pi[k] *= inv;
                }
            }
        }
        for (std::size_t k = 0; k < W && base + k < count; ++k) {
            const Complex logsum = std::log(Complex(pr[k], pi[k])) +
                                   Complex(scale[k], 2.0 * std::numbers::pi * wind[k]);
            lane_out[base + k] = {b1r[k], b1i[k], m.w * lr[k] - 0.5 * logsum.real(),
                                  m.w * li[k] - 0.5 * logsum.imag(), minre[k]};
        }
    }

    const double r = config.contract.r;
    const std::size_t last = steps;
    const Complex common = phi1 * config.stock.initial_log_price + phi1 * (r * T) +
                           stock.stock_total + stock.market_tail[last] +
                           stock.a2[0] * config.stock.h0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto& lane = lane_out[k];
        if (!(lane[4] > 0.0)) {
            out[k] = Complex(nan, nan);
            continue;
        }
        const IssuerChain& is = *issuers[k];
        const Complex b1(lane[0], lane[1]);
        const Complex market_sum(lane[2], lane[3]);
        out[k] = common + is.phi2 * config.firm.initial_log_price + is.phi2 * (r * j) +
                 market_sum + is.sum[last] + b1 * config.market.h0 + is.b3[last] * config.firm.h0 +
                 is.b4[last] * config.intensity.lambda0;
    }
}

}  // namespace vulnopt
