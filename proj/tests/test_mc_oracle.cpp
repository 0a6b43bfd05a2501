#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "vulnopt/genfun.hpp"
#include "vulnopt/mc_oracle.hpp"
#include "vulnopt/pricing.hpp"

using namespace vulnopt;

namespace {

McOptions options(std::int64_t n, std::uint64_t seed = 7) {
    McOptions o;
    o.n_paths = n;
    o.seed = seed;
    return o;
}

bool within(double a, double b, double se, double extra = 0.0) {
    return std::abs(a - b) <= 4.0 * std::hypot(se, extra) + 1e-15;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}) ==
          C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal and uniform draws") {
    double sum = 0.0, sq = 0.0;
    int n = 0;
    for (std::uint64_t p = 0; p < 5000; ++p) {
        for (double z : Philox4x32::normals(11, p, 3, 0)) {
            sum += z;
            sq += z * z;
            ++n;
        }
        for (double u : Philox4x32::uniforms(11, p, 3, 1)) {
            CHECK(u > 0.0);
            CHECK(u < 1.0);
        }
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sq / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(Philox4x32::normals(11, 9, 3, 0) == Philox4x32::normals(11, 9, 3, 0));
    CHECK(Philox4x32::normals(11, 9, 3, 0) != Philox4x32::normals(12, 9, 3, 0));
}

TEST_CASE("zero shocks follow the deterministic recursion") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=12"});
    const std::vector<PathRecord> paths = simulate_batch(c, 2, 1, ShockSource::zero);
    REQUIRE(paths.size() == 2u);
    PathState s = initial_state(c);
    double cum = 0.0;
    for (int t = 1; t <= 12; ++t) {
        const double lam = s.lambda_next;
        s = step(s, 0.0, 0.0, 0.0, c);
        cum += lam;
        CHECK(paths[0].log_v[t] == doctest::Approx(s.log_v).epsilon(1e-14));
        CHECK(paths[0].lambda[t] == doctest::Approx(lam).epsilon(1e-14));
        CHECK(paths[0].cum[t] == doctest::Approx(cum).epsilon(1e-14));
    }
    CHECK(paths[0].log_s_T == doctest::Approx(s.log_s).epsilon(1e-14));
    CHECK(paths[1].log_s_T == paths[0].log_s_T);
}

TEST_CASE("results do not depend on the worker count") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=21"});
    McOptions o = options(6000);
    o.workers = 1;
    const McEstimate a = mc_price_hybrid(c, o);
    o.workers = 3;
    const McEstimate b = mc_price_hybrid(c, o);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    o.seed = 8;
    CHECK(mc_price_hybrid(c, o).mean != a.mean);
}

TEST_CASE("antithetic pairs cancel odd functionals") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=1"});
    McOptions o = options(4000);
    o.antithetic = true;
    const auto est = mc_expectations(c, {[](const PathRecord& p) { return p.log_s_T; }}, o);
    const PathState s = step(initial_state(c), 0.0, 0.0, 0.0, c);
    CHECK(est[0].mean == doctest::Approx(s.log_s).epsilon(1e-14));
    CHECK(est[0].std_error < 1e-14);
}

TEST_CASE("discounted stock is a martingale") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=63"});
    const double disc = std::exp(-c.contract.r * 63);
    const auto est = mc_expectations(
        c, {[&](const PathRecord& p) { return disc * std::exp(p.log_s_T); }}, options(20000));
    CHECK(within(est[0].mean, std::exp(c.stock.initial_log_price), est[0].std_error));
}

TEST_CASE("one-step stock variance matches the quoted annual level") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=1"});
    const std::vector<PathRecord> paths = simulate_batch(c, 40000, 3);
    double sum = 0.0, sq = 0.0;
    for (const auto& p : paths) {
        sum += p.log_s_T;
        sq += p.log_s_T * p.log_s_T;
    }
    const double n = paths.size();
    const double var = (sq - sum * sum / n) / (n - 1);
    CHECK(var * 252 == doctest::Approx(1.22e-1).epsilon(0.03));
}

TEST_CASE("generating function at zero is exactly one") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=30"});
    const McComplexEstimate e = mc_genfun(c, PhiVector{0.0, 0.0, 0.0, 0.0, 10, 30}, options(2000));
    CHECK(e.mean == Complex(1.0, 0.0));
    CHECK(e.std_error_re == 0.0);
    CHECK(e.std_error_im == 0.0);
    CHECK_FALSE(e.overflow);
}

TEST_CASE("generating function agrees with the recursion") {
    const HybridModelConfig c = testing::reference_config({"contract.maturity_steps=20"});
    const PhiVector phis[] = {
        {Complex(0.5, 1.0), Complex(0.0, -2.0), -1.0, -1.0, 7, 20},
        {Complex(1.0, 0.0), Complex(1.0, 0.0), 0.0, -1.0, 20, 20},
        {Complex(0.0, 3.0), Complex(0.2, 0.5), -2.0, -0.5, 1, 20},
    };
    for (const PhiVector& phi : phis) {
        const Complex want = eval_genfun(phi, c);
        const McComplexEstimate e = mc_genfun(c, phi, options(20000));
        CAPTURE(phi.j);
        CHECK(within(e.mean.real(), want.real(), e.std_error_re));
        CHECK(within(e.mean.imag(), want.imag(), e.std_error_im));
    }
}

TEST_CASE("Pi integrand vanishes when the event is impossible") {
    const HybridModelConfig c =
        testing::reference_config({"contract.maturity_steps=20", "contract.lgd=1e-6"});
    const McEstimate e = mc_pi(c, make_pi_request(5, 10), options(2000));
    CHECK(e.mean == 0.0);
    CHECK(e.std_error == 0.0);
}

TEST_CASE("Pi integrands against the closed form") {
    const HybridModelConfig c =
        testing::reference_config({"contract.maturity_steps=20", "contract.lgd=0.97"});
    PiEngine engine(c, QuadratureSpec{});
    for (int kind : {1, 4, 6}) {
        const PiValue cf = engine.compute(make_pi_request(kind, 12));
        const McEstimate e = mc_pi(c, make_pi_request(kind, 12), options(20000));
        CAPTURE(kind);
        CHECK(e.mean > 0.0);
        CHECK(within(e.mean, cf.value, e.std_error, cf.error));
    }
}

TEST_CASE("payoff identities hold path by path") {
    HybridModelConfig c = testing::reference_config({"contract.maturity_steps=21"});
    testing::zero_intensity(c);
    const McOptions o = options(3000);
    const double df = mc_default_free(c, o).mean;
    CHECK(mc_price_hybrid(c, o).mean == doctest::Approx(df).epsilon(1e-14));
    CHECK(mc_price_hybrid(c, o, HybridMode::tau_sampled).mean ==
          doctest::Approx(df).epsilon(1e-14));
    CHECK(mc_price_reduced(c, o).mean == doctest::Approx(df).epsilon(1e-14));

    HybridModelConfig full =
        testing::reference_config({"contract.maturity_steps=21", "contract.alpha=1"});
    CHECK(mc_price_reduced(full, o).mean ==
          doctest::Approx(mc_default_free(full, o).mean).epsilon(1e-14));
}

TEST_CASE("Monte Carlo prices against the closed form") {
    const HybridModelConfig c =
        testing::reference_config({"contract.maturity_steps=21", "contract.lgd=0.97"});
    const QuadratureSpec spec;
    const McOptions o = options(20000);
    const PriceValue df = default_free_price(c, spec);
    const PriceBreakdown h = hybrid_price(c, spec);
    const PriceBreakdown r = reduced_form_price(c, spec);
    const McEstimate mdf = mc_default_free(c, o);
    const McEstimate mh = mc_price_hybrid(c, o);
    const McEstimate mr = mc_price_reduced(c, o);
    CHECK(within(mdf.mean, df.value, mdf.std_error, df.error));
    CHECK(within(mh.mean, h.final_price, mh.std_error, h.quadrature_error));
    CHECK(within(mr.mean, r.final_price, mr.std_error, r.quadrature_error));
}

TEST_CASE("survival estimates") {
    HybridModelConfig c = testing::reference_config({"contract.maturity_steps=30"});
    const McEstimate e = mc_survival(c, 30, options(20000));
    CHECK(within(e.mean, survival_probability(c, 30), e.std_error));

    c.intensity = IntensityParams{};
    c.intensity.w_lambda = c.intensity.lambda0 = 2e-3;
    const McEstimate flat = mc_survival(c, 30, options(500));
    CHECK(flat.mean == doctest::Approx(std::exp(-0.06)).epsilon(1e-13));
    CHECK(flat.std_error < 1e-14);
}

TEST_CASE("default-time sampling agrees with survival weighting") {
    // Raised intensity so that defaults occur often enough to matter.
    HybridModelConfig c = testing::reference_config(
        {"contract.maturity_steps=30", "contract.lgd=0.97", "contract.alpha=0.3"});
    c.intensity.w_lambda *= 20.0;
    c.intensity.lambda0 *= 20.0;
    const PathFunctional tau = hybrid_payoff(c, HybridMode::tau_sampled);
    const PathFunctional weighted = hybrid_payoff(c, HybridMode::survival_weighted);
    const auto est = mc_expectations(
        c, {[&](const PathRecord& p) { return tau(p) - weighted(p); }, weighted}, options(20000),
        true);
    CHECK(std::abs(est[0].mean) <= 4.0 * est[0].std_error);
    CHECK(est[0].std_error > 0.0);

    const std::vector<PathRecord> paths = simulate_batch(c, 2000, 5, ShockSource::philox, true);
    int defaults = 0;
    for (const auto& p : paths) {
        CHECK(p.tau >= 1);
        CHECK(p.tau <= 31);
        defaults += p.tau <= 30;
    }
    CHECK(defaults > 0);
}
