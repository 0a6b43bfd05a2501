#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "support.hpp"
#include "vulnopt/genfun.hpp"

namespace testing {

using vulnopt::AssetBlock;
using vulnopt::Complex;
using vulnopt::HybridModelConfig;

// int g(z) dz over [-half_width, half_width] by GSL adaptive Gauss-Kronrod;
// the integrands below are negligible outside.
inline double integrate_real_line(const std::function<double(double)>& g, double half_width) {
    gsl_set_error_handler_off();
    gsl_integration_workspace* w = gsl_integration_workspace_alloc(10000);
    gsl_function F;
    F.function = [](double z, void* p) {
        return (*static_cast<std::function<double(double)>*>(p))(z);
    };
    F.params = const_cast<std::function<double(double)>*>(&g);
    double result = 0.0, err = 0.0;
    gsl_integration_qag(&F, -half_width, half_width, 1e-16, 1e-13, 10000, GSL_INTEG_GAUSS61, w,
                        &result, &err);
    gsl_integration_workspace_free(w);
    return result;
}

inline Complex quadrature_oracle(Complex mu1, Complex mu2, double mu3, Complex mu4, double h) {
    const double sq = std::sqrt(h);
    auto integrand = [=](double z) {
        const double q = z - mu3 * sq;
        return std::exp(mu1 * sq * z + mu2 * q * q + mu4 * z * z) *
               std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    };
    const double half_width = 60.0 + std::abs(mu3 * sq);
    return {integrate_real_line([&](double z) { return integrand(z).real(); }, half_width),
            integrate_real_line([&](double z) { return integrand(z).imag(); }, half_width)};
}

// Random GARCH and intensity parameters on a 30-step horizon.
inline HybridModelConfig random_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    HybridModelConfig c = reference_config();
    for (AssetBlock* b : {&c.market, &c.stock, &c.firm}) {
        b->h0 = 1e-5 + 1e-3 * u(rng);
        b->garch.w = 1e-7 * u(rng);
        b->garch.b = 0.5 + 0.45 * u(rng);
        b->garch.a = 1e-6 + 5e-6 * u(rng);
        b->garch.c = 300.0 * u(rng);
    }
    c.stock.beta = 0.5 + u(rng);
    c.firm.beta = 0.5 + u(rng);
    c.intensity.b_lambda = 0.99 * u(rng);
    c.intensity.a_lambda = 1e-4 * u(rng);
    c.intensity.c_lambda = 1e-4 * u(rng);
    c.contract.maturity_steps = 30;
    return c;
}

}  // namespace testing
