#pragma once

// Fourier inversion of (joint) characteristic functions into tail
// probabilities, and the eight survival-weighted joint-event expectations
// Pi_{j,1..8} used by the hybrid price.
//
// Quadrature: every semi-infinite axis is truncated at the first U (growing
// by sqrt 2 from 1 up to phi_max) where the integrand envelope has dropped below
// abs_tol/10. [0, U] is integrated with Gauss-Legendre panels at order m and
// m/2 (m starts at 2 nodes_per_panel); the order-m result is kept and the
// difference is the error estimate. A single panel first has its order
// doubled, then panels are bisected. The cross term of a joint inversion uses
// the tensor product of the two marginal layouts and doubles both orders when
// its estimate is too large. Nodes never touch u = 0.

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "vulnopt/genfun.hpp"
#include "vulnopt/model.hpp"

namespace vulnopt {

struct QuadratureSpec {
    double phi_max = 1000.0;  // hard truncation bound per axis
    int panels = 64;          // maximum number of adaptive panels per axis
    int nodes_per_panel = 8;  // base Gauss-Legendre order n (error check uses 2n)
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;

    void validate() const;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double error_estimate)
        : std::runtime_error(what), error_estimate_(error_estimate) {}
    double error_estimate() const { return error_estimate_; }

private:
    double error_estimate_;
};

struct Panel {
    double lo = 0.0;
    double hi = 0.0;
};

struct AxisLayout {
    std::vector<Panel> panels;
    double upper = 0.0;
    int order = 0;  // Gauss-Legendre order per panel; order / 2 is the comparison rule
};

// Panels used by an inversion: the single-axis integrals and the tensor grid
// of the cross term are laid out independently.
struct InversionLayouts {
    AxisLayout marginal1;
    AxisLayout marginal2;
    AxisLayout grid1;
    AxisLayout grid2;
};

struct InversionResult {
    double value = 0.0;  // reported value (probabilities clamped to [-tol, 1 + tol])
    double raw = 0.0;    // unclamped quadrature value
    double error = 0.0;  // error estimate
    std::vector<std::string> warnings;
    InversionLayouts layouts;
};

// Integral over [0, phi_max] of Re[h(u)], with |h| as the decay envelope,
// refined until the error estimate is below `goal` (abs_tol if goal <= 0).
// h may throw GenfunDomainError; the axis is then truncated at the last
// healthy point and the error estimate inflated.
struct AxisIntegral {
    double value = 0.0;
    double error = 0.0;
    AxisLayout layout;
    std::vector<std::string> warnings;
};
AxisIntegral integrate_half_line(const std::function<Complex(double)>& h,
                                 const QuadratureSpec& spec, double goal = 0.0);

// Same integral on fixed panels at layout.order, without adaptation.
AxisIntegral integrate_on_layout(const std::function<Complex(double)>& h,
                                 const AxisLayout& layout);

// Gauss-Legendre nodes and weights for a layout at order n per panel.
struct AxisNodes {
    std::vector<double> u;
    std::vector<double> w;
};
AxisNodes layout_nodes(const AxisLayout& layout, int order);

// P(X >= x) from the characteristic function of X (charfn(0) = 1).
InversionResult tail_prob_1d(const std::function<Complex(double)>& charfn, double x,
                             const QuadratureSpec& spec);

// Characteristic function of (Y1, Y2) evaluated on whole node sets.
class JointCharFn {
public:
    virtual ~JointCharFn() = default;
    // cf(u, 0) and cf(0, u); entries may be NaN where the function is undefined.
    virtual void marginal1(const std::vector<double>& u, std::vector<Complex>& out) const;
    virtual void marginal2(const std::vector<double>& u, std::vector<Complex>& out) const;
    // out[i * u2.size() + k] = cf(u1[i], sign2 * u2[k]).
    virtual void grid(const std::vector<double>& u1, const std::vector<double>& u2, int sign2,
                      std::vector<Complex>& out) const;
    virtual Complex at(double u1, double u2) const = 0;
};

class FunctionJointCharFn : public JointCharFn {
public:
    explicit FunctionJointCharFn(std::function<Complex(double, double)> fn)
        : fn_(std::move(fn)) {}
    Complex at(double u1, double u2) const override { return fn_(u1, u2); }

private:
    std::function<Complex(double, double)> fn_;
};

// P(Y1 >= x1, Y2 > x2) =
//   1/4 + 1/(2 pi) int Re[e^{-iu x1} cf(u,0)/(iu)] + 1/(2 pi) int Re[e^{-iu x2} cf(0,u)/(iu)]
//   - 1/(2 pi^2) int int (Re[e^{-iu1 x1 - iu2 x2} cf(u1,u2)]
//                         - Re[e^{-iu1 x1 + iu2 x2} cf(u1,-u2)]) / (u1 u2).
// `pinned` fixes every panel (used to keep paired kernels on the same nodes);
// no adaptation happens then.
InversionResult joint_tail_prob_2d(const JointCharFn& cf, double x1, double x2,
                                   const QuadratureSpec& spec,
                                   const InversionLayouts* pinned = nullptr);
InversionResult joint_tail_prob_2d(const std::function<Complex(double, double)>& cf, double x1,
                                   double x2, const QuadratureSpec& spec);

// ---------------------------------------------------------------------------
// Pi kernels.

// Offsets (s, v, phi3, phi4) of f(0; iu1 + s, -iu2 + v, phi3, phi4):
//   Pi_1 (1,0,-1,-1)  Pi_2 (0,0,-1,-1)  Pi_3 (1,0,0,-1)  Pi_4 (0,0,0,-1)
//   Pi_5 (1,1,-1,-1)  Pi_6 (0,1,-1,-1)  Pi_7 (1,1,0,-1)  Pi_8 (0,1,0,-1)
struct PiWeights {
    int s_power = 0;
    int v_power = 0;
    int lambda_j = 0;      // phi3
    int lambda_before = -1;  // phi4
};
PiWeights pi_weights(int kind);

struct PiRequest {
    int kind = 1;  // 1..8
    int j = 1;
    PiWeights weights;
};
PiRequest make_pi_request(int kind, int j);

struct PiValue {
    double value = 0.0;        // unnormalized expectation
    double error = 0.0;
    double normalizer = 0.0;   // f(0; s, v, phi3, phi4), the event-free cap
    double probability = 0.0;  // value / normalizer
    std::vector<std::string> warnings;
};

// Evaluates Pi kernels for one config, caching the j-independent generating
// function chains across kinds and trigger periods. Not thread-safe.
class PiEngine {
public:
    PiEngine(const HybridModelConfig& config, const QuadratureSpec& spec);
    ~PiEngine();

    PiValue compute(const PiRequest& request);

    // Both members of a pair that differ only in phi3 (kinds 1/3, 2/4, 5/7,
    // 6/8), integrated on shared panels so their difference is well resolved.
    std::pair<PiValue, PiValue> compute_pair(int kind_with_default, int j);

    // Reduced-form terms E[e^{phi3 Lambda(j) - sum_{k<j} Lambda} (S(T) - K)^+]
    // by 1D inversion: `first` has phi3 = 0, `second` phi3 = -1 on the same nodes.
    std::pair<PiValue, PiValue> compute_reduced_pair(int j);

    Complex log_f(Complex phi1, Complex phi2, double phi3, double phi4, int j);

    const HybridModelConfig& config() const { return config_; }
    const QuadratureSpec& spec() const { return spec_; }

private:
    class JointKernel;
    const StockChain& stock_chain(Complex phi1);
    const IssuerChain& issuer_chain(Complex phi2, double phi3, double phi4);
    void trim_caches();

    HybridModelConfig config_;
    QuadratureSpec spec_;
    std::map<std::pair<double, double>, std::unique_ptr<StockChain>> stock_cache_;
    std::map<std::tuple<double, double, double, double>, std::unique_ptr<IssuerChain>>
        issuer_cache_;
};

PiValue compute_pi(const PiRequest& request, const HybridModelConfig& config,
                   const QuadratureSpec& spec);

}  // namespace vulnopt
