#pragma once

// Joint conditional generating function
//
//   f(0; phi) = E[ exp{ phi1 ln S(T) + phi2 ln V(j) + phi3 Lambda(j)
//                       + phi4 sum_{k<j} Lambda(k) } ]
//
// evaluated by backward recursion of exponent coefficients. For j <= t <= T
// only the stock and index variances carry state (A coefficients); below the
// trigger period the issuer variance and the intensity enter as well (B
// coefficients), spliced onto A at t = j - 1.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "vulnopt/model.hpp"

namespace vulnopt {

using Complex = std::complex<double>;

// Raised when a Gaussian-quadratic expectation does not exist, i.e. the
// argument of one of the -1/2 ln(1 - 2x) terms has a nonpositive real part.
// With the real part positive the principal logarithm is continuous along the
// recursion, so this check also rules out branch-cut crossings.
class GenfunDomainError : public std::domain_error {
public:
    GenfunDomainError(const std::string& where, int t, Complex argument);

    int t() const { return t_; }
    Complex argument() const { return argument_; }

private:
    int t_;
    Complex argument_;
};

struct PhiVector {
    Complex phi1;
    Complex phi2;
    Complex phi3;
    Complex phi4;
    int j = 1;  // trigger period, 1 <= j <= T
    int T = 1;
};

// Coefficients on 1, h_m(t+1), h_s(t+1).
struct ACoeffs {
    Complex a0;
    Complex a1;
    Complex a2;
};

// Coefficients on 1, h_m(t+1), h_s(t+1), h_v(t+1), Lambda(t+1).
struct BCoeffs {
    Complex b0;
    Complex b1;
    Complex b2;
    Complex b3;
    Complex b4;
};

// E[exp{mu1 sqrt(h) Z + mu2 (Z - mu3 sqrt(h))^2 + mu4 Z^2}] for Z ~ N(0,1).
// Throws GenfunDomainError unless Re(1 - 2(mu2 + mu4)) > 0.
Complex gauss_quadratic_expectation(Complex mu1, Complex mu2, double mu3, Complex mu4,
                                    double h);
Complex log_gauss_quadratic_expectation(Complex mu1, Complex mu2, double mu3, Complex mu4,
                                        double h);

// One backward A step, A(t+1) -> A(t), in the printed Heston-Nandi form
//   A1(t) = b A1 - phi beta^2/2 + phi beta c - c^2/2 + (phi beta - c)^2 / (2(1 - 2 a A1)).
// `t` only labels diagnostics.
ACoeffs a_step(const ACoeffs& next, Complex phi1, const HybridModelConfig& config, int t = -1);

// Same step in completed-square form
//   A1(t) = b A1 + a c^2 A1 - phi beta^2/2 + 2(a c A1 - phi beta/2)^2 / (1 - 2 a A1).
// Kept as an independent algebraic route for cross-checking a_step.
ACoeffs a_step_completed_square(const ACoeffs& next, Complex phi1,
                                const HybridModelConfig& config, int t = -1);

// A(t) for t = from_t, from_t - 1, ..., to_t (element 0 is A(from_t) = 0).
std::vector<ACoeffs> a_recursion(Complex phi1, const HybridModelConfig& config, int from_t,
                                 int to_t);

BCoeffs b_terminal_from_a(const ACoeffs& a_at_j, const PhiVector& phi,
                          const HybridModelConfig& config);

BCoeffs b_step(const BCoeffs& next, const PhiVector& phi, const HybridModelConfig& config,
               int t = -1);

// Runs b_step from B(from_t) down to B(to_t); returns B(to_t).
BCoeffs b_recursion(const BCoeffs& terminal, const PhiVector& phi,
                    const HybridModelConfig& config, int from_t, int to_t);

// ln f(0; phi), the exponent before exponentiation.
Complex log_genfun(const PhiVector& phi, const HybridModelConfig& config);
Complex eval_genfun(const PhiVector& phi, const HybridModelConfig& config);

// ---------------------------------------------------------------------------
// Split evaluation for quadrature grids.
//
// For fixed phi1 the A chain (and the stock-variance part of the B chain,
// which follows the same map) does not depend on j or on the issuer
// arguments. For fixed (phi2, phi3, phi4) the issuer variance and intensity
// coefficients depend only on the distance from the splice. Only the index
// variance coefficient couples the two and has to be rerun per (phi, j).

struct StockChain {
    Complex phi1;
    int T = 0;
    std::vector<Complex> a1;           // A1(t), t = 0..T
    std::vector<Complex> a2;           // A2(t), t = 0..T
    std::vector<Complex> market_tail;  // sum_{u=t}^{T-1} [w_m A1(u+1) - ln(1 - 2 a_m A1(u+1))/2]
    Complex stock_total;               // sum_{u=0}^{T-1} [w_s A2(u+1) - ln(1 - 2 a_s A2(u+1))/2]
    int lowest_valid_j = 1;            // j below this hit a domain error in A1
};

struct IssuerChain {
    Complex phi2;
    Complex phi3;
    Complex phi4;
    std::vector<Complex> b3;   // B3 at distance d = 0.. from the splice (t = j - 1 - d)
    std::vector<Complex> b4;
    std::vector<Complex> sum;  // sum_{d<n} [w_v B3 + w_l B4 - ln(1 - 2(a_v B3 + c_l B4))/2]
    int max_valid_j = 0;       // largest j whose issuer chain stayed in-domain
};

StockChain make_stock_chain(Complex phi1, const HybridModelConfig& config);
IssuerChain make_issuer_chain(Complex phi2, Complex phi3, Complex phi4, int max_j,
                              const HybridModelConfig& config);

// ln f(0; phi1, phi2, phi3, phi4) at trigger period j from precomputed chains.
Complex log_genfun_split(const StockChain& stock, const IssuerChain& issuer, int j,
                         const HybridModelConfig& config);

// log_genfun_split for one stock chain against `count` issuer chains that share
// phi3 and phi4 (only phi2 differs). Entries where the function is undefined
// are set to NaN instead of throwing.
void log_genfun_split_batch(const StockChain& stock, const IssuerChain* const* issuers,
                            std::size_t count, int j, const HybridModelConfig& config,
                            Complex* out);

}  // namespace vulnopt
