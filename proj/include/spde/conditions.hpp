#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spde/kernels.hpp"
#include "spde/rng.hpp"

namespace spde::conditions {

using kernels::OperatorKind;

enum class Method { closed_form, quadrature };
const char* to_string(Method m) noexcept;

// Outcome of an existence check. integral_estimate is empty when the
// integral diverges.
struct ConditionVerdict {
    bool satisfied = false;
    std::optional<double> integral_estimate;
    Method method = Method::closed_form;
    std::map<std::string, double> parameters;
};

// Radial tempered measure on R^dim: either Lebesgue measure or
// c |xi|^exponent dxi with exponent > -dim.
struct SpectralMeasure {
    enum class Kind { lebesgue, power };
    Kind kind = Kind::lebesgue;
    double exponent = 0.0;
    double constant = 1.0;
    std::size_t dim = 1;

    static SpectralMeasure lebesgue(std::size_t dim);
    // Spectral measure of the Riesz kernel |x|^{-alpha}: exponent alpha - d.
    static SpectralMeasure riesz(double alpha, std::size_t dim);
    // Spectral measure of gamma(t) = |t|^{2H-2} on R: exponent 1 - 2H.
    static SpectralMeasure fractional_time(double hurst);
    static SpectralMeasure power(double exponent, double constant, std::size_t dim);

    // alpha such that the density is |xi|^{alpha - dim} (dim for Lebesgue).
    double riesz_order() const noexcept;
};

// int (1+|xi|^2)^{-1} mu(dxi) for the Riesz measure: finite iff alpha < d ^ 2.
ConditionVerdict check_dalang_riesz(double alpha, std::size_t d);

// Fractional-in-time, Riesz-in-space linear equation:
// heat needs alpha < 4H, wave needs alpha < 2H + 1.
ConditionVerdict check_fractional(OperatorKind op, double alpha, double hurst, std::size_t d);

// int (1+|xi|^2)^{-kappa} mu(dxi). Divergence is decided from the exponents;
// the value comes from adaptive quadrature of the radial integral.
ConditionVerdict dalang_integral_numeric(const SpectralMeasure& mu, double kappa, std::size_t d);

// Joint space-time criterion for general nu (x) mu:
//   heat: int int 1/(1 + tau^2 + |xi|^4) nu(dtau) mu(dxi) < inf
//   wave: int (1+|xi|^2)^{-1/2} int 1/(1 + tau^2 + |xi|^2) nu(dtau) mu(dxi) < inf
ConditionVerdict general_joint_condition(OperatorKind op, const SpectralMeasure& nu,
                                         const SpectralMeasure& mu, std::size_t d);

struct HolderOrders {
    double time = 0.0;
    double space = 0.0;
};

// Orders without the epsilon loss, given eta in (0,1) with
// int (1+|xi|^2)^{-eta} mu(dxi) < inf.
HolderOrders predicted_holder(OperatorKind op, double eta);
// Heat equation with Riesz(alpha) space and fractional(H) time covariance.
// The space order is capped at 1.
HolderOrders predicted_holder_fractional(OperatorKind op, double alpha, double hurst,
                                         std::size_t d);

// Integrable profile g >= 0 on [0,T] driving the recursion
// f_{n+1}(t) <= int_0^t f_n(s) g(t-s) ds.
class GProfile {
  public:
    static GProfile constant(double beta);
    static GProfile heat_1d();
    static GProfile wave_1d();
    // Generic profile; sampling uses a tabulated inverse distribution.
    static GProfile from_function(std::function<double(double)> g, std::string name);

    const std::string& name() const noexcept { return name_; }
    double operator()(double s) const { return g_(s); }
    // G(T) = int_0^T g.
    double integral(double t_max) const;
    // Inverse-CDF sampler of density g/G(T) on [0,T]; u in (0,1).
    std::function<double(double)> sampler(double t_max) const;

  private:
    enum class Kind { constant, heat_1d, wave_1d, generic };
    Kind kind_ = Kind::generic;
    double beta_ = 0.0;
    std::function<double(double)> g_;
    std::string name_;
};

struct GronwallCertificate {
    double g_total = 0.0;                 // G(T)
    std::vector<double> a;                // a_n = G(T)^n P(S_n <= T), n = 0..n_max
    std::vector<double> a_stderr;
    std::vector<double> bounds;           // M a_n
    std::vector<double> partial_sums_p1;  // sum_{k<=n} a_k
    std::vector<double> partial_sums_p2;  // sum_{k<=n} a_k^{1/2}
    std::size_t replicas = 0;
};

// Monte Carlo estimate of the sequence a_n bounding solutions of the
// convolution recursion, with S_n a sum of n i.i.d. draws of density g/G(T).
GronwallCertificate dalang_gronwall_certificate(const GProfile& g, double t_max, double bound_m,
                                                std::size_t n_max, std::size_t replicas,
                                                const RngStream& rng);

} // namespace spde::conditions
