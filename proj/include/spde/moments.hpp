#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spde/conditions.hpp"
#include "spde/error.hpp"
#include "spde/grid.hpp"
#include "spde/kernels.hpp"
#include "spde/noise.hpp"
#include "spde/rng.hpp"

namespace spde::moments {

struct MomentRow {
    std::string model;
    double t = 0.0;
    double p = 0.0;
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};

struct MomentReport {
    std::vector<MomentRow> rows;
    std::optional<double> fitted_lambda;
    double kappa = 1.0;
    std::optional<double> closed_form_lambda;
};

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};
// Sample mean with its jackknife standard error.
MeanEstimate jackknife_mean(std::span<const double> values);

// E|X|^p for each p, from i.i.d. samples of X(t).
std::vector<MomentRow> estimate_moments(std::span<const double> samples, const std::vector<double>& ps,
                                        double t = 0.0, const std::string& model = "");

// Least-squares slope of log(estimate) against t^kappa, intercept free.
double lyapunov_fit(const std::vector<MomentRow>& rows, double p, double kappa);

enum class Model { gbm, pam_white, gfbm };
Model parse_model(const std::string& name); // CapabilityError when unknown
const char* to_string(Model m) noexcept;

struct LyapunovValue {
    double lambda = 0.0;
    double kappa = 1.0;
};
// gbm: p(p-1)/2 at kappa 1; pam_white: p(p^2-1)/24 at kappa 1;
// gfbm: p(p-1)/2 at kappa 2H.
LyapunovValue lyapunov_closed_form(Model model, double p, double hurst = 0.5);

// True iff lambda_p / p is strictly increasing in p.
bool intermittency_check(const std::map<double, double>& lambda_by_p);

// Raised when the noise violates the existence condition; carries the verdict.
class ConditionRejected : public DomainError {
  public:
    ConditionRejected(const std::string& what, conditions::ConditionVerdict verdict)
        : DomainError(what), verdict_(std::move(verdict)) {}
    const conditions::ConditionVerdict& verdict() const noexcept { return verdict_; }

  private:
    conditions::ConditionVerdict verdict_;
};

struct FkOptions {
    std::size_t quad_steps = 128;
    std::optional<double> delta_floor; // default: half the quadrature step
    bool zero_kernel = false;          // gamma = 0, for testing
};

struct FkEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    // Same replicas with the floor halved.
    double estimate_half_floor = 0.0;
    double stderr_half_floor = 0.0;
    double delta_floor = 0.0;
    std::size_t replicas = 0;
    conditions::ConditionVerdict verdict;
};

// E[u(t,x)^2] = E exp( int_0^t int_0^t gamma(r-s) f(B^1_r - B^2_s) dr ds )
// for fractional(H) x riesz(alpha) noise in dimension d.
FkEstimate fk_second_moment(double t, const NoiseSpec& spec, std::size_t d, std::size_t replicas,
                            const FkOptions& options, const RngStream& rng);

// heat: (4H - alpha)/(2 - alpha); wave: (2H + 2 - alpha)/(3 - alpha).
double intermittency_exponent_predicted(kernels::OperatorKind op, double alpha, double hurst);

enum class Axis { time, space };
const char* to_string(Axis a) noexcept;

struct HolderOptions {
    std::size_t min_lag = 2;
    std::size_t max_lag = 32;
};

struct HolderFit {
    double exponent = 0.0;
    std::vector<double> lags;  // physical lag lengths
    std::vector<double> norms; // replica-pooled ||Delta u||_p
};

// Slope of log ||u(z + h) - u(z)||_p against log h over dyadic lags, using
// points with t >= t_max / 2. Fields must share one grid (nodes layout).
HolderFit holder_estimate(const std::vector<Field>& ensemble, double p, Axis axis,
                          const HolderOptions& options = {});

} // namespace spde::moments
