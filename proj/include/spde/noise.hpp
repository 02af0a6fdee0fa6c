#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spde/grid.hpp"
#include "spde/rng.hpp"

namespace spde {

inline constexpr std::size_t default_cholesky_cap = 2048;

// Temporal covariance gamma of a space-time homogeneous noise.
struct TimeKernel {
    enum class Kind { white, fractional, radial_spectral };
    Kind kind = Kind::white;
    double hurst = 0.5;    // fractional: gamma(t) = |t|^{2H-2}, H in (1/2,1)
    double exponent = 0.0; // radial_spectral: nu(dtau) = |tau|^exponent dtau

    static TimeKernel white() { return {}; }
    static TimeKernel fractional(double h) { return {Kind::fractional, h, 0.0}; }
    static TimeKernel radial_spectral(double e) { return {Kind::radial_spectral, 0.5, e}; }
};

// Spatial covariance f.
struct SpaceKernel {
    enum class Kind { white, riesz, radial_spectral };
    Kind kind = Kind::white;
    double alpha = 0.0;    // riesz: f(x) = |x|^{-alpha}, alpha in (0,d)
    double exponent = 0.0; // radial_spectral: mu(dxi) = |xi|^exponent dxi

    static SpaceKernel white() { return {}; }
    static SpaceKernel riesz(double a) { return {Kind::riesz, a, 0.0}; }
    static SpaceKernel radial_spectral(double e) { return {Kind::radial_spectral, 0.0, e}; }
};

// Covariance E[F(A)F(B)] = int_A int_B gamma(t-s) f(x-y).
struct NoiseSpec {
    TimeKernel time;
    SpaceKernel space;

    static NoiseSpec white() { return {}; }
    static NoiseSpec fractional_riesz(double hurst, double alpha) {
        return {TimeKernel::fractional(hurst), SpaceKernel::riesz(alpha)};
    }

    // Throws DomainError if a parameter leaves its admissible range in
    // spatial dimension d.
    void validate(std::size_t d) const;
    std::string describe() const;
};

// Axis-aligned space-time box [t0,t1] x prod_i [lo_i, hi_i]. An empty
// spatial part means the pure time factor.
struct CellBox {
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<double> lo;
    std::vector<double> hi;
};

// R_H(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double hurst, double t, double s);

// int_{I} int_{J} gamma(u-v) du dv for one time kernel.
double time_cell_covariance(const TimeKernel& kernel, double a0, double a1, double b0, double b1);
// int_{A} int_{B} f(x-y) dx dy for boxes in R^d (d = lo.size()).
double space_cell_covariance(const SpaceKernel& kernel, const std::vector<double>& a_lo,
                             const std::vector<double>& a_hi, const std::vector<double>& b_lo,
                             const std::vector<double>& b_hi);
double cell_covariance(const CellBox& a, const CellBox& b, const NoiseSpec& spec);

// Cholesky factor with the diagonal-jitter policy: plain attempt, then
// eps * trace / n added with eps doubling from 1e-14 up to 1e-10.
struct CholeskyResult {
    Eigen::MatrixXd lower;
    double jitter = 0.0; // eps actually used (0 when none was needed)
};
CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& covariance);

Path sample_bm_path(const TimeGrid& grid, const RngStream& rng);
Field sample_white_noise_sheet(const SpaceTimeGrid& grid, const RngStream& rng);

// Exact Gaussian fBm on the nodes of a grid via a cached Cholesky factor.
class FbmSampler {
  public:
    FbmSampler(double hurst, TimeGrid grid, std::size_t cap = default_cholesky_cap);

    double hurst() const noexcept { return hurst_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    double jitter() const noexcept { return jitter_; }
    Path sample(const RngStream& rng) const;

  private:
    double hurst_;
    TimeGrid grid_;
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
};

Path sample_fbm_path(double hurst, const TimeGrid& grid, const RngStream& rng,
                     std::size_t cap = default_cholesky_cap);

// Jointly Gaussian cell masses of a space-time homogeneous noise.
//
// The covariance separates as C_time (x) C_space, so the sampler keeps one
// Cholesky factor per factor and draws W = L_t Z L_x^T. The cap applies to
// each factor dimension.
class HomogeneousNoiseSampler {
  public:
    HomogeneousNoiseSampler(SpaceTimeGrid grid, NoiseSpec spec,
                            std::size_t cap = default_cholesky_cap);

    const SpaceTimeGrid& grid() const noexcept { return grid_; }
    const NoiseSpec& spec() const noexcept { return spec_; }
    Field sample(const RngStream& rng) const;

    // Covariance between slab pairs and between spatial cells.
    const Eigen::MatrixXd& time_covariance() const noexcept { return time_cov_; }
    const Eigen::MatrixXd& space_covariance() const noexcept { return space_cov_; }

  private:
    SpaceTimeGrid grid_;
    NoiseSpec spec_;
    Eigen::MatrixXd time_cov_;
    Eigen::MatrixXd space_cov_;
    Eigen::MatrixXd time_lower_;
    Eigen::MatrixXd space_lower_;
    bool time_white_ = false;
    bool space_white_ = false;
};

Field sample_homogeneous_noise(const SpaceTimeGrid& grid, const NoiseSpec& spec,
                               const RngStream& rng, std::size_t cap = default_cholesky_cap);

} // namespace spde
