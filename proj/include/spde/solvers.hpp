#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spde/grid.hpp"
#include "spde/noise.hpp"
#include "spde/rng.hpp"

namespace spde::solvers {

// Globally Lipschitz coefficient sigma with its constant C_sigma.
class LipschitzFn {
  public:
    enum class Tag { identity, affine, bounded_smooth };

    static LipschitzFn identity();
    // a x + b
    static LipschitzFn affine(double a, double b);
    // "sin", "tanh" or "atan"; all have C_sigma = 1.
    static LipschitzFn bounded_smooth(const std::string& name);

    double operator()(double x) const;
    double lipschitz_constant() const noexcept;
    Tag tag() const noexcept { return tag_; }
    const std::string& name() const noexcept { return name_; }
    double slope() const noexcept { return a_; }
    double offset() const noexcept { return b_; }

  private:
    Tag tag_ = Tag::identity;
    std::string name_ = "identity";
    double a_ = 1.0;
    double b_ = 0.0;
};

// sum_k X(t_k) (B_{t_{k+1}} - B_{t_k}); integrand[k] must only use
// information up to t_k.
double ito_sum(std::span<const double> integrand, std::span<const double> increments);

struct PicardTrace {
    // sup_l2_diff[n-1] = max over grid nodes of the replica mean of
    // |X_n - X_{n-1}|^2, n = 1..n_iter.
    std::vector<double> sup_l2_diff;
    // Iterates X_0..X_{n_iter} of replica 0.
    std::vector<Path> paths;
    std::vector<Field> fields;
    std::size_t replicas = 0;
};

// X_0 = x0, X_{n+1}(t) = x0 + int_0^t sigma(X_n(s)) dB(s), all iterates
// driven by the same Brownian path within a replica.
PicardTrace solve_sde_picard(const LipschitzFn& sigma, const TimeGrid& grid, const RngStream& rng,
                             std::size_t n_iter, std::size_t replicas, double x0 = 0.0);

// exp(B_t - t/2) pointwise.
Path geometric_bm(const Path& bm);

struct ChaosKind {
    enum class Kind { bm, fbm };
    Kind kind = Kind::bm;
    double hurst = 0.5;
    static ChaosKind bm() { return {}; }
    static ChaosKind fbm(double h) { return {Kind::fbm, h}; }
};

inline constexpr std::size_t max_chaos_order = 200;

// 1 + sum_{n<=N} s^n/n! H_n(b/s), s = t^{1/2} (bm) or t^H (fbm).
double chaos_geometric(const ChaosKind& kind, double t, double b, std::size_t order);

// How the stochastic-convolution weight of a (slab, cell) pair is formed.
//   midpoint - G at the slab and cell centers, final slab excluded;
//   cell_rms - root mean square of G over the cell, so each cell carries
//              exactly its share of int int G^2.
enum class KernelRule { midpoint, cell_rms };
const char* to_string(KernelRule rule) noexcept;

// Weights w(lag, offset) for the one-dimensional heat kernel on a periodic
// grid: node t_k receives w(k - m, j - i) W(m, i) from slab m, cell i.
class HeatWeights {
  public:
    HeatWeights(const SpaceTimeGrid& grid, KernelRule rule);

    const SpaceTimeGrid& grid() const noexcept { return grid_; }
    KernelRule rule() const noexcept { return rule_; }
    // lag in 1..n_steps, offset taken modulo n_cells.
    double operator()(std::size_t lag, std::size_t offset) const noexcept {
        return table_[(lag - 1) * grid_.n_cells() + offset % grid_.n_cells()];
    }
    // Nonzero offsets for a lag, as a window [-reach, reach].
    std::size_t reach(std::size_t lag) const noexcept { return reach_[lag - 1]; }

  private:
    SpaceTimeGrid grid_;
    KernelRule rule_;
    std::vector<double> table_;
    std::vector<std::size_t> reach_;
};

struct LinearHeatOptions {
    KernelRule rule = KernelRule::midpoint;
    std::vector<std::size_t> output_steps; // empty: every node 0..n_steps
};

// Discrete mild solution u(t_k, x_j) = sum_{m<k} sum_i w(k-m, j-i) W(m, i)
// of the linear heat equation in d = 1, zero initial data.
//
// The solver keeps the weight spectra so that one instance serves a whole
// ensemble; solve() is safe to call concurrently.
class LinearHeatSolver {
  public:
    LinearHeatSolver(const SpaceTimeGrid& grid, KernelRule rule);
    ~LinearHeatSolver();
    LinearHeatSolver(const LinearHeatSolver&) = delete;
    LinearHeatSolver& operator=(const LinearHeatSolver&) = delete;

    const HeatWeights& weights() const noexcept { return weights_; }
    Field solve(const Field& noise, const std::vector<std::size_t>& output_steps = {}) const;
    // Same sum with sigma(u_n) multiplying the noise: u_{n+1} = u0 + conv.
    // `prev` must hold every node 0..n_steps.
    Field picard_step(const Field& prev, const Field& noise, const LipschitzFn& sigma,
                      double u0) const;

  private:
    Field convolve(const Field& noise, const Field* prev, const LipschitzFn* sigma, double u0,
                   const std::vector<std::size_t>& steps) const;

    SpaceTimeGrid grid_;
    HeatWeights weights_;
    std::vector<std::complex<double>> weight_spectra_; // n_steps x (n/2+1)
    void* forward_ = nullptr;
    void* backward_ = nullptr;
};

Field solve_linear_heat_1d(const SpaceTimeGrid& grid, const Field& noise,
                           const LinearHeatOptions& options = {});

// Direct O(n^2) evaluation of the same sum; reference for the FFT path.
Field solve_linear_heat_1d_direct(const SpaceTimeGrid& grid, const Field& noise,
                                  const LinearHeatOptions& options = {});

// u(t_k, x_j) of solve_linear_heat_1d on the white-noise sheet drawn from
// `rng`, touching only the cells with nonzero weight.
double linear_heat_at(const HeatWeights& weights, std::size_t step, std::size_t cell,
                      const RngStream& rng);

// Picard scheme for u = u0 + int int G sigma(u) W, with the noise shared by
// all iterates of a replica and u_0 = u0.
PicardTrace solve_nonlinear_heat_picard(const LipschitzFn& sigma, const SpaceTimeGrid& grid,
                                        const RngStream& rng, std::size_t n_iter,
                                        std::size_t replicas, double u0 = 1.0,
                                        KernelRule rule = KernelRule::midpoint);

struct ChaosSeries {
    std::vector<double> term_variances; // v_1..v_N
    std::vector<double> partial_sums;   // 1, 1 + v_1, ..., 1 + sum_{n<=N} v_n
    std::size_t truncation = 0;
    std::optional<double> closed_form;
};

// E|I_n(f_n(., t, x))|^2 for the white-noise parabolic Anderson model:
// (t/4)^{n/2} / Gamma(n/2 + 1).
double pam_chaos_term_variance(std::size_t n, double t);

// Smallest N whose chaos tail sum_{n>N} v_n(t) is below tol.
std::size_t pam_truncation_order(double t, double tol = 1e-12);

struct PamSecondMoment {
    double partial_sum = 0.0;
    double closed_form = 0.0; // 2 e^{t/4} Phi(sqrt(t/2))
};
PamSecondMoment pam_second_moment(double t, std::size_t order);
ChaosSeries pam_chaos_series(double t, std::size_t order);

// Time marching of the discrete mild form with one-step heat kernels,
// u(t_0) = 1, periodic in space. The noise field fixes the forcing; zero
// noise gives the deterministic flow.
Field solve_pam_euler(const SpaceTimeGrid& grid, const Field& noise,
                      const std::vector<std::size_t>& output_steps = {});

// Second moment of the parabolic Anderson model driven by a homogeneous
// Gaussian noise, estimated directly from sampled noise fields. For each
// field, u(t,0) is the Brownian average of the Wick exponential
// exp(V_B - Var(V_B)/2), V_B = int W(ds, B_{t-s}); an unbiased estimate of
// u(t,0)^2 uses distinct path pairs.
struct DirectMomentEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};
DirectMomentEstimate pam_second_moment_direct(const SpaceTimeGrid& grid, const NoiseSpec& spec,
                                              std::size_t replicas, std::size_t paths,
                                              const RngStream& rng);

} // namespace spde::solvers
