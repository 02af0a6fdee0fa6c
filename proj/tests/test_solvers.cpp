#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "spde/error.hpp"
#include "spde/noise.hpp"
#include "spde/parallel.hpp"
#include "spde/solvers.hpp"

using namespace spde;
using namespace spde::solvers;

namespace {

double g_heat(double s) { return 1.0 / std::sqrt(4.0 * std::numbers::pi * s); }

// int_0^t g(r) dr with r = u^2.
double g_mass(double t) {
    return oracle::simpson([](double u) { return u <= 0 ? 1.0 / std::sqrt(std::numbers::pi)
                                                        : 2.0 * u * g_heat(u * u); },
                           0.0, std::sqrt(t), 1e-14);
}

// sum_{k,j} w(k,j)^2 dt dx over lags 1..n
double discrete_variance(const HeatWeights& w, std::size_t lags) {
    const auto& g = w.grid();
    double s = 0.0;
    for (std::size_t lag = 1; lag <= lags; ++lag)
        for (std::size_t o = 0; o < g.n_cells(); ++o) s += w(lag, o) * w(lag, o);
    return s * g.time().dt() * g.dx();
}

} // namespace

TEST_CASE("lipschitz coefficients") {
    CHECK(LipschitzFn::identity()(2.5) == 2.5);
    const auto a = LipschitzFn::affine(-3.0, 1.0);
    CHECK(a(2.0) == -5.0);
    CHECK(a.lipschitz_constant() == 3.0);
    CHECK(LipschitzFn::bounded_smooth("tanh")(0.3) == doctest::Approx(std::tanh(0.3)));
    CHECK(LipschitzFn::bounded_smooth("atan").lipschitz_constant() == 1.0);
    CHECK_THROWS_AS(LipschitzFn::bounded_smooth("exp"), InputError);
}

TEST_CASE("ito sums") {
    const std::vector<double> x{1.0, 2.0}, db{0.5, -1.0};
    CHECK(ito_sum(x, db) == -1.5);
    const std::vector<double> bad{1.0};
    CHECK_THROWS_AS(ito_sum(bad, db), ShapeError);
}

TEST_CASE("ito residual of int B dB decays like dt") {
    // int_0^T B dB = (B_T^2 - T)/2; the left-point sum misses (T - sum dB^2)/2,
    // whose mean square is T^2 / (2n).
    const double t = 1.0;
    std::vector<double> rms;
    for (std::size_t n : {16u, 64u, 256u}) {
        const TimeGrid g(t, n);
        double ss = 0.0;
        const int reps = 4000;
        for (int r = 0; r < reps; ++r) {
            const auto b = sample_bm_path(g, RngStream(21, r));
            std::vector<double> integrand(b.values.begin(), b.values.end() - 1), db(n);
            for (std::size_t k = 0; k < n; ++k) db[k] = b.values[k + 1] - b.values[k];
            const double res = ito_sum(integrand, db) - 0.5 * (b.values[n] * b.values[n] - t);
            ss += res * res;
        }
        const double m = std::sqrt(ss / reps);
        CHECK(m == doctest::Approx(std::sqrt(t * t / (2.0 * n))).epsilon(0.1));
        rms.push_back(m);
    }
    CHECK(rms[1] < 0.6 * rms[0]);
    CHECK(rms[2] < 0.6 * rms[1]);
}

TEST_CASE("sde picard reaches the euler product") {
    const TimeGrid g(1.0, 12);
    const RngStream rng(5, 0);
    const auto tr = solve_sde_picard(LipschitzFn::identity(), g, rng, 14, 200, 1.0);
    REQUIRE(tr.paths.size() == 15);
    CHECK(tr.sup_l2_diff.size() == 14);
    // Picard on n nodes is exact after n iterations.
    CHECK(tr.sup_l2_diff[12] < 1e-25);
    CHECK(tr.sup_l2_diff[5] < tr.sup_l2_diff[0]);
    const auto b = sample_bm_path(g, rng.child(0));
    double prod = 1.0;
    for (std::size_t k = 0; k < 12; ++k) prod *= 1.0 + (b.values[k + 1] - b.values[k]);
    CHECK(tr.paths.back().values[12] == doctest::Approx(prod).epsilon(1e-12));
    CHECK_THROWS_AS(solve_sde_picard(LipschitzFn::identity(), g, rng, 0, 1), DomainError);
}

TEST_CASE("geometric brownian motion") {
    const TimeGrid g(2.0, 4);
    Path b{g, {0.0, 0.1, -0.2, 0.3, 0.4}};
    const auto x = geometric_bm(b);
    CHECK(x.values[0] == 1.0);
    CHECK(x.values[4] == doctest::Approx(std::exp(0.4 - 1.0)));
}

TEST_CASE("chaos expansion of the exponential") {
    for (double t : {0.3, 1.0, 2.5}) {
        for (double b : {-1.0, 0.2, 1.7}) {
            // explicit Hermite sum with the test oracle
            const double s = std::sqrt(t);
            double ref = 1.0, fact = 1.0;
            for (int n = 1; n <= 20; ++n) {
                fact *= n;
                ref += std::pow(s, n) / fact * oracle::hermite_explicit(n, b / s);
            }
            CHECK(chaos_geometric(ChaosKind::bm(), t, b, 20) == doctest::Approx(ref).epsilon(1e-10));
            CHECK(chaos_geometric(ChaosKind::bm(), t, b, 80) ==
                  doctest::Approx(std::exp(b - 0.5 * t)).epsilon(1e-12));
            CHECK(chaos_geometric(ChaosKind::fbm(0.8), t, b, 80) ==
                  doctest::Approx(std::exp(b - 0.5 * std::pow(t, 1.6))).epsilon(1e-12));
        }
    }
    CHECK(chaos_geometric(ChaosKind::bm(), 1.0, 0.5, 0) == 1.0);
    CHECK_THROWS_AS(chaos_geometric(ChaosKind::bm(), 1.0, 0.5, 201), CapabilityError);
}

TEST_CASE("pam chaos terms") {
    // v_1 equals the linear heat variance sqrt(t/pi)
    CHECK(pam_chaos_term_variance(1, 0.7) == doctest::Approx(std::sqrt(0.7 / std::numbers::pi)).epsilon(1e-14));
    CHECK(pam_chaos_term_variance(1, 0.7) == doctest::Approx(g_mass(0.7)).epsilon(1e-10));
    // v_2 = int_{0<s1<s2<t} g(t-s2) g(s2-s1), with s2 = t - v^2
    const double t = 1.0;
    const double v2 = oracle::simpson(
        [&](double v) {
            const double s2 = t - v * v;
            const double outer = v <= 0 ? 1.0 / std::sqrt(std::numbers::pi) : 2.0 * v * g_heat(v * v);
            return outer * g_mass(s2);
        },
        0.0, std::sqrt(t), 1e-12);
    CHECK(pam_chaos_term_variance(2, t) == doctest::Approx(v2).epsilon(1e-8));
    CHECK(pam_chaos_term_variance(2, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(pam_chaos_term_variance(0, 1.0), DomainError);
}

TEST_CASE("pam second moment") {
    const auto m = pam_second_moment(1.0, 60);
    CHECK(m.closed_form == doctest::Approx(2.0 * std::exp(0.25) * oracle::phi(std::sqrt(0.5))).epsilon(1e-14));
    CHECK(std::abs(m.partial_sum - m.closed_form) < 1e-12);
    const auto s = pam_chaos_series(2.0, 10);
    CHECK(s.term_variances.size() == 10);
    CHECK(s.partial_sums.size() == 11);
    CHECK(s.partial_sums[0] == 1.0);
    const std::size_t n = pam_truncation_order(1.0, 1e-12);
    double tail = 0.0;
    for (std::size_t k = n + 1; k < 200; ++k) tail += pam_chaos_term_variance(k, 1.0);
    CHECK(tail < 1e-12);
    CHECK(n <= 60);
}

TEST_CASE("heat weights") {
    const SpaceTimeGrid g(TimeGrid(1.0, 32), 8.0, 127);
    const HeatWeights mid(g, KernelRule::midpoint), rms(g, KernelRule::cell_rms);
    for (std::size_t o = 0; o < 127; ++o) CHECK(mid(1, o) == 0.0);
    CHECK(mid(5, 0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi * 4.5 / 32)).epsilon(1e-12));
    CHECK(mid(5, 3) == doctest::Approx(mid(5, 124)).epsilon(1e-14));
    // cell_rms carries exactly int_0^t int G^2
    CHECK(discrete_variance(rms, 32) == doctest::Approx(std::sqrt(1.0 / std::numbers::pi)).epsilon(1e-9));
    for (std::size_t lag = 1; lag <= 32; ++lag) {
        const std::size_t r = rms.reach(lag);
        if (r + 1 < 127 - r) CHECK(rms(lag, r + 1) == 0.0);
    }
}

TEST_CASE("fft solver agrees with the direct sum") {
    const SpaceTimeGrid g(TimeGrid(0.5, 24), 2.0, 33);
    const auto w = sample_white_noise_sheet(g, RngStream(8, 3));
    for (auto rule : {KernelRule::midpoint, KernelRule::cell_rms}) {
        LinearHeatOptions opt{rule, {}};
        const auto a = solve_linear_heat_1d(g, w, opt);
        const auto b = solve_linear_heat_1d_direct(g, w, opt);
        REQUIRE(a.values().size() == b.values().size());
        double diff = 0.0;
        for (std::size_t i = 0; i < a.values().size(); ++i) diff = std::max(diff, std::abs(a.values()[i] - b.values()[i]));
        CHECK(diff < 1e-12);
        const HeatWeights hw(g, rule);
        CHECK(linear_heat_at(hw, 24, 16, RngStream(8, 3)) == doctest::Approx(a.at(24, 16)).epsilon(1e-11));
        CHECK(linear_heat_at(hw, 7, 0, RngStream(8, 3)) == doctest::Approx(a.at(7, 0)).epsilon(1e-11));
    }
    CHECK(solve_linear_heat_1d(g, w).at(0, 5) == 0.0);
    const SpaceTimeGrid other(TimeGrid(0.5, 12), 2.0, 33);
    CHECK_THROWS_AS(solve_linear_heat_1d(other, w), ShapeError);
}

TEST_CASE("walsh isometry of the discrete convolution") {
    // E u(t,x)^2 = sum w^2 dt dx for every rule
    const SpaceTimeGrid g(TimeGrid(1.0, 16), 3.0, 31);
    const HeatWeights hw(g, KernelRule::midpoint);
    const double exact = discrete_variance(hw, 16);
    const auto u = parallel::map_replicas<double>(20000, [&](std::size_t r) {
        return linear_heat_at(hw, 16, 15, RngStream(31, r));
    });
    std::vector<double> sq(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) sq[i] = u[i] * u[i];
    const auto s = oracle::stats(sq);
    CHECK(std::abs(s.mean - exact) < 4 * s.stderr_);
}

TEST_CASE("nonlinear heat picard") {
    const SpaceTimeGrid g(TimeGrid(0.5, 16), 2.0, 21);
    const auto zero = solve_nonlinear_heat_picard(LipschitzFn::affine(0.0, 0.0), g, RngStream(2, 0), 3, 4);
    for (double d : zero.sup_l2_diff) CHECK(d == 0.0);
    const auto tr = solve_nonlinear_heat_picard(LipschitzFn::identity(), g, RngStream(2, 0), 6, 50);
    REQUIRE(tr.sup_l2_diff.size() == 6);
    for (std::size_t n = 1; n < 6; ++n) CHECK(tr.sup_l2_diff[n] < tr.sup_l2_diff[n - 1]);
    // first difference is the linear solution times u0
    CHECK(tr.sup_l2_diff[0] > 0.0);
}

TEST_CASE("pam euler") {
    const SpaceTimeGrid g(TimeGrid(1.0, 16), 2.0, 32);
    Field zero(g, Field::Layout::cells);
    const auto u = solve_pam_euler(g, zero);
    for (double v : u.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    const auto w = sample_white_noise_sheet(g, RngStream(4, 4));
    const auto a = solve_pam_euler(g, w, {16});
    CHECK(a.rows() == 1);
    // spatial mean is a martingale-type average; it stays finite and positive on average
    double m = 0.0;
    for (double v : a.row(0)) m += v;
    CHECK(std::isfinite(m));
}

TEST_CASE("direct pam estimator is reproducible") {
    const SpaceTimeGrid g(TimeGrid(0.25, 8), 1.5, 15);
    const auto spec = NoiseSpec::fractional_riesz(0.7, 0.5);
    const auto a = pam_second_moment_direct(g, spec, 40, 8, RngStream(3, 0));
    const auto b = pam_second_moment_direct(g, spec, 40, 8, RngStream(3, 0));
    CHECK(a.estimate == b.estimate);
    CHECK(a.replicas == 40);
    CHECK(a.estimate > 1.0);
    CHECK_THROWS_AS(pam_second_moment_direct(g, spec, 40, 1, RngStream(3, 0)), InputError);
}
