#include "spde/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "spde/detail/gauss_legendre.hpp"
#include "spde/error.hpp"
#include "spde/kernels.hpp"
#include "spde/parallel.hpp"
#include "spde/special.hpp"

namespace spde::solvers {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

Plans make_plans(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    const int ni = static_cast<int>(n);
    double* re = fftw_alloc_real(n);
    fftw_complex* co = fftw_alloc_complex(n / 2 + 1);
    Plans p;
    p.forward = fftw_plan_dft_r2c_1d(ni, re, co, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_1d(ni, co, re, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(re);
    fftw_free(co);
    if (!p.forward || !p.backward) throw NumericalError("FFTW planning failed");
    return p;
}

void destroy_plans(Plans& p) {
    std::lock_guard lock(planner_mutex());
    if (p.forward) fftw_destroy_plan(p.forward);
    if (p.backward) fftw_destroy_plan(p.backward);
    p = {};
}

using cplx = std::complex<double>;

void forward(fftw_plan plan, const double* in, cplx* out) {
    fftw_execute_dft_r2c(plan, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void backward(fftw_plan plan, cplx* in, double* out) {
    fftw_execute_dft_c2r(plan, reinterpret_cast<fftw_complex*>(in), out);
}

void require_one_dim(const SpaceTimeGrid& grid) {
    if (grid.dim() != 1) throw CapabilityError("heat solvers are implemented for d = 1");
}

void require_noise_shape(const SpaceTimeGrid& grid, const Field& noise) {
    const auto& g = noise.grid();
    if (noise.layout() != Field::Layout::cells || g.n_cells() != grid.n_cells() ||
        g.time().n_steps() != grid.time().n_steps() || g.dim() != grid.dim()) {
        throw ShapeError("noise field does not match the solver grid");
    }
}

std::vector<std::size_t> all_steps(const SpaceTimeGrid& grid) {
    std::vector<std::size_t> s(grid.time().n_steps() + 1);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = k;
    return s;
}

// Signed periodic offset o*dx reduced to [-L, L).
double wrapped_distance(const SpaceTimeGrid& grid, std::size_t offset) {
    const std::size_t n = grid.n_cells();
    const auto o = static_cast<double>(offset % n);
    const double z = o * grid.dx();
    return z >= grid.half_width() ? z - 2.0 * grid.half_width() : z;
}

// P(a < Z < b) without cancellation in the tails.
double normal_mass(double a, double b) {
    constexpr double r = std::numbers::sqrt2;
    if (a >= 0.0) return 0.5 * (std::erfc(a / r) - std::erfc(b / r));
    if (b <= 0.0) return 0.5 * (std::erfc(-b / r) - std::erfc(-a / r));
    return 1.0 - 0.5 * std::erfc(-a / r) - 0.5 * std::erfc(b / r);
}

constexpr int image_count = 2;

} // namespace

LipschitzFn LipschitzFn::identity() { return {}; }

LipschitzFn LipschitzFn::affine(double a, double b) {
    LipschitzFn f;
    f.tag_ = Tag::affine;
    f.name_ = "affine";
    f.a_ = a;
    f.b_ = b;
    return f;
}

LipschitzFn LipschitzFn::bounded_smooth(const std::string& name) {
    if (name != "sin" && name != "tanh" && name != "atan") {
        throw InputError("unknown bounded_smooth coefficient '" + name + "'");
    }
    LipschitzFn f;
    f.tag_ = Tag::bounded_smooth;
    f.name_ = name;
    return f;
}

double LipschitzFn::operator()(double x) const {
    switch (tag_) {
    case Tag::identity: return x;
    case Tag::affine: return a_ * x + b_;
    case Tag::bounded_smooth:
        if (name_ == "sin") return std::sin(x);
        if (name_ == "tanh") return std::tanh(x);
        return std::atan(x);
    }
    return x;
}

double LipschitzFn::lipschitz_constant() const noexcept {
    switch (tag_) {
    case Tag::identity: return 1.0;
    case Tag::affine: return std::abs(a_);
    case Tag::bounded_smooth: return 1.0;
    }
    return 1.0;
}

double ito_sum(std::span<const double> integrand, std::span<const double> increments) {
    if (integrand.size() != increments.size()) {
        throw ShapeError("ito_sum: integrand and increments differ in length");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < integrand.size(); ++k) s += integrand[k] * increments[k];
    return s;
}

PicardTrace solve_sde_picard(const LipschitzFn& sigma, const TimeGrid& grid, const RngStream& rng,
                             std::size_t n_iter, std::size_t replicas, double x0) {
    if (n_iter == 0) throw DomainError("solve_sde_picard needs n_iter >= 1");
    if (replicas == 0) throw InputError("solve_sde_picard needs at least one replica");
    const std::size_t n = grid.n_steps();

    struct Replica {
        std::vector<double> sq; // n_iter x (n+1) squared differences
        std::vector<Path> iterates;
    };
    const auto runs = parallel::map_replicas<Replica>(replicas, [&](std::size_t r) {
        const Path b = sample_bm_path(grid, rng.child(r));
        std::vector<double> db(n);
        for (std::size_t k = 0; k < n; ++k) db[k] = b.values[k + 1] - b.values[k];

        Replica out;
        out.sq.assign(n_iter * (n + 1), 0.0);
        std::vector<double> prev(n + 1, x0), next(n + 1), integrand(n);
        if (r == 0) out.iterates.push_back({grid, prev});
        for (std::size_t it = 0; it < n_iter; ++it) {
            for (std::size_t k = 0; k < n; ++k) integrand[k] = sigma(prev[k]);
            next[0] = x0;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += integrand[k] * db[k];
                next[k + 1] = x0 + acc;
            }
            for (std::size_t k = 0; k <= n; ++k) {
                const double dlt = next[k] - prev[k];
                out.sq[it * (n + 1) + k] = dlt * dlt;
            }
            std::swap(prev, next);
            if (r == 0) out.iterates.push_back({grid, prev});
        }
        return out;
    });

    PicardTrace trace;
    trace.replicas = replicas;
    trace.paths = runs.front().iterates;
    for (std::size_t it = 0; it < n_iter; ++it) {
        double best = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            double s = 0.0;
            for (const auto& rep : runs) s += rep.sq[it * (n + 1) + k];
            best = std::max(best, s / static_cast<double>(replicas));
        }
        trace.sup_l2_diff.push_back(best);
    }
    return trace;
}

Path geometric_bm(const Path& bm) {
    Path out{bm.grid, bm.values};
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] = std::exp(bm.values[k] - 0.5 * bm.grid.node(k));
    }
    return out;
}

double chaos_geometric(const ChaosKind& kind, double t, double b, std::size_t order) {
    if (!(t > 0.0)) throw DomainError("chaos_geometric requires t > 0");
    if (order > max_chaos_order) {
        throw CapabilityError("chaos_geometric supports orders up to 200");
    }
    if (kind.kind == ChaosKind::Kind::fbm && !(kind.hurst > 0.0 && kind.hurst < 1.0)) {
        throw DomainError("fbm chaos requires H in (0,1)");
    }
    const double s = kind.kind == ChaosKind::Kind::bm ? std::sqrt(t) : std::pow(t, kind.hurst);
    // q_n = s^n H_n(b/s) / n! obeys q_{n+1} = (b q_n - s^2 q_{n-1}) / (n+1),
    // the Hermite recurrence with the factorial and powers folded in.
    double q_prev = 1.0, q = b;
    double sum = 1.0;
    if (order >= 1) sum += q;
    for (std::size_t n = 1; n < order; ++n) {
        const double q_next = (b * q - s * s * q_prev) / static_cast<double>(n + 1);
        q_prev = q;
        q = q_next;
        sum += q;
    }
    return sum;
}

const char* to_string(KernelRule rule) noexcept {
    return rule == KernelRule::midpoint ? "midpoint" : "cell_rms";
}

HeatWeights::HeatWeights(const SpaceTimeGrid& grid, KernelRule rule) : grid_(grid), rule_(rule) {
    require_one_dim(grid);
    const std::size_t n_t = grid.time().n_steps();
    const std::size_t n = grid.n_cells();
    const double dt = grid.time().dt();
    const double dx = grid.dx();
    const double period = 2.0 * grid.half_width();
    table_.assign(n_t * n, 0.0);
    reach_.assign(n_t, 0);
    const auto& rule16 = detail::unit_gauss_legendre<16>();

    for (std::size_t lag = 1; lag <= n_t; ++lag) {
        const double s_hi = static_cast<double>(lag) * dt;
        // Beyond 8 standard deviations the kernel is below 2e-14 of its peak.
        const double extent = 8.0 * std::sqrt(s_hi) + dx;
        const auto r = static_cast<std::size_t>(std::ceil(extent / dx));
        const std::size_t rch = std::min(r, (n - 1) / 2);
        reach_[lag - 1] = rch;
        if (rule == KernelRule::midpoint && lag == 1) continue;

        for (std::size_t o = 0; o < n; ++o) {
            const std::size_t dist = std::min(o, n - o);
            if (dist > rch) continue;
            const double z0 = wrapped_distance(grid, o);
            double w = 0.0;
            if (rule == KernelRule::midpoint) {
                const double s = (static_cast<double>(lag) - 0.5) * dt;
                for (int q = -image_count; q <= image_count; ++q) {
                    w += kernels::heat_kernel(s, z0 + q * period);
                }
            } else {
                // int_slab int_cell G^2 = pi^{-1/2} int_{sqrt s0}^{sqrt s1}
                // P(z-dx/2 < N(0,s/2) < z+dx/2) du with s = u^2.
                const double u0 = std::sqrt(s_hi - dt), u1 = std::sqrt(s_hi);
                const int panels = lag <= 4 ? 8 : 1;
                double integral = 0.0;
                for (int q = -image_count; q <= image_count; ++q) {
                    const double z = z0 + q * period;
                    if (std::abs(z) - 0.5 * dx > extent) continue;
                    for (int p = 0; p < panels; ++p) {
                        const double a = u0 + (u1 - u0) * p / panels;
                        const double b = u0 + (u1 - u0) * (p + 1) / panels;
                        for (std::size_t g = 0; g < rule16.nodes.size(); ++g) {
                            const double u = a + (b - a) * rule16.nodes[g];
                            const double sd = u / std::numbers::sqrt2;
                            integral += (b - a) * rule16.weights[g] *
                                        normal_mass((z - 0.5 * dx) / sd, (z + 0.5 * dx) / sd);
                        }
                    }
                }
                integral /= std::sqrt(std::numbers::pi);
                w = std::sqrt(integral / (dt * dx));
            }
            table_[(lag - 1) * n + o] = w;
        }
    }
}

LinearHeatSolver::LinearHeatSolver(const SpaceTimeGrid& grid, KernelRule rule)
    : grid_(grid), weights_(grid, rule) {
    const std::size_t n = grid.n_cells();
    const std::size_t n_t = grid.time().n_steps();
    const std::size_t nc = n / 2 + 1;
    Plans p = make_plans(n);
    forward_ = p.forward;
    backward_ = p.backward;
    weight_spectra_.resize(n_t * nc);
    std::vector<double> row(n);
    for (std::size_t lag = 1; lag <= n_t; ++lag) {
        for (std::size_t o = 0; o < n; ++o) row[o] = weights_(lag, o);
        forward(p.forward, row.data(), weight_spectra_.data() + (lag - 1) * nc);
    }
}

LinearHeatSolver::~LinearHeatSolver() {
    Plans p{static_cast<fftw_plan>(forward_), static_cast<fftw_plan>(backward_)};
    destroy_plans(p);
}

Field LinearHeatSolver::solve(const Field& noise, const std::vector<std::size_t>& output_steps) const {
    return convolve(noise, nullptr, nullptr, 0.0,
                    output_steps.empty() ? all_steps(grid_) : output_steps);
}

Field LinearHeatSolver::picard_step(const Field& prev, const Field& noise, const LipschitzFn& sigma,
                                    double u0) const {
    if (prev.layout() != Field::Layout::nodes || prev.rows() != grid_.time().n_steps() + 1) {
        throw ShapeError("picard_step needs the previous iterate at every node");
    }
    return convolve(noise, &prev, &sigma, u0, all_steps(grid_));
}

Field LinearHeatSolver::convolve(const Field& noise, const Field* prev, const LipschitzFn* sigma,
                                 double u0, const std::vector<std::size_t>& steps) const {
    require_noise_shape(grid_, noise);
    const std::size_t n = grid_.n_cells();
    const std::size_t n_t = grid_.time().n_steps();
    const std::size_t nc = n / 2 + 1;
    const auto fwd = static_cast<fftw_plan>(forward_);
    const auto bwd = static_cast<fftw_plan>(backward_);
    for (std::size_t k : steps) {
        if (k > n_t) throw ShapeError("output step beyond the grid");
    }
    const std::size_t last = steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end());

    // Spectra of the slab forcing sigma(u(t_m)) W(m, .), m < last.
    std::vector<cplx> forcing(last * nc);
    std::vector<double> row(n);
    for (std::size_t m = 0; m < last; ++m) {
        const auto w = noise.row(m);
        if (prev) {
            const auto u = prev->row(m);
            for (std::size_t i = 0; i < n; ++i) row[i] = (*sigma)(u[i]) * w[i];
        } else {
            std::copy(w.begin(), w.end(), row.begin());
        }
        forward(fwd, row.data(), forcing.data() + m * nc);
    }

    Field out(grid_, steps);
    std::vector<cplx> acc(nc);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t r = 0; r < steps.size(); ++r) {
        const std::size_t k = steps[r];
        auto dst = out.row(r);
        if (k == 0) {
            std::fill(dst.begin(), dst.end(), u0);
            continue;
        }
        std::fill(acc.begin(), acc.end(), cplx{});
        for (std::size_t m = 0; m < k; ++m) {
            const cplx* w = weight_spectra_.data() + (k - m - 1) * nc;
            const cplx* f = forcing.data() + m * nc;
            for (std::size_t q = 0; q < nc; ++q) acc[q] += w[q] * f[q];
        }
        backward(bwd, acc.data(), row.data());
        for (std::size_t j = 0; j < n; ++j) dst[j] = u0 + scale * row[j];
    }
    return out;
}

Field solve_linear_heat_1d(const SpaceTimeGrid& grid, const Field& noise,
                           const LinearHeatOptions& options) {
    const LinearHeatSolver solver(grid, options.rule);
    return solver.solve(noise, options.output_steps);
}

Field solve_linear_heat_1d_direct(const SpaceTimeGrid& grid, const Field& noise,
                                  const LinearHeatOptions& options) {
    require_noise_shape(grid, noise);
    const HeatWeights w(grid, options.rule);
    const auto steps = options.output_steps.empty() ? all_steps(grid) : options.output_steps;
    const std::size_t n = grid.n_cells();
    Field out(grid, steps);
    for (std::size_t r = 0; r < steps.size(); ++r) {
        const std::size_t k = steps[r];
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                const std::size_t lag = k - m;
                const auto rch = static_cast<std::ptrdiff_t>(w.reach(lag));
                for (std::ptrdiff_t o = -rch; o <= rch; ++o) {
                    const std::size_t off = static_cast<std::size_t>(o + static_cast<std::ptrdiff_t>(n)) % n;
                    s += w(lag, off) * noise.at(m, (j + n - off) % n);
                }
            }
            out.at(r, j) = s;
        }
    }
    return out;
}

double linear_heat_at(const HeatWeights& weights, std::size_t step, std::size_t cell,
                      const RngStream& rng) {
    const auto& grid = weights.grid();
    const std::size_t n = grid.n_cells();
    if (step > grid.time().n_steps() || cell >= n) throw ShapeError("point outside the grid");
    const double sd = std::sqrt(grid.time().dt() * grid.cell_volume());
    std::vector<double> z(n);
    double s = 0.0;
    for (std::size_t m = 0; m < step; ++m) {
        const std::size_t lag = step - m;
        const std::size_t rch = weights.reach(lag);
        // Cells cell-rch .. cell+rch (periodic), drawn as at most two runs.
        const std::size_t start = (cell + n - rch) % n;
        const std::size_t width = 2 * rch + 1;
        const std::size_t first_run = std::min(width, n - start);
        rng.fill_normal(std::span<double>(z.data(), first_run), m * n + start);
        if (first_run < width) {
            rng.fill_normal(std::span<double>(z.data() + first_run, width - first_run), m * n);
        }
        for (std::size_t k = 0; k < width; ++k) {
            // z[k] sits at cell + (k - rch), i.e. offset rch - k.
            s += weights(lag, (rch + n - k) % n) * z[k];
        }
    }
    return sd * s;
}

PicardTrace solve_nonlinear_heat_picard(const LipschitzFn& sigma, const SpaceTimeGrid& grid,
                                        const RngStream& rng, std::size_t n_iter,
                                        std::size_t replicas, double u0, KernelRule rule) {
    if (n_iter == 0) throw DomainError("solve_nonlinear_heat_picard needs n_iter >= 1");
    if (replicas == 0) throw InputError("solve_nonlinear_heat_picard needs at least one replica");
    const LinearHeatSolver solver(grid, rule);
    const std::size_t rows = grid.time().n_steps() + 1;
    const std::size_t n = grid.n_cells();

    struct Replica {
        std::vector<double> sq; // n_iter x rows, spatial mean of squared differences
        std::vector<Field> iterates;
    };
    const auto runs = parallel::map_replicas<Replica>(replicas, [&](std::size_t r) {
        const Field noise = sample_white_noise_sheet(grid, rng.child(r));
        Field prev(grid, Field::Layout::nodes);
        std::fill(prev.values().begin(), prev.values().end(), u0);
        Replica out;
        out.sq.assign(n_iter * rows, 0.0);
        if (r == 0) out.iterates.push_back(prev);
        for (std::size_t it = 0; it < n_iter; ++it) {
            Field next = solver.picard_step(prev, noise, sigma, u0);
            for (std::size_t k = 0; k < rows; ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double d = next.at(k, j) - prev.at(k, j);
                    s += d * d;
                }
                out.sq[it * rows + k] = s / static_cast<double>(n);
            }
            prev = std::move(next);
            if (r == 0) out.iterates.push_back(prev);
        }
        return out;
    });

    PicardTrace trace;
    trace.replicas = replicas;
    trace.fields = runs.front().iterates;
    for (std::size_t it = 0; it < n_iter; ++it) {
        double best = 0.0;
        for (std::size_t k = 0; k < rows; ++k) {
            double s = 0.0;
            for (const auto& rep : runs) s += rep.sq[it * rows + k];
            best = std::max(best, s / static_cast<double>(replicas));
        }
        trace.sup_l2_diff.push_back(best);
    }
    return trace;
}

double pam_chaos_term_variance(std::size_t n, double t) {
    if (n == 0) throw DomainError("chaos order must be >= 1");
    if (!(t > 0.0)) throw DomainError("pam_chaos_term_variance requires t > 0");
    const double h = 0.5 * static_cast<double>(n);
    return std::exp(h * std::log(0.25 * t) - special::log_gamma(h + 1.0));
}

std::size_t pam_truncation_order(double t, double tol) {
    if (!(t > 0.0)) throw DomainError("pam_truncation_order requires t > 0");
    // Terms eventually decrease faster than geometrically; once they do and
    // the remaining geometric bound is below tol we stop.
    for (std::size_t n = 1; n < 100000; ++n) {
        const double v = pam_chaos_term_variance(n + 1, t);
        const double ratio = v / pam_chaos_term_variance(n, t);
        const double ratio2 = pam_chaos_term_variance(n + 2, t) / v;
        if (ratio < 1.0 && ratio2 < 1.0 && v / (1.0 - std::max(ratio, ratio2)) * 2.0 < tol) {
            return n;
        }
    }
    throw NumericalError("chaos truncation order did not converge");
}

ChaosSeries pam_chaos_series(double t, std::size_t order) {
    if (!(t > 0.0)) throw DomainError("pam_chaos_series requires t > 0");
    ChaosSeries cs;
    cs.truncation = order;
    cs.partial_sums.push_back(1.0);
    for (std::size_t n = 1; n <= order; ++n) {
        const double v = pam_chaos_term_variance(n, t);
        cs.term_variances.push_back(v);
        cs.partial_sums.push_back(cs.partial_sums.back() + v);
    }
    cs.closed_form = 2.0 * std::exp(0.25 * t) * special::std_normal_cdf(std::sqrt(0.5 * t));
    return cs;
}

PamSecondMoment pam_second_moment(double t, std::size_t order) {
    const auto cs = pam_chaos_series(t, order);
    return {cs.partial_sums.back(), *cs.closed_form};
}

Field solve_pam_euler(const SpaceTimeGrid& grid, const Field& noise,
                      const std::vector<std::size_t>& output_steps) {
    require_one_dim(grid);
    require_noise_shape(grid, noise);
    const std::size_t n = grid.n_cells();
    const std::size_t nc = n / 2 + 1;
    const std::size_t n_t = grid.time().n_steps();
    const double dt = grid.time().dt();
    const double dx = grid.dx();
    const auto steps = output_steps.empty() ? all_steps(grid) : output_steps;

    Plans plans = make_plans(n);
    struct Guard {
        Plans& p;
        ~Guard() { destroy_plans(p); }
    } guard{plans};

    // One-step kernel masses G(dt, x - y) dx on the periodic lattice.
    std::vector<double> mass(n);
    const double period = 2.0 * grid.half_width();
    for (std::size_t o = 0; o < n; ++o) {
        const double z0 = wrapped_distance(grid, o);
        double s = 0.0;
        for (int q = -image_count; q <= image_count; ++q) {
            s += kernels::heat_kernel(dt, z0 + q * period);
        }
        mass[o] = s * dx;
    }
    std::vector<cplx> kernel_hat(nc), buf(nc);
    forward(plans.forward, mass.data(), kernel_hat.data());

    Field out(grid, steps);
    std::vector<double> u(n, 1.0), v(n);
    const auto record = [&](std::size_t k) {
        for (std::size_t r = 0; r < steps.size(); ++r) {
            if (steps[r] == k) std::copy(u.begin(), u.end(), out.row(r).begin());
        }
    };
    record(0);
    const std::size_t last = steps.empty() ? 0 : *std::max_element(steps.begin(), steps.end());
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < std::min(last, n_t); ++k) {
        const auto w = noise.row(k);
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] * (1.0 + w[i] / dx);
        forward(plans.forward, v.data(), buf.data());
        for (std::size_t q = 0; q < nc; ++q) buf[q] *= kernel_hat[q];
        backward(plans.backward, buf.data(), u.data());
        for (double& x : u) x *= scale;
        record(k + 1);
    }
    return out;
}

DirectMomentEstimate pam_second_moment_direct(const SpaceTimeGrid& grid, const NoiseSpec& spec,
                                              std::size_t replicas, std::size_t paths,
                                              const RngStream& rng) {
    require_one_dim(grid);
    if (paths < 2) throw InputError("pam_second_moment_direct needs at least two paths");
    if (replicas < 2) throw InputError("pam_second_moment_direct needs at least two replicas");
    const HomogeneousNoiseSampler sampler(grid, spec);
    const auto& ct = sampler.time_covariance();
    const auto& cx = sampler.space_covariance();
    const std::size_t n_t = grid.time().n_steps();
    const std::size_t n = grid.n_cells();
    const double dt = grid.time().dt();
    const double dx = grid.dx();
    const double lo = -grid.half_width();

    const auto est = parallel::map_replicas<double>(replicas, [&](std::size_t r) {
        const RngStream stream = rng.child(r);
        const Field w = sampler.sample(stream.child(0));
        std::vector<double> x(paths);
        std::vector<std::size_t> cells(n_t);
        for (std::size_t p = 0; p < paths; ++p) {
            const RngStream ps = stream.child(1 + p);
            // B at times t - s_k for slab midpoints s_k, started at 0:
            // slab n_t - 1 sees B(dt/2), each earlier slab one more step.
            double b = std::sqrt(0.5 * dt) * ps.normal_at(0);
            for (std::size_t j = 0; j < n_t; ++j) {
                if (j > 0) b += std::sqrt(dt) * ps.normal_at(j);
                const std::size_t k = n_t - 1 - j;
                auto c = static_cast<std::ptrdiff_t>(std::floor((b - lo) / dx));
                c %= static_cast<std::ptrdiff_t>(n);
                if (c < 0) c += static_cast<std::ptrdiff_t>(n);
                cells[k] = static_cast<std::size_t>(c);
            }
            double v = 0.0, var = 0.0;
            for (std::size_t k = 0; k < n_t; ++k) {
                v += w.at(k, cells[k]);
                for (std::size_t k2 = 0; k2 < n_t; ++k2) var += ct(k, k2) * cx(cells[k], cells[k2]);
            }
            v /= dx;
            var /= dx * dx;
            x[p] = std::exp(v - 0.5 * var);
        }
        double s = 0.0, s2 = 0.0;
        for (double xi : x) {
            s += xi;
            s2 += xi * xi;
        }
        const double m = static_cast<double>(paths);
        return (s * s - s2) / (m * (m - 1.0));
    });

    DirectMomentEstimate out;
    out.replicas = replicas;
    const double rr = static_cast<double>(replicas);
    out.estimate = parallel::ordered_sum(est) / rr;
    double ss = 0.0;
    for (double e : est) ss += (e - out.estimate) * (e - out.estimate);
    out.stderr_ = std::sqrt(ss / (rr - 1.0) / rr);
    return out;
}

} // namespace spde::solvers
