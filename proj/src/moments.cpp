#include "spde/moments.hpp"

#include <algorithm>
#include <cmath>

#include "spde/parallel.hpp"

namespace spde::moments {

MeanEstimate jackknife_mean(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InputError("empty sample");
    double total = 0.0;
    for (double v : values) total += v;
    const double nn = static_cast<double>(n);
    MeanEstimate out{total / nn, 0.0};
    if (n == 1) return out;
    // Leave-one-out means and the jackknife variance around their average.
    double loo_avg = 0.0;
    for (double v : values) loo_avg += (total - v) / (nn - 1.0);
    loo_avg /= nn;
    double ss = 0.0;
    for (double v : values) {
        const double d = (total - v) / (nn - 1.0) - loo_avg;
        ss += d * d;
    }
    out.stderr_ = std::sqrt((nn - 1.0) / nn * ss);
    return out;
}

std::vector<MomentRow> estimate_moments(std::span<const double> samples, const std::vector<double>& ps,
                                        double t, const std::string& model) {
    if (samples.empty()) throw InputError("estimate_moments: empty sample");
    std::vector<MomentRow> rows;
    std::vector<double> powered(samples.size());
    for (double p : ps) {
        if (!(p >= 1.0)) throw DomainError("moment order p must be >= 1");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            powered[i] = std::pow(std::abs(samples[i]), p);
        }
        const auto m = jackknife_mean(powered);
        rows.push_back({model, t, p, m.mean, m.stderr_, samples.size()});
    }
    return rows;
}

double lyapunov_fit(const std::vector<MomentRow>& rows, double p, double kappa) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (r.p != p) continue;
        if (!(r.estimate > 0.0)) throw InputError("lyapunov_fit: nonpositive moment estimate");
        x.push_back(std::pow(r.t, kappa));
        y.push_back(std::log(r.estimate));
    }
    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 4) throw InputError("lyapunov_fit needs at least 4 distinct times");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

Model parse_model(const std::string& name) {
    if (name == "gbm") return Model::gbm;
    if (name == "pam_white" || name == "pam") return Model::pam_white;
    if (name == "gfbm") return Model::gfbm;
    throw CapabilityError("no Lyapunov table for model '" + name + "'");
}

const char* to_string(Model m) noexcept {
    switch (m) {
    case Model::gbm: return "gbm";
    case Model::pam_white: return "pam_white";
    case Model::gfbm: return "gfbm";
    }
    return "?";
}

LyapunovValue lyapunov_closed_form(Model model, double p, double hurst) {
    if (!(p > 0.0)) throw DomainError("moment order p must be positive");
    switch (model) {
    case Model::gbm: return {0.5 * p * (p - 1.0), 1.0};
    case Model::pam_white: return {p * (p * p - 1.0) / 24.0, 1.0};
    case Model::gfbm:
        if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("gfbm requires H in (0,1)");
        return {0.5 * p * (p - 1.0), 2.0 * hurst};
    }
    throw CapabilityError("unknown model");
}

bool intermittency_check(const std::map<double, double>& lambda_by_p) {
    if (lambda_by_p.size() < 2) throw InputError("intermittency_check needs at least two p values");
    double prev = 0.0;
    bool first = true;
    for (const auto& [p, lambda] : lambda_by_p) {
        const double ratio = lambda / p;
        if (!first && !(ratio > prev)) return false;
        prev = ratio;
        first = false;
    }
    return true;
}

FkEstimate fk_second_moment(double t, const NoiseSpec& spec, std::size_t d, std::size_t replicas,
                            const FkOptions& options, const RngStream& rng) {
    if (spec.time.kind != TimeKernel::Kind::fractional || spec.space.kind != SpaceKernel::Kind::riesz) {
        throw CapabilityError("fk_second_moment needs fractional time and Riesz space covariance");
    }
    if (!(t > 0.0)) throw DomainError("fk_second_moment requires t > 0");
    if (replicas < 2) throw InputError("fk_second_moment needs at least two replicas");
    const double hurst = spec.time.hurst;
    const double alpha = spec.space.alpha;
    if (!(alpha > 0.0 && alpha < std::min(static_cast<double>(d), 2.0))) {
        throw DomainError("alpha must lie in (0, d ^ 2)");
    }
    auto verdict = conditions::check_fractional(kernels::OperatorKind::heat, alpha, hurst, d);
    if (!verdict.satisfied) throw ConditionRejected("existence condition fails", verdict);

    const std::size_t nq = options.quad_steps;
    if (nq == 0) throw InputError("quad_steps must be positive");
    const double dq = t / static_cast<double>(nq);
    const double floor = options.delta_floor.value_or(0.5 * dq);

    // Exact cell integrals of gamma; they depend only on |i - j|.
    std::vector<double> gamma_cell(nq, 0.0);
    if (!options.zero_kernel) {
        for (std::size_t k = 0; k < nq; ++k) {
            gamma_cell[k] = time_cell_covariance(spec.time, 0.0, dq, k * dq, (k + 1) * dq);
        }
    }

    struct Sample {
        double full;
        double half;
    };
    const auto samples = parallel::map_replicas<Sample>(replicas, [&](std::size_t r) {
        const RngStream stream = rng.child(r);
        // Brownian positions at cell midpoints, coordinates interleaved.
        const auto path = [&](const RngStream& s) {
            std::vector<double> x(nq * d);
            for (std::size_t c = 0; c < d; ++c) {
                double b = std::sqrt(0.5 * dq) * s.normal_at(c * nq);
                x[c] = b;
                for (std::size_t i = 1; i < nq; ++i) {
                    b += std::sqrt(dq) * s.normal_at(c * nq + i);
                    x[i * d + c] = b;
                }
            }
            return x;
        };
        const auto b1 = path(stream.child(0));
        const auto b2 = path(stream.child(1));
        double full = 0.0, half = 0.0;
        for (std::size_t i = 0; i < nq; ++i) {
            for (std::size_t j = 0; j < nq; ++j) {
                const double g = gamma_cell[i > j ? i - j : j - i];
                if (g == 0.0) continue;
                double r2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double z = b1[i * d + c] - b2[j * d + c];
                    r2 += z * z;
                }
                const double dist = std::sqrt(r2);
                full += g * std::pow(std::max(dist, floor), -alpha);
                half += g * std::pow(std::max(dist, 0.5 * floor), -alpha);
            }
        }
        const Sample s{std::exp(full), std::exp(half)};
        if (!(s.full >= 1.0) || !(s.half >= 1.0)) {
            throw NumericalError("Feynman-Kac sample below 1");
        }
        return s;
    });

    std::vector<double> a(replicas), b(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        a[r] = samples[r].full;
        b[r] = samples[r].half;
    }
    const auto ma = jackknife_mean(a);
    const auto mb = jackknife_mean(b);
    FkEstimate out;
    out.estimate = ma.mean;
    out.stderr_ = ma.stderr_;
    out.estimate_half_floor = mb.mean;
    out.stderr_half_floor = mb.stderr_;
    out.delta_floor = floor;
    out.replicas = replicas;
    out.verdict = std::move(verdict);
    return out;
}

double intermittency_exponent_predicted(kernels::OperatorKind op, double alpha, double hurst) {
    if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("H must lie in (1/2,1)");
    if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
    if (op == kernels::OperatorKind::heat) {
        if (!(alpha < 2.0)) throw DomainError("heat exponent requires alpha < 2");
        return (4.0 * hurst - alpha) / (2.0 - alpha);
    }
    if (!(alpha < 3.0)) throw DomainError("wave exponent requires alpha < 3");
    return (2.0 * hurst + 2.0 - alpha) / (3.0 - alpha);
}

const char* to_string(Axis a) noexcept { return a == Axis::time ? "time" : "space"; }

HolderFit holder_estimate(const std::vector<Field>& ensemble, double p, Axis axis,
                          const HolderOptions& options) {
    if (ensemble.empty()) throw InputError("holder_estimate: empty ensemble");
    if (!(p >= 1.0)) throw DomainError("holder_estimate: p must be >= 1");
    const Field& ref = ensemble.front();
    const auto& grid = ref.grid();
    if (ref.layout() != Field::Layout::nodes) throw InputError("holder_estimate needs node fields");
    if (grid.dim() != 1) throw CapabilityError("holder_estimate is implemented for d = 1");
    for (const auto& f : ensemble) {
        if (f.steps() != ref.steps() || f.grid().n_cells() != grid.n_cells() ||
            f.grid().time().n_steps() != grid.time().n_steps()) {
            throw ShapeError("holder_estimate: ensemble fields differ in shape");
        }
    }
    const std::size_t n_t = grid.time().n_steps();
    const std::size_t n = grid.n_cells();
    const std::size_t first = (n_t + 1) / 2;

    HolderFit fit;
    bool zero_seen = false;
    for (std::size_t h = std::max<std::size_t>(options.min_lag, 1); h <= options.max_lag; h *= 2) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t r = 0; r < ref.rows(); ++r) {
            const std::size_t k = ref.steps()[r];
            if (k < first) continue;
            if (axis == Axis::time) {
                const std::size_t r2 = ref.row_of_step(k + h);
                if (r2 >= ref.rows()) continue;
                for (const auto& f : ensemble) {
                    for (std::size_t j = 0; j < n; ++j) {
                        sum += std::pow(std::abs(f.at(r2, j) - f.at(r, j)), p);
                    }
                }
                count += ensemble.size() * n;
            } else {
                if (h >= n) continue;
                for (const auto& f : ensemble) {
                    for (std::size_t j = 0; j < n; ++j) {
                        sum += std::pow(std::abs(f.at(r, (j + h) % n) - f.at(r, j)), p);
                    }
                }
                count += ensemble.size() * n;
            }
        }
        if (count == 0) continue;
        if (!(sum > 0.0)) {
            zero_seen = true;
            continue;
        }
        const double step = axis == Axis::time ? grid.time().dt() : grid.dx();
        fit.lags.push_back(static_cast<double>(h) * step);
        fit.norms.push_back(std::pow(sum / static_cast<double>(count), 1.0 / p));
    }
    if (fit.lags.size() < 3) {
        throw InputError(zero_seen ? "holder_estimate: zero increments, slope undefined"
                                   : "holder_estimate: fewer than 3 usable lags");
    }
    const double m = static_cast<double>(fit.lags.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < fit.lags.size(); ++i) {
        mx += std::log(fit.lags[i]);
        my += std::log(fit.norms[i]);
    }
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < fit.lags.size(); ++i) {
        const double dx = std::log(fit.lags[i]) - mx;
        sxy += dx * (std::log(fit.norms[i]) - my);
        sxx += dx * dx;
    }
    fit.exponent = sxy / sxx;
    return fit;
}

} // namespace spde::moments
