#include "spde/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "spde/error.hpp"
#include "spde/parallel.hpp"
#include "spde/special.hpp"

namespace spde::conditions {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_riesz_range(double alpha, std::size_t d) {
    if (!(alpha > 0.0 && alpha < static_cast<double>(d))) {
        throw DomainError("Riesz order alpha must lie in (0,d)");
    }
}

void require_hurst(double hurst) {
    if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("Hurst index must lie in (1/2,1)");
}

double sphere_area(std::size_t d) {
    const double dd = static_cast<double>(d);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd);
}

double log_beta(double a, double b) {
    return special::log_gamma(a) + special::log_gamma(b) - special::log_gamma(a + b);
}

// int_0^inf r^{a-1} h(r) dr, split at 1 so the endpoint behaviour at 0 and
// the tail are each handled by a rule built for them.
template <typename H>
double radial_quadrature(double a, H h) {
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    const auto f = [&](double r) { return std::pow(r, a - 1.0) * h(r); };
    return near.integrate(f, 0.0, 1.0) + far.integrate(f, 1.0, inf);
}

// int_R |tau|^b (A + tau^2)^{-1} nu-density dtau for nu = c |tau|^b.
double inner_time_integral(const SpectralMeasure& nu, double big_a) {
    const double b = nu.kind == SpectralMeasure::Kind::lebesgue ? 0.0 : nu.exponent;
    const double c = nu.kind == SpectralMeasure::Kind::lebesgue ? 1.0 : nu.constant;
    const double half = radial_quadrature(b + 1.0, [big_a](double tau) {
        return 1.0 / (big_a + tau * tau);
    });
    return 2.0 * c * half;
}

void check_dim(const SpectralMeasure& m, std::size_t d) {
    if (m.dim != d) throw ShapeError("spectral measure dimension does not match d");
}

} // namespace

const char* to_string(Method m) noexcept {
    return m == Method::closed_form ? "closed_form" : "quadrature";
}

SpectralMeasure SpectralMeasure::lebesgue(std::size_t dim) {
    return {Kind::lebesgue, 0.0, 1.0, dim};
}

SpectralMeasure SpectralMeasure::riesz(double alpha, std::size_t dim) {
    require_riesz_range(alpha, dim);
    const double d = static_cast<double>(dim);
    // Fourier transform of |x|^{-alpha}, normalized so f(x) = int e^{i x xi} mu(dxi).
    const double c = std::pow(2.0, -alpha) * std::pow(std::numbers::pi, -0.5 * d) *
                     std::tgamma(0.5 * (d - alpha)) / std::tgamma(0.5 * alpha);
    return {Kind::power, alpha - d, c, dim};
}

SpectralMeasure SpectralMeasure::fractional_time(double hurst) {
    require_hurst(hurst);
    auto m = riesz(2.0 - 2.0 * hurst, 1);
    return m;
}

SpectralMeasure SpectralMeasure::power(double exponent, double constant, std::size_t dim) {
    if (!(exponent > -static_cast<double>(dim))) {
        throw DomainError("power spectral measure needs exponent > -dim to be tempered");
    }
    if (!(constant > 0.0)) throw DomainError("spectral constant must be positive");
    return {Kind::power, exponent, constant, dim};
}

double SpectralMeasure::riesz_order() const noexcept {
    return kind == Kind::lebesgue ? static_cast<double>(dim) : exponent + static_cast<double>(dim);
}

ConditionVerdict check_dalang_riesz(double alpha, std::size_t d) {
    require_riesz_range(alpha, d);
    ConditionVerdict v;
    v.method = Method::closed_form;
    v.satisfied = alpha < std::min(static_cast<double>(d), 2.0);
    v.parameters = {{"alpha", alpha}, {"d", static_cast<double>(d)}, {"kappa", 1.0}};
    if (v.satisfied) {
        const auto mu = SpectralMeasure::riesz(alpha, d);
        v.integral_estimate =
            mu.constant * sphere_area(d) * 0.5 * std::exp(log_beta(0.5 * alpha, 1.0 - 0.5 * alpha));
    }
    return v;
}

ConditionVerdict check_fractional(OperatorKind op, double alpha, double hurst, std::size_t d) {
    require_hurst(hurst);
    require_riesz_range(alpha, d);
    const double kappa = op == OperatorKind::heat ? 2.0 * hurst : hurst + 0.5;
    ConditionVerdict v;
    v.method = Method::closed_form;
    v.satisfied = alpha < 2.0 * kappa;
    v.parameters = {{"alpha", alpha}, {"hurst", hurst}, {"d", static_cast<double>(d)},
                    {"kappa", kappa}};
    if (v.satisfied) {
        const auto mu = SpectralMeasure::riesz(alpha, d);
        v.integral_estimate = mu.constant * sphere_area(d) * 0.5 *
                              std::exp(log_beta(0.5 * alpha, kappa - 0.5 * alpha));
    }
    return v;
}

ConditionVerdict dalang_integral_numeric(const SpectralMeasure& mu, double kappa, std::size_t d) {
    check_dim(mu, d);
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    const double a = mu.riesz_order();
    ConditionVerdict v;
    v.method = Method::quadrature;
    v.parameters = {{"alpha", a}, {"d", static_cast<double>(d)}, {"kappa", kappa}};
    // integrand ~ r^{a-1-2 kappa} at infinity
    v.satisfied = a < 2.0 * kappa;
    if (v.satisfied) {
        v.integral_estimate = mu.constant * sphere_area(d) *
                              radial_quadrature(a, [kappa](double r) {
                                  return std::pow(1.0 + r * r, -kappa);
                              });
    }
    return v;
}

ConditionVerdict general_joint_condition(OperatorKind op, const SpectralMeasure& nu,
                                         const SpectralMeasure& mu, std::size_t d) {
    check_dim(mu, d);
    if (nu.dim != 1) throw ShapeError("time spectral measure must live on R");
    if (mu.kind == SpectralMeasure::Kind::power && !(mu.exponent < 0.0)) {
        throw DomainError("spatial Riesz-type measure requires alpha < d");
    }
    const double b = nu.kind == SpectralMeasure::Kind::lebesgue ? 0.0 : nu.exponent;
    if (!(b > -1.0 && b < 1.0)) {
        throw DomainError("time spectral exponent must lie in (-1,1)");
    }
    const double a = mu.riesz_order();
    ConditionVerdict v;
    v.method = Method::quadrature;
    v.parameters = {{"alpha", a}, {"time_exponent", b}, {"d", static_cast<double>(d)}};
    // Inner integral scales like A^{(b-1)/2}; A = 1 + r^4 (heat) or 1 + r^2 (wave).
    if (op == OperatorKind::heat) {
        v.satisfied = a < 2.0 * (1.0 - b);
    } else {
        v.satisfied = a < 2.0 - b;
    }
    if (v.satisfied) {
        const double outer = radial_quadrature(a, [&](double r) {
            const double r2 = r * r;
            if (op == OperatorKind::heat) return inner_time_integral(nu, 1.0 + r2 * r2);
            return inner_time_integral(nu, 1.0 + r2) / std::sqrt(1.0 + r2);
        });
        v.integral_estimate = mu.constant * sphere_area(d) * outer;
    }
    return v;
}

HolderOrders predicted_holder(OperatorKind op, double eta) {
    if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0,1)");
    if (op == OperatorKind::heat) return {0.5 * (1.0 - eta), 1.0 - eta};
    return {1.0 - eta, 1.0 - eta};
}

HolderOrders predicted_holder_fractional(OperatorKind op, double alpha, double hurst,
                                         std::size_t d) {
    require_hurst(hurst);
    if (!(alpha > 0.0 && alpha < std::min(static_cast<double>(d), 2.0))) {
        throw DomainError("alpha must lie in (0, d ^ 2)");
    }
    if (op != OperatorKind::heat) {
        throw CapabilityError("fractional-time Hoelder orders are known for the heat equation only");
    }
    const double order = 2.0 * hurst - 0.5 * alpha;
    return {0.5 * order, std::min(1.0, order)};
}

GProfile GProfile::constant(double beta) {
    if (!(beta >= 0.0)) throw DomainError("constant profile must be nonnegative");
    GProfile p;
    p.kind_ = Kind::constant;
    p.beta_ = beta;
    p.g_ = [beta](double) { return beta; };
    p.name_ = "constant";
    return p;
}

GProfile GProfile::heat_1d() {
    GProfile p;
    p.kind_ = Kind::heat_1d;
    p.g_ = [](double s) { return 1.0 / std::sqrt(4.0 * std::numbers::pi * s); };
    p.name_ = "heat_1d";
    return p;
}

GProfile GProfile::wave_1d() {
    GProfile p;
    p.kind_ = Kind::wave_1d;
    p.g_ = [](double s) { return 0.5 * s; };
    p.name_ = "wave_1d";
    return p;
}

GProfile GProfile::from_function(std::function<double(double)> g, std::string name) {
    GProfile p;
    p.kind_ = Kind::generic;
    p.g_ = std::move(g);
    p.name_ = std::move(name);
    return p;
}

double GProfile::integral(double t_max) const {
    switch (kind_) {
    case Kind::constant: return beta_ * t_max;
    case Kind::heat_1d: return std::sqrt(t_max / std::numbers::pi);
    case Kind::wave_1d: return 0.25 * t_max * t_max;
    case Kind::generic: break;
    }
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(g_, 0.0, t_max);
}

std::function<double(double)> GProfile::sampler(double t_max) const {
    switch (kind_) {
    case Kind::constant: return [t_max](double u) { return t_max * u; };
    case Kind::heat_1d: return [t_max](double u) { return t_max * u * u; };   // density ~ s^{-1/2}
    case Kind::wave_1d: return [t_max](double u) { return t_max * std::sqrt(u); }; // ~ s
    case Kind::generic: break;
    }
    // Tabulate the CDF on a grid that is quadratic near 0, where g may blow up.
    constexpr std::size_t n = 2048;
    std::vector<double> s(n + 1), cdf(n + 1, 0.0);
    boost::math::quadrature::tanh_sinh<double> q;
    for (std::size_t i = 0; i <= n; ++i) {
        const double v = static_cast<double>(i) / n;
        s[i] = t_max * v * v;
        if (i > 0) cdf[i] = cdf[i - 1] + q.integrate(g_, s[i - 1], s[i]);
    }
    const double total = cdf[n];
    if (!(total > 0.0)) throw InputError("g profile has zero mass on [0,T]");
    for (double& c : cdf) c /= total;
    return [s = std::move(s), cdf = std::move(cdf)](double u) {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.begin()) return s.front();
        if (it == cdf.end()) return s.back();
        const auto i = static_cast<std::size_t>(it - cdf.begin());
        const double w = (u - cdf[i - 1]) / (cdf[i] - cdf[i - 1]);
        return s[i - 1] + w * (s[i] - s[i - 1]);
    };
}

GronwallCertificate dalang_gronwall_certificate(const GProfile& g, double t_max, double bound_m,
                                                std::size_t n_max, std::size_t replicas,
                                                const RngStream& rng) {
    if (!(t_max > 0.0)) throw DomainError("certificate requires T > 0");
    if (replicas == 0) throw InputError("certificate requires at least one replica");
    const double g_total = g.integral(t_max);
    if (!(g_total > 0.0)) throw InputError("degenerate profile: G(T) = 0");
    const auto draw = g.sampler(t_max);

    // Largest n with S_n <= T for each replica (S_n is increasing in n).
    const auto reach = parallel::map_replicas<std::size_t>(replicas, [&](std::size_t r) {
        const RngStream stream = rng.child(r);
        double sum = 0.0;
        std::size_t n = 0;
        while (n < n_max) {
            sum += draw(stream.uniform_at(n));
            if (sum > t_max) break;
            ++n;
        }
        return n;
    });

    std::vector<std::size_t> count(n_max + 1, 0);
    for (std::size_t n_r : reach) ++count[n_r];
    GronwallCertificate c;
    c.g_total = g_total;
    c.replicas = replicas;
    std::size_t at_least = replicas;
    double pow_g = 1.0;
    double s1 = 0.0, s2 = 0.0;
    const double rr = static_cast<double>(replicas);
    for (std::size_t n = 0; n <= n_max; ++n) {
        const double p = static_cast<double>(at_least) / rr;
        const double a = n == 0 ? 1.0 : pow_g * p;
        c.a.push_back(a);
        c.a_stderr.push_back(n == 0 ? 0.0 : pow_g * std::sqrt(p * (1.0 - p) / rr));
        c.bounds.push_back(bound_m * a);
        s1 += a;
        s2 += std::sqrt(a);
        c.partial_sums_p1.push_back(s1);
        c.partial_sums_p2.push_back(s2);
        at_least -= count[n];
        pow_g *= g_total;
    }
    return c;
}

} // namespace spde::conditions
