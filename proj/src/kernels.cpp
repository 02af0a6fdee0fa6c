#include "spde/kernels.hpp"

#include <cmath>
#include <numbers>

#include "spde/error.hpp"

namespace spde::kernels {

namespace {

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

} // namespace

const char* to_string(OperatorKind kind) noexcept {
    return kind == OperatorKind::heat ? "heat" : "wave";
}

double heat_kernel(double t, std::span<const double> x) {
    if (!(t > 0.0)) throw DomainError("heat_kernel requires t > 0");
    const double d = static_cast<double>(x.size());
    return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-norm2(x) / (2.0 * t));
}

double heat_kernel(double t, double x) {
    return heat_kernel(t, std::span<const double>(&x, 1));
}

double wave_kernel(double t, std::span<const double> x) {
    if (!(t > 0.0)) throw DomainError("wave_kernel requires t > 0");
    const double r2 = norm2(x);
    switch (x.size()) {
    case 1: return r2 < t * t ? 0.5 : 0.0;
    case 2:
        return r2 < t * t ? 1.0 / (2.0 * std::numbers::pi * std::sqrt(t * t - r2)) : 0.0;
    case 3:
        throw CapabilityError(
            "wave kernel in d=3 is the measure-valued surface measure sigma_t/(4 pi t); "
            "pointwise values do not exist");
    default: break;
    }
    throw CapabilityError("wave kernel is only a function for d in {1,2}");
}

double wave_kernel(double t, double x) {
    return wave_kernel(t, std::span<const double>(&x, 1));
}

double g_squared_integral(const OperatorSpec& op, double s) {
    if (!(s > 0.0)) throw DomainError("g(s) requires s > 0");
    if (op.dim == 1) {
        if (op.kind == OperatorKind::heat) return 1.0 / std::sqrt(4.0 * std::numbers::pi * s);
        return 0.5 * s;
    }
    throw CapabilityError("g(s) closed form is provided for d = 1 only");
}

double riesz_kernel(double alpha, std::span<const double> x) {
    if (!(alpha > 0.0 && alpha < static_cast<double>(x.size()))) {
        throw DomainError("riesz_kernel requires alpha in (0,d)");
    }
    const double r2 = norm2(x);
    if (r2 == 0.0) throw DomainError("riesz_kernel is singular at 0; use cell_covariance");
    return std::pow(r2, -0.5 * alpha);
}

double riesz_kernel(double alpha, double x) {
    return riesz_kernel(alpha, std::span<const double>(&x, 1));
}

double gamma_fractional(double hurst, double t) {
    if (!(hurst > 0.5 && hurst < 1.0)) throw DomainError("gamma_fractional requires H in (1/2,1)");
    if (t == 0.0) throw DomainError("gamma_fractional is singular at 0; use cell_covariance");
    return std::pow(std::abs(t), 2.0 * hurst - 2.0);
}

} // namespace spde::kernels
