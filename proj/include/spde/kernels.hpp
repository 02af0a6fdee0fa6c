#pragma once

#include <cstddef>
#include <span>

namespace spde::kernels {

enum class OperatorKind { heat, wave };

const char* to_string(OperatorKind kind) noexcept;

// L = d/dt - (1/2) Laplacian (heat) or d^2/dt^2 - Laplacian (wave) on R^d.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::heat;
    std::size_t dim = 1;
};

// (2 pi t)^{-d/2} exp(-|x|^2 / (2t)), d = x.size().
double heat_kernel(double t, std::span<const double> x);
double heat_kernel(double t, double x);

// d = 1: (1/2) 1_{|x|<t}; d = 2: (2 pi)^{-1} (t^2 - |x|^2)^{-1/2} 1_{|x|<t}.
// d = 3 is a surface measure and is rejected with CapabilityError.
double wave_kernel(double t, std::span<const double> x);
double wave_kernel(double t, double x);

// g(s) = int G(s,y)^2 dy, closed form for (heat, d=1) and (wave, d=1).
double g_squared_integral(const OperatorSpec& op, double s);

// f(x) = |x|^{-alpha}; the zero point raises DomainError (singular).
double riesz_kernel(double alpha, std::span<const double> x);
double riesz_kernel(double alpha, double x);

// gamma(t) = |t|^{2H-2}, H in (1/2,1).
double gamma_fractional(double hurst, double t);

} // namespace spde::kernels
