#include "spde/special.hpp"

#include <cmath>
#include <string>

#include "spde/error.hpp"

namespace spde::special {

namespace {

constexpr double rescale_threshold = 1e300;
constexpr int rescale_bits = 1000;

void check_order(std::size_t n, std::size_t max_order) {
    if (n > max_order) {
        throw CapabilityError("Hermite order " + std::to_string(n) +
                              " exceeds configured maximum " + std::to_string(max_order));
    }
}

} // namespace

double ScaledValue::value() const {
    return std::ldexp(mantissa, static_cast<int>(exponent));
}

HermiteTable::HermiteTable(std::size_t max_order) : max_order_(max_order) {}

double HermiteTable::operator()(std::size_t n, double x) const {
    return hermite_scaled(n, x, max_order_).value();
}

std::vector<double> HermiteTable::all(std::size_t n, double x) const {
    check_order(n, max_order_);
    std::vector<double> h(n + 1);
    h[0] = 1.0;
    if (n >= 1) h[1] = x;
    for (std::size_t k = 1; k < n; ++k) {
        h[k + 1] = x * h[k] - static_cast<double>(k) * h[k - 1];
    }
    return h;
}

ScaledValue hermite_scaled(std::size_t n, double x, std::size_t max_order) {
    check_order(n, max_order);
    if (n == 0) return {1.0, 0};
    double prev = 1.0;
    double cur = x;
    long exponent = 0;
    for (std::size_t k = 1; k < n; ++k) {
        double next = x * cur - static_cast<double>(k) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > rescale_threshold) {
            cur = std::ldexp(cur, -rescale_bits);
            prev = std::ldexp(prev, -rescale_bits);
            exponent += rescale_bits;
        }
    }
    return {cur, exponent};
}

double hermite(std::size_t n, double x) {
    return hermite_scaled(n, x).value();
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw DomainError("log_gamma requires x > 0");
    }
    int sign = 0;
    return ::lgamma_r(x, &sign); // reentrant: std::lgamma writes signgam
}

} // namespace spde::special
