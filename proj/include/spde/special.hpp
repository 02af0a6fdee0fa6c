#pragma once

#include <cstddef>
#include <vector>

namespace spde::special {

inline constexpr std::size_t default_hermite_max_order = 200;

// Probabilists' Hermite polynomials H_n, He_n in some texts:
// H_0 = 1, H_1 = x, H_{n+1} = x H_n - n H_{n-1}.
class HermiteTable {
  public:
    explicit HermiteTable(std::size_t max_order = default_hermite_max_order);

    std::size_t max_order() const noexcept { return max_order_; }

    // H_n(x). Throws CapabilityError when n exceeds max_order(). The result
    // is +-inf only when the true value is beyond double range.
    double operator()(std::size_t n, double x) const;

    // H_0(x) .. H_n(x) in one recurrence sweep.
    std::vector<double> all(std::size_t n, double x) const;

  private:
    std::size_t max_order_;
};

// Value represented as mantissa * 2^exponent, for Hermite values that
// overflow a double.
struct ScaledValue {
    double mantissa = 0.0;
    long exponent = 0;

    double value() const;
};

double hermite(std::size_t n, double x);
ScaledValue hermite_scaled(std::size_t n, double x,
                           std::size_t max_order = default_hermite_max_order);

// Standard normal distribution function.
double std_normal_cdf(double x);

// log Gamma(x) for x > 0; DomainError otherwise.
double log_gamma(double x);

} // namespace spde::special
