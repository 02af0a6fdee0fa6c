#include "spde/rng.hpp"

#include <cmath>
#include <numbers>

namespace spde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint32_t kNormalDomain = 0u;
constexpr std::uint32_t kUniformDomain = 1u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0,1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline void box_muller(const PhiloxCounter& r, double& z0, double& z1) {
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
}

} // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RngStream RngStream::child(std::uint64_t lane) const noexcept {
    return RngStream(seed_, mix64(stream_id_ ^ mix64(lane + 0x632BE59BD9B4E019ull)));
}

PhiloxCounter RngStream::block(std::uint64_t block_index, std::uint32_t domain) const noexcept {
    // Top two bits of the block index carry the draw domain.
    const std::uint64_t tagged = (block_index & 0x3FFFFFFFFFFFFFFFull) |
                                 (static_cast<std::uint64_t>(domain) << 62);
    const PhiloxCounter ctr = {static_cast<std::uint32_t>(tagged),
                               static_cast<std::uint32_t>(tagged >> 32),
                               static_cast<std::uint32_t>(stream_id_),
                               static_cast<std::uint32_t>(stream_id_ >> 32)};
    const PhiloxKey key = {static_cast<std::uint32_t>(seed_),
                           static_cast<std::uint32_t>(seed_ >> 32)};
    return philox4x32_10(ctr, key);
}

double RngStream::normal_at(std::uint64_t index) const noexcept {
    double z0, z1;
    box_muller(block(index >> 1, kNormalDomain), z0, z1);
    return (index & 1u) ? z1 : z0;
}

double RngStream::uniform_at(std::uint64_t index) const noexcept {
    const PhiloxCounter r = block(index >> 1, kUniformDomain);
    return (index & 1u) ? to_open_unit(r[2], r[3]) : to_open_unit(r[0], r[1]);
}

void RngStream::fill_normal(std::span<double> out, std::uint64_t first) const noexcept {
    std::size_t k = 0;
    const std::size_t n = out.size();
    if (n == 0) return;
    if (first & 1u) {
        out[0] = normal_at(first);
        k = 1;
    }
    for (; k + 1 < n; k += 2) {
        box_muller(block((first + k) >> 1, kNormalDomain), out[k], out[k + 1]);
    }
    if (k < n) out[k] = normal_at(first + k);
}

void RngStream::fill_normal(std::span<double> out) noexcept {
    fill_normal(out, position_);
    position_ += out.size();
}

} // namespace spde
