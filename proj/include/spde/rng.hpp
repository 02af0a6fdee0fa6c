#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace spde {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

// SplitMix64 finalizer, used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Deterministic, index-addressable Gaussian source.
//
// Draw i of stream (seed, stream_id) is a pure function of (seed, stream_id,
// i): the key holds the seed, the counter holds the stream id and the block
// index. Results therefore do not depend on which worker evaluates which draw.
class RngStream {
  public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return position_; }

    // Independent stream for a sub-task (replica r, lane k, ...).
    RngStream child(std::uint64_t lane) const noexcept;

    // Standard normal draw at absolute index i; does not move position().
    double normal_at(std::uint64_t index) const noexcept;
    // Uniform on the open interval (0,1) at absolute index i.
    double uniform_at(std::uint64_t index) const noexcept;

    double normal() noexcept { return normal_at(position_++); }
    double uniform() noexcept { return uniform_at(position_++); }

    // Fills out[k] = normal_at(first + k).
    void fill_normal(std::span<double> out, std::uint64_t first) const noexcept;
    // Sequential fill, advancing position().
    void fill_normal(std::span<double> out) noexcept;

  private:
    PhiloxCounter block(std::uint64_t block_index, std::uint32_t domain) const noexcept;

    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t position_ = 0;
};

} // namespace spde
