#pragma once

#include <array>
#include <cstdint>

namespace flipscore {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Output is a pure function of (key, counter), so any draw can be
/// regenerated independently of evaluation order.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter ctr, Key key) noexcept;
};

/// SplitMix64 finalizer; used to derive independent 64-bit sub-seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Combines a seed with a stream tag and index into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

/// Sequential reader over one Philox stream identified by (seed, stream id).
///
/// Draw k of stream s is Philox(key = seed, counter = (k, s)), so two streams
/// with different ids never overlap.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform on (0, 1].
    double uniform() noexcept;
    double normal() noexcept;
    bool bernoulli(double p) noexcept { return uniform() <= p; }

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;  // in 32-bit words
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace flipscore
