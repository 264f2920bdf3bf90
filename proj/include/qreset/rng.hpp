#pragma once

#include <array>
#include <cstdint>
#include <utility>

namespace qreset {

/// Philox4x32-10 counter-based block cipher. Pure function of (counter, key):
/// the draw at a given coordinate never depends on call order, which makes
/// parallel sample generation reproducible by construction.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Deterministic random stream addressed by (seed, stream). Each draw is
/// indexed explicitly; identical coordinates give identical values on any
/// thread count or schedule.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    /// Uniform double in the open interval (0, 1).
    double uniform(std::uint64_t index) const;

    /// Pair of independent standard normals (Box-Muller).
    std::pair<double, double> normal_pair(std::uint64_t index) const;

    double normal(std::uint64_t index) const { return normal_pair(index).first; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t index) const;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

/// Packs (experiment, point, shot) into a stream id: experiments get the top
/// 16 bits, sweep points the next 24, shots the low 24.
constexpr std::uint64_t pack_stream(std::uint64_t experiment, std::uint64_t point,
                                    std::uint64_t shot) {
    return (experiment << 48) | ((point & 0xFFFFFF) << 24) | (shot & 0xFFFFFF);
}

}  // namespace qreset
