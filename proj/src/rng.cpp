#include "qreset/rng.hpp"

#include <cmath>
#include <numbers>

namespace qreset {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = std::uint64_t(a) * b;
    hi = std::uint32_t(p >> 32);
    lo = std::uint32_t(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index) const {
    const std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(index), std::uint32_t(index >> 32),
        std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)};
    return philox4x32(ctr, key);
}

namespace {
// 53 random bits, offset by half an ulp so the result is strictly inside (0,1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
    return (double(bits >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

double CounterRng::uniform(std::uint64_t index) const {
    const auto b = block(index);
    return to_open_unit(b[0], b[1]);
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t index) const {
    const auto b = block(index);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace qreset
