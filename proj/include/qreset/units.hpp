#pragma once

#include <compare>
#include <numbers>

namespace qreset {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Angular frequency (or rate). Stored internally in rad/s; every I/O
/// surface speaks cyclic MHz because device numbers are quoted as omega/2pi.
/// Converting at exactly one boundary keeps factor-of-2pi bugs out of the
/// dynamics code.
class Frequency {
public:
    constexpr Frequency() = default;

    static constexpr Frequency from_mhz(double nu_mhz) {
        return Frequency(two_pi * nu_mhz * 1e6);
    }
    static constexpr Frequency from_khz(double nu_khz) {
        return Frequency(two_pi * nu_khz * 1e3);
    }
    static constexpr Frequency from_ghz(double nu_ghz) {
        return Frequency(two_pi * nu_ghz * 1e9);
    }
    static constexpr Frequency from_rad_per_s(double w) { return Frequency(w); }

    constexpr double mhz() const { return rad_s_ / (two_pi * 1e6); }
    constexpr double khz() const { return rad_s_ / (two_pi * 1e3); }
    constexpr double ghz() const { return rad_s_ / (two_pi * 1e9); }
    constexpr double rad_per_s() const { return rad_s_; }
    constexpr double hz() const { return rad_s_ / two_pi; }

    constexpr Frequency operator+(Frequency o) const { return Frequency(rad_s_ + o.rad_s_); }
    constexpr Frequency operator-(Frequency o) const { return Frequency(rad_s_ - o.rad_s_); }
    constexpr Frequency operator-() const { return Frequency(-rad_s_); }
    constexpr Frequency operator*(double s) const { return Frequency(rad_s_ * s); }
    constexpr Frequency operator/(double s) const { return Frequency(rad_s_ / s); }
    constexpr double operator/(Frequency o) const { return rad_s_ / o.rad_s_; }
    friend constexpr Frequency operator*(double s, Frequency f) { return f * s; }
    constexpr auto operator<=>(const Frequency&) const = default;

private:
    explicit constexpr Frequency(double rad_s) : rad_s_(rad_s) {}
    double rad_s_ = 0.0;
};

namespace literals {
constexpr Frequency operator""_mhz(long double v) { return Frequency::from_mhz(static_cast<double>(v)); }
constexpr Frequency operator""_mhz(unsigned long long v) { return Frequency::from_mhz(static_cast<double>(v)); }
}  // namespace literals

}  // namespace qreset
