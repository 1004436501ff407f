#pragma once

#include <numbers>

namespace spdc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLightNmPerFs = 299.792458;

constexpr double nm_to_um(double nm) { return nm * 1e-3; }
constexpr double um_to_nm(double um) { return um * 1e3; }
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Angular frequency in rad/fs for a vacuum wavelength in nm.
constexpr double angular_frequency(double lambda_nm) {
    return 2.0 * kPi * kSpeedOfLightNmPerFs / lambda_nm;
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr bool contains(double x) const { return x >= lo && x <= hi; }
    constexpr bool contains(const Interval& other) const {
        return other.lo >= lo && other.hi <= hi;
    }
    constexpr double width() const { return hi - lo; }
    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace spdc
