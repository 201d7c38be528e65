#ifndef TEQ_GEO_HPP
#define TEQ_GEO_HPP

#include <array>
#include <cmath>

#include "teq/error.hpp"

namespace teq {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kPi = 3.14159265358979323846;

struct GeoPoint {
    double lat = 0.0; // degrees, WGS84
    double lon = 0.0; // degrees, WGS84
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline void validate(const GeoPoint& p) {
    if (!(p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0))
        throw invalid_input("coordinate out of range: lat=" + std::to_string(p.lat) +
                            " lon=" + std::to_string(p.lon));
}

// Haversine great-circle distance in meters.
inline double great_circle_m(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dphi = phi2 - phi1;
    const double dlam = deg2rad(b.lon - a.lon);
    const double sp = std::sin(dphi / 2.0), sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

// Walk duration in whole seconds for a straight-line distance, applying the
// detour factor. Rounded up so a walk never beats the model.
inline int walk_seconds(double dist_m, double speed_mps, double detour) {
    if (dist_m <= 0.0) return 0;
    return static_cast<int>(std::ceil(detour * dist_m / speed_mps));
}

// Azimuthal equidistant projection anchored at `origin`. Distances and
// bearings from the anchor are exact; distortion elsewhere is negligible at
// city scale. x points east, y points north, both in meters.
class LocalProjection {
public:
    LocalProjection() : LocalProjection(GeoPoint{0.0, 0.0}) {}

    explicit LocalProjection(const GeoPoint& origin)
        : origin_(origin),
          phi0_(deg2rad(origin.lat)),
          lam0_(deg2rad(origin.lon)),
          sin_phi0_(std::sin(phi0_)),
          cos_phi0_(std::cos(phi0_)) {}

    const GeoPoint& origin() const { return origin_; }

    std::array<double, 2> forward(const GeoPoint& p) const {
        const double phi = deg2rad(p.lat);
        const double dlam = deg2rad(p.lon) - lam0_;
        const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);
        const double cos_c = sin_phi0_ * sin_phi + cos_phi0_ * cos_phi * std::cos(dlam);
        const double c = std::acos(std::clamp(cos_c, -1.0, 1.0));
        // k = c / sin(c), with limit 1 at the anchor itself
        const double k = c < 1e-12 ? 1.0 : c / std::sin(c);
        const double x = kEarthRadiusM * k * cos_phi * std::sin(dlam);
        const double y = kEarthRadiusM * k *
                         (cos_phi0_ * sin_phi - sin_phi0_ * cos_phi * std::cos(dlam));
        return {x, y};
    }

    GeoPoint inverse(double x, double y) const {
        const double rho = std::hypot(x, y);
        if (rho < 1e-9) return origin_;
        const double c = rho / kEarthRadiusM;
        const double sin_c = std::sin(c), cos_c = std::cos(c);
        const double phi = std::asin(std::clamp(
            cos_c * sin_phi0_ + y * sin_c * cos_phi0_ / rho, -1.0, 1.0));
        const double lam = lam0_ + std::atan2(x * sin_c,
                                              rho * cos_phi0_ * cos_c - y * sin_phi0_ * sin_c);
        return GeoPoint{rad2deg(phi), rad2deg(lam)};
    }

private:
    GeoPoint origin_;
    double phi0_, lam0_, sin_phi0_, cos_phi0_;
};

} // namespace teq

#endif
