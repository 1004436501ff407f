#include "spdc/refraction.hpp"

#include <cmath>
#include <string>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

namespace spdc {

Geometry::Geometry(Plane plane, double theta_deg, double phi_deg)
    : plane_(plane), theta_(theta_deg), phi_(phi_deg) {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::validation, "geometry: " + what); };
    if (!(theta_ >= 0.0 && theta_ <= 90.0)) bad("theta must lie in [0, 90] degrees");
    if (!(phi_ >= 0.0 && phi_ <= 360.0)) bad("phi must lie in [0, 360] degrees");
    if (plane_ != Plane::uniaxial && phi_ > 90.0) bad("phi must lie in [0, 90] degrees");
    if (plane_ == Plane::xz && phi_ != 0.0) bad("xz plane requires phi = 0");
    if (plane_ == Plane::yz && phi_ != 90.0) bad("yz plane requires phi = 90");
    if (plane_ == Plane::xy && theta_ != 90.0) bad("xy plane requires theta = 90");
}

Geometry Geometry::in_plane(Plane plane, double angle_deg) {
    switch (plane) {
        case Plane::uniaxial: return Geometry(plane, angle_deg, 0.0);
        case Plane::xz: return Geometry(plane, angle_deg, 0.0);
        case Plane::yz: return Geometry(plane, angle_deg, 90.0);
        case Plane::xy: return Geometry(plane, 90.0, angle_deg);
    }
    return {};
}

Geometry Geometry::with_free_angle(double angle_deg) const {
    Geometry g = in_plane(plane_, angle_deg);
    if (plane_ == Plane::uniaxial) g.phi_ = phi_;
    return g;
}

Geometry Geometry::with_phi(double phi_deg) const {
    if (plane_ != Plane::uniaxial)
        throw Error(ErrorKind::validation, "geometry: azimuth is fixed in biaxial principal planes");
    return Geometry(plane_, theta_, phi_deg);
}

std::string_view free_angle_name(Plane plane) { return plane == Plane::xy ? "phi" : "theta"; }

std::string_view to_string(Branch b) {
    return b == Branch::ordinary_like ? "ordinary_like" : "extraordinary_like";
}

namespace {

void check_plane(const Crystal& crystal, Plane plane) {
    const bool uni = crystal.axis_class == AxisClass::uniaxial;
    if (uni != (plane == Plane::uniaxial))
        throw Error(ErrorKind::validation,
                    "plane " + std::string(to_string(plane)) + " does not match " +
                        std::string(to_string(crystal.axis_class)) + " crystal " + crystal.name);
}

}  // namespace

PlaneIndices plane_indices(const Crystal& crystal, Plane plane, double lambda_um) {
    check_plane(crystal, plane);
    auto n = [&](const char* axis) { return crystal.axis(axis).index(lambda_um); };
    switch (plane) {
        case Plane::uniaxial: return {n("o"), n("e"), n("o")};
        case Plane::xz: return {n("x"), n("z"), n("y")};
        case Plane::yz: return {n("y"), n("z"), n("x")};
        case Plane::xy: return {n("y"), n("x"), n("z")};
    }
    return {};
}

double angle_dependent_index(const PlaneIndices& p, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return 1.0 / std::sqrt(c * c / (p.first * p.first) + s * s / (p.second * p.second));
}

double refractive_index(const Crystal& crystal, const Geometry& geometry, Branch branch,
                        double lambda_um) {
    const PlaneIndices p = plane_indices(crystal, geometry.plane(), lambda_um);
    const bool pump_in_plane = crystal.pump_wave(geometry.plane()) == PumpWave::in_plane;
    const bool in_plane = (branch == Branch::extraordinary_like) == pump_in_plane;
    if (!in_plane) return p.fixed;
    return angle_dependent_index(p, deg_to_rad(geometry.free_angle_deg()));
}

double wave_number(const Crystal& crystal, const Geometry& geometry, Branch branch,
                   double lambda_um) {
    return 2.0 * kPi * refractive_index(crystal, geometry, branch, lambda_um) / lambda_um;
}

double inverse_group_velocity(const Crystal& crystal, const Geometry& geometry, Branch branch,
                              double lambda_um, double relative_step) {
    // k(nu) = n(1/nu) nu with nu = 1/lambda, in units where c = 1.
    const double nu = 1.0 / lambda_um;
    const double up = nu * (1.0 + relative_step);
    const double down = nu * (1.0 - relative_step);
    auto k = [&](double v) {
        try {
            return refractive_index(crystal, geometry, branch, 1.0 / v) * v;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::out_of_range) throw;
            throw Error(ErrorKind::out_of_range,
                        "group-velocity stencil around " + format_number(lambda_um, 6) +
                            " um leaves the Sellmeier valid range");
        }
    };
    return (k(up) - k(down)) / (up - down);
}

double walkoff_angle(const Crystal& crystal, const Geometry& geometry, double lambda_um) {
    const double a = geometry.free_angle_deg();
    if (a == 0.0 || a == 90.0) return 0.0;
    const PlaneIndices p = plane_indices(crystal, geometry.plane(), lambda_um);
    const double ratio = (p.first * p.first) / (p.second * p.second);
    const double ar = deg_to_rad(a);
    return rad_to_deg(std::atan(ratio * std::tan(ar)) - ar);
}

bool has_deff_formula(const Crystal& crystal, Plane plane) {
    const auto& g = crystal.point_group;
    if (g == "3m") return plane == Plane::uniaxial;
    if (g == "mm2") return plane == Plane::xz || plane == Plane::yz;
    if (g == "2") return plane == Plane::xz && crystal.d("d26").has_value();
    return false;
}

double effective_nonlinearity(const Crystal& crystal, const Geometry& geometry, double lambda_um,
                              std::string_view scenario) {
    const Plane plane = geometry.plane();
    check_plane(crystal, plane);
    auto need = [&](const char* label) {
        auto v = crystal.d(label);
        if (!v)
            throw Error(ErrorKind::unsupported,
                        "crystal " + crystal.name + " lacks " + label + " for its d_eff formula");
        return *v;
    };
    if (has_deff_formula(crystal, plane)) {
        const double a = deg_to_rad(geometry.free_angle_deg() + walkoff_angle(crystal, geometry, lambda_um));
        const double c = std::cos(a);
        const double s = std::sin(a);
        if (crystal.point_group == "3m")
            return need("d22") * c * c * std::cos(3.0 * deg_to_rad(geometry.phi_deg()));
        if (crystal.point_group == "mm2") {
            if (plane == Plane::xz) return need("d32") * s * s + need("d31") * c * c;
            return need("d31") * c;
        }
        return need("d26") * c;
    }
    const std::string key = std::string(to_string(plane)) + "/" + std::string(scenario);
    auto it = crystal.deff_table.find(key);
    if (scenario.empty() || it == crystal.deff_table.end())
        throw Error(ErrorKind::unsupported,
                    "no d_eff formula for point group " + crystal.point_group + " in plane " +
                        std::string(to_string(plane)) + " and no deff_table entry '" + key +
                        "' for crystal " + crystal.name);
    return it->second;
}

}  // namespace spdc
