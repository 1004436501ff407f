#pragma once

#include <string_view>

#include "spdc/crystal.hpp"

namespace spdc {

// Propagation direction restricted to a principal plane; angles in degrees.
class Geometry {
public:
    Geometry() = default;
    Geometry(Plane plane, double theta_deg, double phi_deg);

    // Sets the plane's free angle (theta, or phi for the xy plane).
    static Geometry in_plane(Plane plane, double angle_deg);

    Plane plane() const { return plane_; }
    double theta_deg() const { return theta_; }
    double phi_deg() const { return phi_; }
    double free_angle_deg() const { return plane_ == Plane::xy ? phi_ : theta_; }
    Geometry with_free_angle(double angle_deg) const;
    // Only the uniaxial azimuth is free; used for the 3m d_eff factor.
    Geometry with_phi(double phi_deg) const;

    friend bool operator==(const Geometry&, const Geometry&) = default;

private:
    Plane plane_ = Plane::uniaxial;
    double theta_ = 0.0;
    double phi_ = 0.0;
};

std::string_view free_angle_name(Plane plane);

enum class Branch { ordinary_like, extraordinary_like };
std::string_view to_string(Branch b);

// Principal indices seen in a plane at one wavelength. The angle-dependent wave
// obeys 1/n^2 = cos^2(a)/first^2 + sin^2(a)/second^2; `fixed` is the other wave.
struct PlaneIndices {
    double first = 0.0;
    double second = 0.0;
    double fixed = 0.0;
};

PlaneIndices plane_indices(const Crystal& crystal, Plane plane, double lambda_um);
double angle_dependent_index(const PlaneIndices& p, double angle_rad);

double refractive_index(const Crystal& crystal, const Geometry& geometry, Branch branch,
                        double lambda_um);

// k = 2 pi n / lambda in rad/um.
double wave_number(const Crystal& crystal, const Geometry& geometry, Branch branch,
                   double lambda_um);

inline constexpr double kGroupVelocityStep = 1e-4;

// k'(omega) in units of 1/c (group index), by central difference in omega.
double inverse_group_velocity(const Crystal& crystal, const Geometry& geometry, Branch branch,
                              double lambda_um, double relative_step = kGroupVelocityStep);

// Walk-off of the angle-dependent wave in degrees; zero at 0 and 90 degrees.
double walkoff_angle(const Crystal& crystal, const Geometry& geometry, double lambda_um);

// d_eff in pm/V from the point-group formula where one exists, otherwise from the
// crystal's deff_table under "<plane>/<scenario>".
double effective_nonlinearity(const Crystal& crystal, const Geometry& geometry, double lambda_um,
                              std::string_view scenario = {});
bool has_deff_formula(const Crystal& crystal, Plane plane);

}  // namespace spdc
