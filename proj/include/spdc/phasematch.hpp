#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/crystal.hpp"
#include "spdc/refraction.hpp"

namespace spdc {

enum class Photon { pump, signal, idler };
enum class GvmCondition { gvm1, gvm2, gvm3 };

std::string_view to_string(Photon p);
std::string_view to_string(GvmCondition c);
std::optional<GvmCondition> parse_condition(std::string_view text);
std::optional<Photon> parse_photon(std::string_view text);

// Type-II (e -> o + e). The default puts the signal on the ordinary-like branch.
struct PolarizationAssignment {
    Branch pump = Branch::extraordinary_like;
    Branch signal = Branch::ordinary_like;
    Branch idler = Branch::extraordinary_like;

    static PolarizationAssignment type2(bool signal_ordinary = true);
    Branch of(Photon p) const;
    bool is_type2() const;
    friend bool operator==(const PolarizationAssignment&, const PolarizationAssignment&) = default;
};

struct SpdcConfig {
    CrystalPtr crystal;
    Geometry geometry;
    PolarizationAssignment polarization;
    double lambda_p_nm = 0.0;
    double lambda_s_nm = 0.0;
    double lambda_i_nm = 0.0;
    double length_mm = 10.0;
    double pump_bandwidth_nm = 1.0;

    // Signal/idler fixed, pump from energy conservation.
    static SpdcConfig from_down_converted(CrystalPtr crystal, Geometry geometry,
                                          double lambda_s_nm, double lambda_i_nm,
                                          PolarizationAssignment pol = {});
    static SpdcConfig degenerate(CrystalPtr crystal, Geometry geometry, double lambda_pump_nm,
                                 PolarizationAssignment pol = {});

    double wavelength_nm(Photon p) const;
    // Throws validation errors for broken energy conservation or polarization pattern.
    void validate() const;
};

// Delta k = k_p - k_s - k_i in rad/um at the config's angle.
double phase_mismatch(const SpdcConfig& config);
// Same, for other down-converted wavelengths with the pump from energy conservation.
double phase_mismatch(const SpdcConfig& config, double lambda_s_nm, double lambda_i_nm);

struct AngleScan {
    double step_deg = 0.1;
};

struct AngleSolution {
    double angle_deg = 0.0;           // smallest root
    std::vector<double> roots_deg;    // all roots, ascending
    double residual = 0.0;            // Delta k at angle_deg, rad/um
};

// Throws no_solution with the observed Delta k range when no sign change exists.
AngleSolution solve_angle(const SpdcConfig& config, const AngleScan& scan = {});

// In units of 1/c: GVM1 k'_p - k'_s, GVM2 k'_p - k'_i, GVM3 2k'_p - k'_s - k'_i.
double gvm_residual(const SpdcConfig& config, GvmCondition condition);

struct GvmSolution {
    GvmCondition condition = GvmCondition::gvm1;
    SpdcConfig config;
    std::optional<double> d_eff;   // pm/V; empty when the crystal has neither formula nor table value
    std::string deff_note;
    double dk_residual = 0.0;      // rad/um
    double gvm_residual = 0.0;     // 1/c
    std::vector<double> angle_roots_deg;
    std::vector<double> alternative_pump_nm;  // further intersections, if any
};

// "Not satisfied" is a first-class outcome carrying a diagnostic.
struct GvmOutcome {
    std::optional<GvmSolution> solution;
    std::string diagnostic;

    bool satisfied() const { return solution.has_value(); }
};

struct SolverOptions {
    double scan_step_nm = 1.0;
    AngleScan angle;
    PolarizationAssignment polarization;
    double length_mm = 10.0;
    double pump_bandwidth_nm = 1.0;
};

GvmOutcome solve_gvm_degenerate(CrystalPtr crystal, Plane plane, GvmCondition condition,
                                const SolverOptions& options = {});

GvmOutcome solve_gvm_nondegenerate(CrystalPtr crystal, Plane plane, Photon fixed_photon,
                                   double fixed_lambda_nm,
                                   GvmCondition condition = GvmCondition::gvm1,
                                   const SolverOptions& options = {});

// deff_table scenario key used by the solvers, e.g. "GVM3" or "GVM1@1310".
std::string deff_scenario(GvmCondition condition, std::optional<double> fixed_lambda_nm = {});

}  // namespace spdc
