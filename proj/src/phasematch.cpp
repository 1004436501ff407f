#include "spdc/phasematch.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

namespace spdc {

std::string_view to_string(Photon p) {
    switch (p) {
        case Photon::pump: return "pump";
        case Photon::signal: return "signal";
        case Photon::idler: return "idler";
    }
    return "?";
}

std::string_view to_string(GvmCondition c) {
    switch (c) {
        case GvmCondition::gvm1: return "GVM1";
        case GvmCondition::gvm2: return "GVM2";
        case GvmCondition::gvm3: return "GVM3";
    }
    return "?";
}

std::optional<GvmCondition> parse_condition(std::string_view text) {
    std::string t(text);
    for (auto& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (t == "gvm1" || t == "1") return GvmCondition::gvm1;
    if (t == "gvm2" || t == "2") return GvmCondition::gvm2;
    if (t == "gvm3" || t == "3") return GvmCondition::gvm3;
    return std::nullopt;
}

std::optional<Photon> parse_photon(std::string_view text) {
    if (text == "signal") return Photon::signal;
    if (text == "idler") return Photon::idler;
    if (text == "pump") return Photon::pump;
    return std::nullopt;
}

PolarizationAssignment PolarizationAssignment::type2(bool signal_ordinary) {
    PolarizationAssignment a;
    a.signal = signal_ordinary ? Branch::ordinary_like : Branch::extraordinary_like;
    a.idler = signal_ordinary ? Branch::extraordinary_like : Branch::ordinary_like;
    return a;
}

Branch PolarizationAssignment::of(Photon p) const {
    switch (p) {
        case Photon::pump: return pump;
        case Photon::signal: return signal;
        case Photon::idler: return idler;
    }
    return pump;
}

bool PolarizationAssignment::is_type2() const {
    return pump == Branch::extraordinary_like && signal != idler;
}

SpdcConfig SpdcConfig::from_down_converted(CrystalPtr crystal, Geometry geometry,
                                           double lambda_s_nm, double lambda_i_nm,
                                           PolarizationAssignment pol) {
    SpdcConfig c;
    c.crystal = std::move(crystal);
    c.geometry = geometry;
    c.polarization = pol;
    c.lambda_s_nm = lambda_s_nm;
    c.lambda_i_nm = lambda_i_nm;
    c.lambda_p_nm = 1.0 / (1.0 / lambda_s_nm + 1.0 / lambda_i_nm);
    return c;
}

SpdcConfig SpdcConfig::degenerate(CrystalPtr crystal, Geometry geometry, double lambda_pump_nm,
                                  PolarizationAssignment pol) {
    SpdcConfig c;
    c.crystal = std::move(crystal);
    c.geometry = geometry;
    c.polarization = pol;
    c.lambda_p_nm = lambda_pump_nm;
    c.lambda_s_nm = 2.0 * lambda_pump_nm;
    c.lambda_i_nm = 2.0 * lambda_pump_nm;
    return c;
}

double SpdcConfig::wavelength_nm(Photon p) const {
    switch (p) {
        case Photon::pump: return lambda_p_nm;
        case Photon::signal: return lambda_s_nm;
        case Photon::idler: return lambda_i_nm;
    }
    return 0.0;
}

void SpdcConfig::validate() const {
    if (!crystal) throw Error(ErrorKind::validation, "configuration has no crystal");
    if (!(lambda_p_nm > 0 && lambda_s_nm > 0 && lambda_i_nm > 0))
        throw Error(ErrorKind::validation, "wavelengths must be positive");
    const double defect = 1.0 / lambda_p_nm - 1.0 / lambda_s_nm - 1.0 / lambda_i_nm;
    if (std::abs(defect) > 1e-12 / lambda_p_nm)
        throw Error(ErrorKind::validation, "energy conservation 1/lp = 1/ls + 1/li violated");
    if (!polarization.is_type2())
        throw Error(ErrorKind::validation,
                    "polarization must be Type-II: extraordinary-like pump, orthogonal signal and idler");
    if (!(length_mm > 0)) throw Error(ErrorKind::validation, "crystal length must be positive");
    if (!(pump_bandwidth_nm > 0)) throw Error(ErrorKind::validation, "pump bandwidth must be positive");
    if (!crystal->supports(geometry.plane()))
        throw Error(ErrorKind::unsupported, "crystal " + crystal->name + " has no data for plane " +
                                                std::string(to_string(geometry.plane())));
}

// ---------------------------------------------------------------------------

namespace {

struct Wavelengths {
    double p = 0.0, s = 0.0, i = 0.0;  // nm
};

// Delta k as a function of the free angle for fixed wavelengths. Principal indices
// are evaluated once.
class MismatchAtWavelengths {
public:
    MismatchAtWavelengths(const Crystal& crystal, Plane plane, const PolarizationAssignment& pol,
                          const Wavelengths& w)
        : w_(w) {
        const bool pump_in_plane = crystal.pump_wave(plane) == PumpWave::in_plane;
        auto setup = [&](Wave& wave, Branch b, double nm) {
            wave.indices = plane_indices(crystal, plane, nm_to_um(nm));
            wave.in_plane = (b == Branch::extraordinary_like) == pump_in_plane;
            wave.lambda_um = nm_to_um(nm);
        };
        setup(p_, pol.pump, w.p);
        setup(s_, pol.signal, w.s);
        setup(i_, pol.idler, w.i);
    }

    double operator()(double angle_rad) const {
        return 2.0 * kPi * (n(p_, angle_rad) / p_.lambda_um - n(s_, angle_rad) / s_.lambda_um -
                            n(i_, angle_rad) / i_.lambda_um);
    }

private:
    struct Wave {
        PlaneIndices indices;
        bool in_plane = false;
        double lambda_um = 0.0;
    };
    static double n(const Wave& w, double a) {
        return w.in_plane ? angle_dependent_index(w.indices, a) : w.indices.fixed;
    }
    Wavelengths w_;
    Wave p_, s_, i_;
};

template <class F>
double refine_root(F f, double lo, double hi, double flo, double fhi) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    std::uintmax_t iterations = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               boost::math::tools::eps_tolerance<double>(50),
                                               iterations);
    const double a = r.first, b = r.second;
    return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

struct AngleRoots {
    std::vector<double> roots_deg;
    double dk_min = std::numeric_limits<double>::infinity();
    double dk_max = -std::numeric_limits<double>::infinity();
};

AngleRoots angle_roots(const MismatchAtWavelengths& dk, double step_deg) {
    AngleRoots out;
    const int n = std::max(2, static_cast<int>(std::lround(90.0 / step_deg)));
    std::vector<double> a(n + 1), v(n + 1);
    for (int k = 0; k <= n; ++k) {
        a[k] = deg_to_rad(90.0 * k / n);
        v[k] = dk(a[k]);
        if (std::isfinite(v[k])) {
            out.dk_min = std::min(out.dk_min, v[k]);
            out.dk_max = std::max(out.dk_max, v[k]);
        }
    }
    for (int k = 0; k < n; ++k) {
        if (!std::isfinite(v[k]) || !std::isfinite(v[k + 1])) continue;
        if (v[k] == 0.0 && k > 0) continue;  // already taken as the right end of the previous cell
        if (v[k] == 0.0 || (v[k] < 0) != (v[k + 1] < 0) || v[k + 1] == 0.0) {
            if (v[k + 1] == 0.0 && v[k] != 0.0 && k + 1 < n) {
                out.roots_deg.push_back(rad_to_deg(a[k + 1]));
                continue;
            }
            const double r = refine_root([&](double x) { return dk(x); }, a[k], a[k + 1], v[k], v[k + 1]);
            out.roots_deg.push_back(rad_to_deg(r));
        }
    }
    std::sort(out.roots_deg.begin(), out.roots_deg.end());
    out.roots_deg.erase(std::unique(out.roots_deg.begin(), out.roots_deg.end()), out.roots_deg.end());
    return out;
}

double gvm_from(double kp, double ks, double ki, GvmCondition c) {
    switch (c) {
        case GvmCondition::gvm1: return kp - ks;
        case GvmCondition::gvm2: return kp - ki;
        case GvmCondition::gvm3: return 2.0 * kp - ks - ki;
    }
    return 0.0;
}

}  // namespace

double phase_mismatch(const SpdcConfig& config) {
    config.validate();
    const Wavelengths w{config.lambda_p_nm, config.lambda_s_nm, config.lambda_i_nm};
    MismatchAtWavelengths dk(*config.crystal, config.geometry.plane(), config.polarization, w);
    return dk(deg_to_rad(config.geometry.free_angle_deg()));
}

double phase_mismatch(const SpdcConfig& config, double lambda_s_nm, double lambda_i_nm) {
    const double lp = 1.0 / (1.0 / lambda_s_nm + 1.0 / lambda_i_nm);
    MismatchAtWavelengths dk(*config.crystal, config.geometry.plane(), config.polarization,
                             {lp, lambda_s_nm, lambda_i_nm});
    return dk(deg_to_rad(config.geometry.free_angle_deg()));
}

AngleSolution solve_angle(const SpdcConfig& config, const AngleScan& scan) {
    config.validate();
    const Wavelengths w{config.lambda_p_nm, config.lambda_s_nm, config.lambda_i_nm};
    MismatchAtWavelengths dk(*config.crystal, config.geometry.plane(), config.polarization, w);
    const AngleRoots roots = angle_roots(dk, scan.step_deg);
    if (roots.roots_deg.empty()) {
        std::ostringstream msg;
        msg << "no phase matching for " << config.crystal->name << " ("
            << to_string(config.geometry.plane()) << ") at " << format_number(w.p, 6) << " -> "
            << format_number(w.s, 6) << " + " << format_number(w.i, 6) << " nm: Delta k stays within ["
            << format_number(roots.dk_min, 6) << ", " << format_number(roots.dk_max, 6)
            << "] rad/um over " << free_angle_name(config.geometry.plane()) << " in [0, 90] deg";
        throw Error(ErrorKind::no_solution, msg.str());
    }
    AngleSolution out;
    out.roots_deg = roots.roots_deg;
    out.angle_deg = roots.roots_deg.front();
    out.residual = dk(deg_to_rad(out.angle_deg));
    return out;
}

double gvm_residual(const SpdcConfig& config, GvmCondition condition) {
    config.validate();
    const Crystal& c = *config.crystal;
    const auto& g = config.geometry;
    const auto& pol = config.polarization;
    const double kp = inverse_group_velocity(c, g, pol.pump, nm_to_um(config.lambda_p_nm));
    const double ks = inverse_group_velocity(c, g, pol.signal, nm_to_um(config.lambda_s_nm));
    const double ki = inverse_group_velocity(c, g, pol.idler, nm_to_um(config.lambda_i_nm));
    return gvm_from(kp, ks, ki, condition);
}

std::string deff_scenario(GvmCondition condition, std::optional<double> fixed_lambda_nm) {
    std::string key(to_string(condition));
    if (fixed_lambda_nm) key += "@" + std::to_string(std::lround(*fixed_lambda_nm));
    return key;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kStencilMargin = 1.0 + 5.0 * kGroupVelocityStep;
constexpr double kAcceptResidual = 1e-6;

struct ScanProblem {
    CrystalPtr crystal;
    Plane plane;
    GvmCondition condition;
    SolverOptions options;
    std::function<Wavelengths(double)> wavelengths;  // scan variable -> (p, s, i) in nm
    double x_lo = 0.0, x_hi = 0.0;                    // scan variable range in nm
    std::string variable;
};

struct Evaluation {
    double residual = std::numeric_limits<double>::quiet_NaN();
    double angle_deg = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> roots_deg;
    double dk = std::numeric_limits<double>::quiet_NaN();
};

Evaluation evaluate(const ScanProblem& prob, double x) {
    Evaluation e;
    const Wavelengths w = prob.wavelengths(x);
    try {
        const MismatchAtWavelengths dk(*prob.crystal, prob.plane, prob.options.polarization, w);
        AngleRoots roots = angle_roots(dk, prob.options.angle.step_deg);
        if (roots.roots_deg.empty()) return e;
        e.angle_deg = roots.roots_deg.front();
        e.roots_deg = std::move(roots.roots_deg);
        e.dk = dk(deg_to_rad(e.angle_deg));
        const Geometry g = Geometry::in_plane(prob.plane, e.angle_deg);
        const auto& pol = prob.options.polarization;
        const Crystal& c = *prob.crystal;
        e.residual = gvm_from(inverse_group_velocity(c, g, pol.pump, nm_to_um(w.p)),
                              inverse_group_velocity(c, g, pol.signal, nm_to_um(w.s)),
                              inverse_group_velocity(c, g, pol.idler, nm_to_um(w.i)), prob.condition);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::out_of_range) throw;
    }
    return e;
}

GvmOutcome run_scan(const ScanProblem& prob, std::optional<double> fixed_lambda_nm) {
    GvmOutcome out;
    const double step = prob.options.scan_step_nm;
    if (!(step > 0)) throw Error(ErrorKind::validation, "scan step must be positive");
    const double lo = std::ceil(prob.x_lo / step) * step;
    std::vector<double> xs;
    for (double x = lo; x <= prob.x_hi; x = lo + step * static_cast<double>(xs.size())) xs.push_back(x);

    std::vector<double> r(xs.size());
    double pm_lo = NAN, pm_hi = NAN;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        r[k] = evaluate(prob, xs[k]).residual;
        if (std::isfinite(r[k])) {
            if (std::isnan(pm_lo)) pm_lo = xs[k];
            pm_hi = xs[k];
        }
    }

    std::vector<double> roots;
    auto f = [&](double x) {
        const double v = evaluate(prob, x).residual;
        if (!std::isfinite(v)) throw Error(ErrorKind::no_solution, "phase matching lost inside bracket");
        return v;
    };
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        if (!std::isfinite(r[k]) || !std::isfinite(r[k + 1])) continue;
        if ((r[k] < 0) == (r[k + 1] < 0) && r[k + 1] != 0.0) continue;
        if (r[k + 1] == 0.0 && k + 2 < xs.size()) continue;  // caught by the next cell
        try {
            const double x = refine_root(f, xs[k], xs[k + 1], r[k], r[k + 1]);
            const Evaluation e = evaluate(prob, x);
            if (std::abs(e.residual) < kAcceptResidual && std::abs(e.dk) < kAcceptResidual)
                roots.push_back(x);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::no_solution && err.kind() != ErrorKind::out_of_range) throw;
        } catch (const boost::math::evaluation_error&) {
        }
    }

    if (roots.empty()) {
        std::ostringstream msg;
        msg << "not satisfied: no intersection of the phase-matching and " << to_string(prob.condition)
            << " curves for " << prob.variable << " in [" << format_number(xs.empty() ? 0 : xs.front(), 6)
            << ", " << format_number(xs.empty() ? 0 : xs.back(), 6) << "] nm";
        if (std::isnan(pm_lo))
            msg << " (no phase matching anywhere in that range)";
        else
            msg << " (phase matching exists for " << prob.variable << " in [" << format_number(pm_lo, 6)
                << ", " << format_number(pm_hi, 6) << "] nm)";
        out.diagnostic = msg.str();
        return out;
    }

    const double x = roots.front();
    const Wavelengths w = prob.wavelengths(x);
    const Evaluation e = evaluate(prob, x);

    GvmSolution sol;
    sol.condition = prob.condition;
    sol.config.crystal = prob.crystal;
    sol.config.geometry = Geometry::in_plane(prob.plane, e.angle_deg);
    sol.config.polarization = prob.options.polarization;
    sol.config.lambda_p_nm = w.p;
    sol.config.lambda_s_nm = w.s;
    sol.config.lambda_i_nm = w.i;
    sol.config.length_mm = prob.options.length_mm;
    sol.config.pump_bandwidth_nm = prob.options.pump_bandwidth_nm;
    sol.angle_roots_deg = e.roots_deg;
    sol.dk_residual = phase_mismatch(sol.config);
    sol.gvm_residual = gvm_residual(sol.config, prob.condition);
    for (std::size_t k = 1; k < roots.size(); ++k) sol.alternative_pump_nm.push_back(prob.wavelengths(roots[k]).p);

    // Walk-off enters d_eff through the down-converted wave on the angle-dependent branch.
    const Crystal& c = *prob.crystal;
    const bool pump_in_plane = c.pump_wave(prob.plane) == PumpWave::in_plane;
    const bool signal_in_plane = (sol.config.polarization.signal == Branch::extraordinary_like) == pump_in_plane;
    const double walk_nm = signal_in_plane ? w.s : w.i;
    try {
        sol.d_eff = effective_nonlinearity(c, sol.config.geometry, nm_to_um(walk_nm),
                                           deff_scenario(prob.condition, fixed_lambda_nm));
        sol.deff_note = has_deff_formula(c, prob.plane) ? "formula" : "table";
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::unsupported) throw;
        sol.deff_note = err.what();
    }
    out.solution = std::move(sol);
    return out;
}

void check_plane_support(const Crystal& c, Plane plane) {
    if ((c.axis_class == AxisClass::uniaxial) != (plane == Plane::uniaxial) || !c.supports(plane))
        throw Error(ErrorKind::unsupported, "crystal " + c.name + " has no data for plane " +
                                                std::string(to_string(plane)));
}

}  // namespace

GvmOutcome solve_gvm_degenerate(CrystalPtr crystal, Plane plane, GvmCondition condition,
                                const SolverOptions& options) {
    if (!crystal) throw Error(ErrorKind::validation, "no crystal given");
    check_plane_support(*crystal, plane);
    if (!options.polarization.is_type2())
        throw Error(ErrorKind::validation, "polarization must be Type-II");
    const Interval v = crystal->valid_range_um();
    ScanProblem prob{crystal, plane, condition, options, {}, 0.0, 0.0, "lambda_s"};
    prob.wavelengths = [](double ls) { return Wavelengths{ls / 2.0, ls, ls}; };
    prob.x_lo = um_to_nm(2.0 * v.lo) * kStencilMargin;
    prob.x_hi = um_to_nm(v.hi) / kStencilMargin;
    return run_scan(prob, std::nullopt);
}

GvmOutcome solve_gvm_nondegenerate(CrystalPtr crystal, Plane plane, Photon fixed_photon,
                                   double fixed_lambda_nm, GvmCondition condition,
                                   const SolverOptions& options) {
    if (!crystal) throw Error(ErrorKind::validation, "no crystal given");
    check_plane_support(*crystal, plane);
    if (fixed_photon == Photon::pump)
        throw Error(ErrorKind::validation, "the fixed photon must be the signal or the idler");
    if (!options.polarization.is_type2())
        throw Error(ErrorKind::validation, "polarization must be Type-II");
    const Interval v = crystal->valid_range_um();
    if (!crystal->transparency_nm.contains(fixed_lambda_nm))
        throw Error(ErrorKind::out_of_range, "fixed wavelength " + format_number(fixed_lambda_nm, 6) +
                                                 " nm lies outside the transparency window of " + crystal->name);
    const double vlo = um_to_nm(v.lo), vhi = um_to_nm(v.hi);
    if (!(fixed_lambda_nm >= vlo * kStencilMargin && fixed_lambda_nm <= vhi / kStencilMargin))
        throw Error(ErrorKind::out_of_range, "fixed wavelength " + format_number(fixed_lambda_nm, 6) +
                                                 " nm lies outside the Sellmeier valid range of " + crystal->name);
    ScanProblem prob{crystal, plane, condition, options, {}, 0.0, 0.0, "lambda_p"};
    const bool signal_fixed = fixed_photon == Photon::signal;
    prob.wavelengths = [fixed_lambda_nm, signal_fixed](double lp) {
        const double partner = 1.0 / (1.0 / lp - 1.0 / fixed_lambda_nm);
        return signal_fixed ? Wavelengths{lp, fixed_lambda_nm, partner}
                            : Wavelengths{lp, partner, fixed_lambda_nm};
    };
    prob.x_lo = vlo * kStencilMargin;
    prob.x_hi = 1.0 / (1.0 / fixed_lambda_nm + kStencilMargin / vhi);
    return run_scan(prob, fixed_lambda_nm);
}

}  // namespace spdc
