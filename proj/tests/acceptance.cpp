// Acceptance runner: `spdc_acceptance N` checks criterion N (1-7) and prints one line per row
// plus a closing verdict. Exit status is nonzero when any row fails.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <complex>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "spdc/crystal.hpp"
#include "spdc/error.hpp"
#include "spdc/format.hpp"
#include "spdc/interference.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/refraction.hpp"

using namespace spdc;

namespace {

const CrystalSet& data() {
    static const CrystalSet set = load_crystal_database(default_crystal_data_path());
    return set;
}

CrystalPtr crystal(const std::string& name) { return get_crystal(data(), name); }

bool approximate(const std::string& name) { return crystal(name)->confidence != "verified"; }

class Report {
public:
    explicit Report(int criterion) : criterion_(criterion) {}

    void row(bool ok, const std::string& label, const std::string& detail, bool reduced = false) {
        ok ? ++passed_ : ++failed_;
        if (!ok && reduced) ++reduced_failed_;
        std::printf("%s  [%d] %-34s %s%s\n", ok ? "PASS" : "FAIL", criterion_, label.c_str(), detail.c_str(),
                    reduced ? "  [reduced confidence: approximate dispersion data]" : "");
        std::fflush(stdout);
    }

    int finish() const {
        std::printf("criterion %d: %s (%d passed, %d failed", criterion_, failed_ ? "FAIL" : "PASS", passed_, failed_);
        if (reduced_failed_) std::printf(", %d of the failures on reduced-confidence data", reduced_failed_);
        std::printf(")\n");
        return failed_ ? 1 : 0;
    }

private:
    int criterion_;
    int passed_ = 0;
    int failed_ = 0;
    int reduced_failed_ = 0;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GvmCondition condition_at(int k) { return std::array{GvmCondition::gvm1, GvmCondition::gvm2, GvmCondition::gvm3}[k]; }

// One reference degenerate cell; an empty pump means the condition is not satisfied.
struct Cell {
    std::optional<double> pump_nm;
    double angle_deg = 0.0;
    double deff = 0.0;
};

struct TableRow {
    std::string crystal;
    Plane plane;
    std::array<Cell, 3> cells;
};

constexpr double kPumpTolNm = 5.0;
constexpr double kAngleTolDeg = 0.5;
constexpr double kDeffTol = 0.05;
const Cell kNS{};

bool deff_checked(const std::string& name, Plane plane) {
    return (name == "BBO" || name == "LBO" || name == "BiBO") && has_deff_formula(*crystal(name), plane);
}

void check_cell(Report& r, const TableRow& row, int k, const GvmOutcome& out) {
    const Cell& want = row.cells[k];
    const bool reduced = approximate(row.crystal);
    std::string label = row.crystal;
    if (row.plane != Plane::uniaxial) label += "-" + std::string(to_string(row.plane));
    label += " " + std::string(to_string(condition_at(k)));
    if (!want.pump_nm) {
        r.row(!out.satisfied(), label,
              out.satisfied() ? fmt("expected not satisfied, solver found pump %.1f nm", out.solution->config.lambda_p_nm)
                              : "not satisfied, as expected",
              reduced);
        return;
    }
    if (!out.satisfied()) {
        r.row(false, label, fmt("expected pump %.0f nm, solver reports: %s", *want.pump_nm, out.diagnostic.c_str()), reduced);
        return;
    }
    const auto& s = *out.solution;
    const double pump = s.config.lambda_p_nm;
    const double angle = s.config.geometry.free_angle_deg();
    bool ok = std::abs(pump - *want.pump_nm) <= kPumpTolNm && std::abs(angle - want.angle_deg) <= kAngleTolDeg;
    std::string detail = fmt("pump %.1f nm (ref %.0f +-%.0f)  %s %.2f deg (ref %.1f +-%.1f)", pump, *want.pump_nm,
                             kPumpTolNm, std::string(free_angle_name(row.plane)).c_str(), angle, want.angle_deg,
                             kAngleTolDeg);
    if (deff_checked(row.crystal, row.plane)) {
        const double d = s.d_eff.value_or(NAN);
        ok = ok && std::abs(d - want.deff) <= kDeffTol;
        detail += fmt("  d_eff %.3f pm/V (ref %.2f +-%.2f)", d, want.deff, kDeffTol);
    } else if (s.d_eff) {
        detail += fmt("  d_eff %.3f pm/V (ref %.2f, not checked)", *s.d_eff, want.deff);
    }
    r.row(ok, label, detail, reduced);
}

int table_two() {
    Report r(1);
    const std::vector<TableRow> rows = {
        {"BBO", Plane::uniaxial, {{{582, 30.6, 1.46}, {1042, 31.2, 1.32}, {763, 28.3, 1.49}}}},
        {"CLBO", Plane::uniaxial, {{{520, 43.0, 0.68}, {934, 44.2, 0.62}, {681, 39.4, 0.65}}}},
        {"KABO", Plane::uniaxial, {{{521, 40.8, 0.24}, {930, 42.0, 0.23}, {678, 37.6, 0.27}}}},
        {"KBBF", Plane::uniaxial, {{{516, 28.9, 0.34}, {933, 29.4, 0.31}, {682, 26.7, 0.35}}}},
        {"RBBF", Plane::uniaxial, {{{533, 30.4, 0.32}, {974, 31.0, 0.29}, {708, 28.0, 0.32}}}},
        {"CBBF", Plane::uniaxial, {{{529, 35.6, 0.31}, {940, 36.2, 0.28}, {694, 32.8, 0.32}}}},
        {"BABF", Plane::uniaxial, {{{578, 47.6, 0.53}, {1079, 49.5, 0.50}, {766, 43.2, 0.63}}}},
    };
    for (const auto& row : rows) {
        const auto start = std::chrono::steady_clock::now();
        for (int k = 0; k < 3; ++k) check_cell(r, row, k, solve_gvm_degenerate(crystal(row.crystal), row.plane, condition_at(k)));
        const double t = seconds_since(start);
        r.row(t < 10.0, row.crystal + " runtime", fmt("%.2f s for three conditions (limit 10 s)", t));
    }
    return r.finish();
}

int table_three() {
    Report r(2);
    const std::vector<TableRow> rows = {
        {"BiBO", Plane::xz, {{{687, 46.0, 2.50}, {1119, 46.0, 2.30}, {875, 43.8, 2.48}}}},
        {"LBO", Plane::xz, {{kNS, kNS, {647, 4.7, -0.64}}}},
        {"CBO", Plane::xz, {{kNS, kNS, {811, 6.3, -0.21}}}},
        {"LBO", Plane::yz, {{{491, 31.8, -0.58}, {864, 33.9, -0.52}, kNS}}},
        {"LCB", Plane::yz, {{{537, 53.3, 0.36}, {944, 54.4, 0.32}, {706, 47.9, 0.39}}}},
        {"YCOB", Plane::yz, {{kNS, {1244, 17.1, 0.14}, kNS}}},
        {"GdCOB", Plane::yz, {{{668, 48.7, 0.22}, kNS, kNS}}},
        {"CBO", Plane::xy, {{{546, 5.5, -0.23}, {1064, 22.6, -0.73}, kNS}}},
        {"LRB4", Plane::xy, {{{547, 62.4, 0.36}, {818, 60.0, 0.39}, {705, 58.2, 0.40}}}},
        {"YCOB", Plane::xy, {{{638, 55.2, 0.25}, {1205, 60.5, 0.06}, {842, 47.1, 0.46}}}},
        {"GdCOB", Plane::xy, {{{668, 68.8, -0.01}, kNS, {885, 56.5, 0.22}}}},
    };
    for (const auto& row : rows) {
        const auto start = std::chrono::steady_clock::now();
        for (int k = 0; k < 3; ++k) check_cell(r, row, k, solve_gvm_degenerate(crystal(row.crystal), row.plane, condition_at(k)));
        const double t = seconds_since(start);
        r.row(t < 10.0, row.crystal + "-" + std::string(to_string(row.plane)) + " runtime",
              fmt("%.2f s for three conditions (limit 10 s)", t));
    }
    return r.finish();
}

struct NondegenerateRow {
    std::string crystal;
    Plane plane;
    Photon fixed;
    double fixed_nm;
    double pump_nm;
    double partner_nm;
    double angle_deg;
};

const std::vector<NondegenerateRow>& table_four_rows() {
    static const std::vector<NondegenerateRow> rows = {
        {"BBO", Plane::uniaxial, Photon::signal, 1550, 406, 550, 55.2},
        {"BBO", Plane::uniaxial, Photon::signal, 1310, 523, 870, 36.8},
        {"CLBO", Plane::uniaxial, Photon::signal, 1310, 401, 579, 77.9},
        {"KABO", Plane::uniaxial, Photon::signal, 1310, 403, 583, 68.4},
        {"KBBF", Plane::uniaxial, Photon::idler, 1310, 542, 925, 25.7},
        {"RBBF", Plane::uniaxial, Photon::signal, 1310, 417, 611, 45.0},
        {"CBBF", Plane::uniaxial, Photon::signal, 1310, 414, 605, 54.4},
        {"BABF", Plane::uniaxial, Photon::signal, 1310, 509, 833, 62.8},
        {"LBO", Plane::xz, Photon::idler, 1550, 515, 772, 22.0},
        {"LBO", Plane::xz, Photon::idler, 1310, 516, 850, 16.0},
        {"LRB4", Plane::xz, Photon::idler, 1550, 479, 694, 20.5},
        {"LRB4", Plane::xz, Photon::idler, 1310, 472, 738, 7.1},
    };
    return rows;
}

std::string row_label(const NondegenerateRow& row) {
    std::string label = row.crystal;
    if (row.plane != Plane::uniaxial) label += "-" + std::string(to_string(row.plane));
    return label + fmt(" %s %.0f", std::string(to_string(row.fixed)).c_str(), row.fixed_nm);
}

GvmOutcome solve_row(const NondegenerateRow& row) {
    return solve_gvm_nondegenerate(crystal(row.crystal), row.plane, row.fixed, row.fixed_nm);
}

int table_four() {
    Report r(3);
    for (const auto& row : table_four_rows()) {
        const auto out = solve_row(row);
        const bool reduced = approximate(row.crystal);
        if (!out.satisfied()) {
            r.row(false, row_label(row), fmt("expected pump %.0f nm, solver reports: %s", row.pump_nm, out.diagnostic.c_str()), reduced);
            continue;
        }
        const auto& c = out.solution->config;
        const double partner = row.fixed == Photon::signal ? c.lambda_i_nm : c.lambda_s_nm;
        const double energy = std::abs(1.0 / c.lambda_p_nm - 1.0 / c.lambda_s_nm - 1.0 / c.lambda_i_nm) * c.lambda_p_nm;
        const double angle = c.geometry.free_angle_deg();
        const bool ok = std::abs(c.lambda_p_nm - row.pump_nm) <= kPumpTolNm && std::abs(angle - row.angle_deg) <= 1.0 &&
                        energy <= 1e-12;
        r.row(ok, row_label(row),
              fmt("pump %.1f nm (ref %.0f +-5)  partner %.1f nm (ref %.0f)  angle %.2f deg (ref %.1f +-1)  "
                  "energy mismatch %.1e (limit 1e-12)",
                  c.lambda_p_nm, row.pump_nm, partner, row.partner_nm, angle, row.angle_deg, energy),
              reduced);
    }
    return r.finish();
}

SpdcConfig degenerate_config(const std::string& name, Plane plane, GvmCondition cond, double length_mm) {
    const auto out = solve_gvm_degenerate(crystal(name), plane, cond);
    if (!out.satisfied()) throw Error(ErrorKind::no_solution, out.diagnostic);
    auto c = out.solution->config;
    c.length_mm = length_mm;
    return c;
}

// Optimal-bandwidth grid; length scales with the bandwidth at the optimum, so it is fixed per case.
SpdcConfig at_optimal_bandwidth(SpdcConfig c, const GridSpec& spec = {}) {
    c.pump_bandwidth_nm = optimize_bandwidth(c, spec).delta_lambda_nm;
    return c;
}

int purity_benchmarks() {
    Report r(4);
    struct Case {
        GvmCondition cond;
        double length_mm;
        double target;
    };
    for (const auto& [cond, length, target] : {Case{GvmCondition::gvm1, 50.0, 0.97}, Case{GvmCondition::gvm2, 50.0, 0.96},
                                               Case{GvmCondition::gvm3, 10.0, 0.82}}) {
        const auto start = std::chrono::steady_clock::now();
        const auto c = degenerate_config("BBO", Plane::uniaxial, cond, length);
        const auto best = optimize_bandwidth(c);
        const double t = seconds_since(start);
        r.row(std::abs(best.purity - target) <= 0.02 && !best.at_boundary && t < 30.0,
              "BBO " + std::string(to_string(cond)),
              fmt("purity %.4f (ref %.2f +-0.02)  L %.0f mm  bandwidth %.3f nm%s  grid 201x201  %.2f s (limit 30 s)",
                  best.purity, target, length, best.delta_lambda_nm, best.at_boundary ? " (search boundary)" : "", t));
    }
    for (const auto& row : table_four_rows()) {
        const auto start = std::chrono::steady_clock::now();
        const auto out = solve_row(row);
        const bool reduced = approximate(row.crystal);
        if (!out.satisfied()) {
            r.row(false, row_label(row), "no nondegenerate solution to evaluate: " + out.diagnostic, reduced);
            continue;
        }
        const auto g = nondegenerate_jsa(*out.solution);
        const double p = g.meta().purity.value_or(NAN);
        const double t = seconds_since(start);
        r.row(p >= 0.95 && p <= 0.99 && t < 30.0, row_label(row),
              fmt("purity %.4f (range [0.95, 0.99])  L %.0f mm  bandwidth %.3f nm  grid 201x201  %.2f s (limit 30 s)", p,
                  g.meta().length_mm, g.meta().delta_lambda_nm, t),
              reduced);
    }
    return r.finish();
}

int bibo_detuning() {
    Report r(5);
    const auto start = std::chrono::steady_clock::now();
    const auto design = degenerate_config("BiBO", Plane::xz, GvmCondition::gvm3, 10.0);
    auto c = SpdcConfig::degenerate(design.crystal, design.geometry, 775.0);
    c.geometry = c.geometry.with_free_angle(solve_angle(c).angle_deg);
    c.length_mm = design.length_mm;
    const auto best = optimize_bandwidth(c);
    const double t = seconds_since(start);
    r.row(best.purity >= 0.80 && std::abs(best.purity - 0.82) <= 0.03, "BiBO-xz GVM3 at 1550 nm",
          fmt("purity %.4f (at least 0.80, ref 0.82 +-0.03)  design pump %.1f nm  retuned angle %.2f deg  L %.0f mm  "
              "bandwidth %.3f nm  %.2f s",
              best.purity, design.lambda_p_nm, c.geometry.theta_deg(), c.length_mm, best.delta_lambda_nm, t));
    return r.finish();
}

int hom_benchmarks() {
    Report r(6);
    {
        const auto start = std::chrono::steady_clock::now();
        const auto g = compute_jsa_grid(at_optimal_bandwidth(degenerate_config("BBO", Plane::uniaxial, GvmCondition::gvm3, 10.0)));
        const auto curve = hom_same_source(g);
        const double t = seconds_since(start);
        const double v = curve.metrics ? curve.metrics->visibility : NAN;
        r.row(std::abs(v - 1.0) <= 0.001 && t < 60.0, "same source, BBO GVM3",
              fmt("visibility %.5f (ref 1 +-0.001)  FWHM %.1f fs  %zu samples  %.2f s (limit 60 s)", v,
                  curve.metrics ? curve.metrics->fwhm_fs : NAN, curve.tau_fs.size(), t));
    }
    {
        const auto start = std::chrono::steady_clock::now();
        const auto g = compute_jsa_grid(at_optimal_bandwidth(degenerate_config("BBO", Plane::uniaxial, GvmCondition::gvm1, 50.0)));
        const auto curve = hom_independent(g, g);
        const double t = seconds_since(start);
        const double v = curve.metrics ? curve.metrics->visibility : NAN;
        const double p = schmidt_purity(g).purity;
        r.row(std::abs(v - 0.98) <= 0.01 && t < 60.0, "independent sources, BBO GVM1",
              fmt("visibility %.5f (ref 0.98 +-0.01)  FWHM %.1f fs  %zu samples  %.2f s (limit 60 s)", v,
                  curve.metrics ? curve.metrics->fwhm_fs : NAN, curve.tau_fs.size(), t));
        r.row(std::abs(v - p) < 0.01, "visibility vs purity, BBO GVM1", fmt("|V - P| = %.2e (limit 0.01), P %.5f", std::abs(v - p), p));
    }
    return r.finish();
}

// Purity from the eigenvalues of the reduced density matrix g g^dagger, independent of the SVD route.
double gram_purity(const JsaGrid& grid) {
    const Eigen::MatrixXcd g = frequency_weighted(grid);
    const Eigen::MatrixXcd rho = g * g.adjoint();
    const Eigen::VectorXd lambda = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho, Eigen::EigenvaluesOnly).eigenvalues();
    const double total = lambda.sum();
    return lambda.cwiseQuotient(Eigen::VectorXd::Constant(lambda.size(), total)).squaredNorm();
}

int property_suite() {
    Report r(7);
    const auto gvm3 = at_optimal_bandwidth(degenerate_config("BBO", Plane::uniaxial, GvmCondition::gvm3, 10.0));
    const auto gvm1 = at_optimal_bandwidth(degenerate_config("BBO", Plane::uniaxial, GvmCondition::gvm1, 10.0));
    const auto g3 = compute_jsa_grid(gvm3);
    const auto g1 = compute_jsa_grid(gvm1);

    const auto same = hom_same_source(g3);
    const double edge2 = std::max(std::abs(same.probability.front() - 0.5), std::abs(same.probability.back() - 0.5));
    r.row(edge2 <= 1e-6, "P2 at large delay", fmt("max |P2 - 1/2| at +-%.0f fs = %.2e (limit 1e-6)", same.tau_fs.back(), edge2));
    const auto indep = hom_independent(g1, g1);
    const double edge4 = std::max(std::abs(indep.probability.front() - 0.5), std::abs(indep.probability.back() - 0.5));
    r.row(edge4 <= 1e-6, "P4 at large delay", fmt("max |P4 - 1/2| at +-%.0f fs = %.2e (limit 1e-6)", indep.tau_fs.back(), edge4));

    double odd = 0.0;
    const std::size_t n = same.probability.size();
    for (std::size_t k = 0; k < n; ++k) odd = std::max(odd, std::abs(same.probability[k] - same.probability[n - 1 - k]));
    r.row(odd <= 1e-8, "P2 evenness in delay", fmt("max |P2(tau) - P2(-tau)| = %.2e (limit 1e-8)", odd));

    double svd_gap = 0.0;
    for (const auto* g : {&g1, &g3}) svd_gap = std::max(svd_gap, std::abs(schmidt_purity(*g).purity - gram_purity(*g)));
    r.row(svd_gap <= 1e-8, "SVD vs Gram purity", fmt("max difference %.2e over GVM1 and GVM3 grids (limit 1e-8)", svd_gap));

    {
        const std::size_t m = 201;
        std::vector<double> s(m), i(m);
        std::vector<std::complex<double>> amp;
        for (std::size_t k = 0; k < m; ++k) {
            s[k] = 1400.0 + 0.8 * static_cast<double>(k);
            i[k] = 1450.0 + 0.6 * static_cast<double>(k);
        }
        // Chirped product amplitude a(s) b(i).
        for (double ls : s)
            for (double li : i)
                amp.push_back(std::polar(std::exp(-std::pow((ls - 1480.0) / 12.0, 2)), 0.01 * ls) *
                              std::exp(-std::pow((li - 1510.0) / 20.0, 2)));
        const double p = schmidt_purity(JsaGrid(s, i, amp)).purity;
        r.row(std::abs(p - 1.0) <= 1e-14, "rank-1 purity", fmt("|P - 1| = %.2e (limit 1e-14)", std::abs(p - 1.0)));
    }

    {
        GridSpec fine;
        fine.size = 401;
        const double p201 = schmidt_purity(g3).purity;
        const double p401 = schmidt_purity(compute_jsa_grid(gvm3, fine)).purity;
        r.row(std::abs(p201 - p401) < 0.005, "grid halving, purity", fmt("BBO GVM3: 201 %.5f, 401 %.5f (limit 0.005)", p201, p401));
        const double v201 = same.metrics ? same.metrics->visibility : NAN;
        const auto same_fine = hom_same_source(compute_jsa_grid(gvm3, fine));
        const double v401 = same_fine.metrics ? same_fine.metrics->visibility : NAN;
        r.row(std::abs(v201 - v401) < 0.002, "grid halving, same-source V",
              fmt("BBO GVM3: 201 %.5f, 401 %.5f (limit 0.002)", v201, v401));
        const double i201 = indep.metrics ? indep.metrics->visibility : NAN;
        const auto g1_fine = compute_jsa_grid(gvm1, fine);
        const auto indep_fine = hom_independent(g1_fine, g1_fine);
        const double i401 = indep_fine.metrics ? indep_fine.metrics->visibility : NAN;
        r.row(std::abs(i201 - i401) < 0.002, "grid halving, independent V",
              fmt("BBO GVM1: 201 %.5f, 401 %.5f (limit 0.002)", i201, i401));
    }

    int solutions = 0, dk_bad = 0, identity_bad = 0, triples = 0, order_bad = 0;
    double identity_gap = 0.0;
    for (const auto& c : data().crystals())
        for (auto plane : c->supported_planes()) {
            std::array<std::optional<double>, 3> pump;
            for (int k = 0; k < 3; ++k) {
                const auto out = solve_gvm_degenerate(c, plane, condition_at(k));
                if (!out.satisfied()) continue;
                const auto& s = *out.solution;
                ++solutions;
                pump[k] = s.config.lambda_p_nm;
                if (!(phase_mismatch(s.config) == s.dk_residual && std::abs(s.dk_residual) < 1e-6 &&
                      gvm_residual(s.config, s.condition) == s.gvm_residual && std::abs(s.gvm_residual) < 1e-6))
                    ++dk_bad;
                const double r1 = gvm_residual(s.config, GvmCondition::gvm1);
                const double r2 = gvm_residual(s.config, GvmCondition::gvm2);
                const double r3 = gvm_residual(s.config, GvmCondition::gvm3);
                const double gap = std::abs(r3 - r1 - r2);
                identity_gap = std::max(identity_gap, gap);
                if (gap > 1e-12) ++identity_bad;
            }
            if (pump[0] && pump[1] && pump[2]) {
                ++triples;
                if (!(*pump[0] < *pump[2] && *pump[2] < *pump[1])) ++order_bad;
            }
        }
    r.row(dk_bad == 0 && solutions > 0, "residual re-evaluation",
          fmt("%d of %d degenerate solutions reproduce |dk| < 1e-6 and |GVM| < 1e-6 exactly on re-evaluation",
              solutions - dk_bad, solutions));
    r.row(identity_bad == 0 && solutions > 0, "GVM3 = GVM1 + GVM2",
          fmt("max |GVM3 - GVM1 - GVM2| = %.1e over %d solutions (limit 1e-12)", identity_gap, solutions));
    r.row(order_bad == 0 && triples > 0, "GVM1 < GVM3 < GVM2 ordering",
          fmt("%d of %d crystal-plane triples ordered", triples - order_bad, triples));
    return r.finish();
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<int()>> criteria = {table_two,       table_three,    table_four,    purity_benchmarks,
                                                        bibo_detuning,   hom_benchmarks, property_suite};
    const int which = argc > 1 ? std::atoi(argv[1]) : 0;
    if (which < 1 || which > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "usage: %s CRITERION (1-%zu)\n", argv[0], criteria.size());
        return 2;
    }
    try {
        return criteria[which - 1]();
    } catch (const std::exception& e) {
        std::printf("FAIL  [%d] aborted: %s\n", which, e.what());
        return 1;
    }
}
