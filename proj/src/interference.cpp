#include "spdc/interference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

namespace spdc {

namespace {

using cd = std::complex<double>;

Eigen::VectorXd frequencies(const std::vector<double>& axis_nm) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(axis_nm.size()));
    for (std::size_t k = 0; k < axis_nm.size(); ++k) w[static_cast<Eigen::Index>(k)] = angular_frequency(axis_nm[k]);
    return w;
}

bool same_lattice(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a[k] - b[k]) > 1e-9 * std::abs(a[k])) return false;
    return true;
}

// Cross term sum_ab K_ab exp(-i (w_a - w_b) tau) = u^T K conj(u), u_a = exp(-i w_a tau).
double cross_term(const Eigen::MatrixXcd& kernel, const Eigen::VectorXd& w, double tau) {
    const Eigen::Index n = w.size();
    Eigen::VectorXcd u(n);
    for (Eigen::Index a = 0; a < n; ++a) u[a] = std::polar(1.0, -w[a] * tau);
    return (u.transpose() * kernel * u.conjugate()).value().real();
}

double half_max_width(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::Index peak = 0;
    y.maxCoeff(&peak);
    const double half = y[peak] / 2.0;
    auto cross = [&](int dir) {
        Eigen::Index k = peak;
        while (k + dir >= 0 && k + dir < y.size() && y[k + dir] > half) k += dir;
        if (k + dir < 0 || k + dir >= y.size()) return x[k];
        const double t = (y[k] - half) / (y[k] - y[k + dir]);
        return x[k] + t * (x[k + dir] - x[k]);
    };
    return std::abs(cross(+1) - cross(-1));
}

// Widening stops once |P - 1/2| at both edges is below this.
constexpr double kEdgeSettle = 1e-6;

// A discrete frequency lattice makes the curve periodic in tau; stay below half a period.
double revival_limit_fs(const Eigen::VectorXd& w) {
    double step = 0.0;
    for (Eigen::Index k = 1; k < w.size(); ++k) step = std::max(step, std::abs(w[k] - w[k - 1]));
    return 0.45 * 2.0 * kPi / step;
}

HomCurve sample_curve(const std::function<double(double)>& cross, const DelaySpec& delay,
                      double default_half_range, double limit, Execution exec) {
    if (delay.samples < 3) throw Error(ErrorKind::validation, "need at least 3 delay samples");
    double range = delay.half_range_fs.value_or(std::min(default_half_range, limit));
    if (!(range > 0.0)) throw Error(ErrorKind::validation, "delay range must be positive");
    if (!delay.half_range_fs) {
        // Widen until the curve has settled onto its baseline at both ends.
        for (int k = 0; k < 8 && range < limit; ++k) {
            if (0.5 * std::abs(cross(range)) < kEdgeSettle && 0.5 * std::abs(cross(-range)) < kEdgeSettle) break;
            range = std::min(2.0 * range, limit);
        }
    }
    HomCurve curve;
    const std::size_t n = delay.samples;
    curve.tau_fs.resize(n);
    curve.probability.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        curve.tau_fs[k] = -range + 2.0 * range * static_cast<double>(k) / static_cast<double>(n - 1);
    if (exec == Execution::parallel) {
        const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
        for (long k = 0; k < count; ++k)
            curve.probability[k] = 0.5 - 0.5 * cross(curve.tau_fs[k]);
    } else {
        for (std::size_t k = 0; k < n; ++k) curve.probability[k] = 0.5 - 0.5 * cross(curve.tau_fs[k]);
    }
    curve.baseline = 0.5;
    try {
        curve.metrics = dip_metrics(curve.tau_fs, curve.probability, curve.baseline);
    } catch (const Error& e) {
        curve.metrics_note = e.what();
    }
    return curve;
}

}  // namespace

std::optional<HeraldedPhoton> parse_heralded_photon(std::string_view text) {
    if (text == "signal") return HeraldedPhoton::signal;
    if (text == "idler") return HeraldedPhoton::idler;
    return std::nullopt;
}

double coherence_time_fs(const JsaGrid& grid, HeraldedPhoton photon) {
    const Eigen::MatrixXcd g = frequency_weighted(grid);
    const bool sig = photon == HeraldedPhoton::signal;
    const Eigen::VectorXd marginal = sig ? Eigen::VectorXd(g.cwiseAbs2().rowwise().sum())
                                         : Eigen::VectorXd(g.cwiseAbs2().colwise().sum().transpose());
    const Eigen::VectorXd w = frequencies(sig ? grid.signal_nm() : grid.idler_nm());
    // Convert the discrete weights back to a density before taking the width.
    const auto widths = cell_widths(sig ? grid.signal_nm() : grid.idler_nm());
    Eigen::VectorXd density(marginal.size());
    const auto& axis = sig ? grid.signal_nm() : grid.idler_nm();
    for (Eigen::Index k = 0; k < marginal.size(); ++k) {
        const double dw = 2.0 * kPi * kSpeedOfLightNmPerFs * widths[k] / (axis[k] * axis[k]);
        density[k] = marginal[k] / dw;
    }
    const double fwhm = half_max_width(w, density);
    if (!(fwhm > 0.0)) throw Error(ErrorKind::validation, "marginal spectrum has no measurable width");
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    return 1.0 / sigma;
}

HomCurve hom_same_source(const JsaGrid& grid, const DelaySpec& delay, Execution exec) {
    grid.check_normalized();
    if (!same_lattice(grid.signal_nm(), grid.idler_nm()))
        throw Error(ErrorKind::validation,
                    "same-source interference needs identical signal and idler axes (common frequency lattice)");
    const Eigen::MatrixXcd g = frequency_weighted(grid);
    const Eigen::MatrixXcd kernel = g.conjugate().cwiseProduct(g.transpose());
    const Eigen::VectorXd w = frequencies(grid.signal_nm());
    const double tc = std::max(coherence_time_fs(grid, HeraldedPhoton::signal),
                               coherence_time_fs(grid, HeraldedPhoton::idler));
    return sample_curve([&](double tau) { return cross_term(kernel, w, tau); }, delay, 5.0 * tc, revival_limit_fs(w), exec);
}

HomCurve hom_independent(const JsaGrid& first, const JsaGrid& second, const DelaySpec& delay,
                         HeraldedPhoton photon, Execution exec) {
    first.check_normalized();
    second.check_normalized();
    const bool sig = photon == HeraldedPhoton::signal;
    const auto& axis1 = sig ? first.signal_nm() : first.idler_nm();
    const auto& axis2 = sig ? second.signal_nm() : second.idler_nm();
    if (!same_lattice(axis1, axis2))
        throw Error(ErrorKind::validation, "independent-source interference needs the interfering photons on one lattice");
    Eigen::MatrixXcd g1 = frequency_weighted(first);
    Eigen::MatrixXcd g2 = frequency_weighted(second);
    if (!sig) {
        g1.transposeInPlace();
        g2.transposeInPlace();
    }
    // Reduced spectral density matrices of the interfering photons.
    const Eigen::MatrixXcd rho1 = g1 * g1.adjoint();
    const Eigen::MatrixXcd rho2 = g2 * g2.adjoint();
    // sum_ab rho1(b,a) rho2(a,b) exp(-i (w_b - w_a) tau); swap roles to reuse cross_term.
    const Eigen::MatrixXcd kernel = rho1.cwiseProduct(rho2.transpose());
    const Eigen::VectorXd w = frequencies(axis1);
    const double tc = std::max(coherence_time_fs(first, photon), coherence_time_fs(second, photon));
    return sample_curve([&](double tau) { return cross_term(kernel, w, tau); }, delay, 5.0 * tc, revival_limit_fs(w), exec);
}

DipMetrics dip_metrics(const std::vector<double>& tau_fs, const std::vector<double>& probability,
                       double baseline) {
    const std::size_t n = probability.size();
    if (n < 3 || tau_fs.size() != n) throw Error(ErrorKind::validation, "curve needs at least 3 matching samples");
    if (!(baseline > 0.0)) throw Error(ErrorKind::validation, "baseline must be positive");
    if (std::abs(probability.front() - baseline) > 0.01 * baseline ||
        std::abs(probability.back() - baseline) > 0.01 * baseline)
        throw Error(ErrorKind::validation, "curve does not reach its baseline at the range edges; widen the delay range");
    const auto it = std::min_element(probability.begin(), probability.end());
    const auto k = static_cast<std::size_t>(it - probability.begin());
    DipMetrics m;
    m.minimum = *it;
    m.tau_at_minimum_fs = tau_fs[k];
    m.visibility = (baseline - m.minimum) / baseline;
    if (m.visibility <= 1e-12) throw Error(ErrorKind::validation, "flat curve: visibility 0, FWHM undefined");
    if (k == 0 || k + 1 == n) throw Error(ErrorKind::validation, "dip not resolved: minimum at range edge");
    const double level = 0.5 * (baseline + m.minimum);
    auto crossing = [&](int dir) {
        std::size_t j = k;
        while (true) {
            const std::size_t next = dir > 0 ? j + 1 : j - 1;
            if (probability[next] >= level) {
                const double t = (level - probability[j]) / (probability[next] - probability[j]);
                return tau_fs[j] + t * (tau_fs[next] - tau_fs[j]);
            }
            j = next;
            if (j == 0 || j + 1 == n) throw Error(ErrorKind::validation, "dip not resolved: half level not crossed");
        }
    };
    m.fwhm_fs = crossing(+1) - crossing(-1);
    return m;
}

}  // namespace spdc
