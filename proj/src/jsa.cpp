#include "spdc/jsa.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

namespace spdc {

double PumpSpec::fwhm_lambda_nm() const {
    // Exact half-maximum width of exp(-x^2/sigma^2) in 1/lambda, written with lambda0 = 2 x centre.
    const double l0 = 2.0 * lambda0_half_nm;
    const double d = delta_lambda_nm;
    const double l02 = l0 * l0, d2 = d * d;
    return 2.0 * std::sqrt(std::log(2.0)) * l02 * d * (l02 - d2) /
           (l02 * l02 + d2 * d2 - 2.0 * l02 * d2 * (1.0 + std::log(4.0)));
}

double pump_envelope(double lambda_s_nm, double lambda_i_nm, const PumpSpec& pump) {
    const double c = pump.lambda0_half_nm;
    const double half = pump.delta_lambda_nm / 2.0;
    const double width = pump.delta_lambda_nm / (c * c - half * half);
    const double x = (1.0 / lambda_s_nm + 1.0 / lambda_i_nm - 1.0 / c) / width;
    return std::exp(-0.5 * x * x);
}

namespace {

double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace

double phase_matching_amplitude(const SpdcConfig& config, double lambda_s_nm, double lambda_i_nm) {
    const double dk = phase_mismatch(config, lambda_s_nm, lambda_i_nm);  // rad/um
    const double length_um = config.length_mm * 1e3;
    return sinc(dk * length_um / 2.0);
}

JsaMetadata JsaMetadata::from(const SpdcConfig& config, std::string condition) {
    JsaMetadata m;
    m.crystal = config.crystal ? config.crystal->name : "";
    m.condition = std::move(condition);
    m.plane = std::string(to_string(config.geometry.plane()));
    m.angle_deg = config.geometry.free_angle_deg();
    m.lambda_p_nm = config.lambda_p_nm;
    m.lambda_s_nm = config.lambda_s_nm;
    m.lambda_i_nm = config.lambda_i_nm;
    m.length_mm = config.length_mm;
    m.delta_lambda_nm = config.pump_bandwidth_nm;
    m.signal_branch = std::string(to_string(config.polarization.signal));
    m.idler_branch = std::string(to_string(config.polarization.idler));
    return m;
}

// ---------------------------------------------------------------------------

std::vector<double> cell_widths(const std::vector<double>& axis) {
    const std::size_t n = axis.size();
    std::vector<double> w(n);
    if (n < 2) throw Error(ErrorKind::validation, "axis needs at least two nodes");
    w[0] = axis[1] - axis[0];
    w[n - 1] = axis[n - 1] - axis[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) w[k] = 0.5 * (axis[k + 1] - axis[k - 1]);
    return w;
}

namespace {

double sum_norm(const std::vector<double>& s, const std::vector<double>& i,
                const std::vector<std::complex<double>>& a) {
    const auto ws = cell_widths(s);
    const auto wi = cell_widths(i);
    double total = 0.0;
    for (std::size_t r = 0; r < s.size(); ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < i.size(); ++c) row += std::norm(a[r * i.size() + c]) * wi[c];
        total += row * ws[r];
    }
    return total;
}

void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2) throw Error(ErrorKind::validation, std::string(name) + " axis needs at least two nodes");
    for (std::size_t k = 0; k < axis.size(); ++k) {
        if (!std::isfinite(axis[k]) || axis[k] <= 0.0)
            throw Error(ErrorKind::validation, std::string(name) + " axis must hold positive wavelengths");
        if (k && !(axis[k] > axis[k - 1]))
            throw Error(ErrorKind::validation, std::string(name) + " axis must be strictly increasing");
    }
}

}  // namespace

JsaGrid::JsaGrid(std::vector<double> signal_nm, std::vector<double> idler_nm,
                 std::vector<std::complex<double>> amplitude, JsaMetadata meta)
    : signal_(std::move(signal_nm)), idler_(std::move(idler_nm)), amp_(std::move(amplitude)), meta_(std::move(meta)) {
    check_axis(signal_, "signal");
    check_axis(idler_, "idler");
    if (amp_.size() != signal_.size() * idler_.size())
        throw Error(ErrorKind::validation, "amplitude size does not match the axes");
    for (const auto& v : amp_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorKind::validation, "amplitude contains non-finite values");
    raw_norm_ = sum_norm(signal_, idler_, amp_);
    if (!(raw_norm_ > 0.0)) throw Error(ErrorKind::validation, "degenerate all-zero amplitude");
    const double scale = 1.0 / std::sqrt(raw_norm_);
    for (auto& v : amp_) v *= scale;
}

double JsaGrid::norm() const { return sum_norm(signal_, idler_, amp_); }

void JsaGrid::check_normalized(double tolerance) const {
    const double n = norm();
    if (std::abs(n - 1.0) > tolerance)
        throw Error(ErrorKind::validation, "grid is not normalized (sum |f|^2 dA = " + format_number(n, 12) + ")");
}

JsaGrid JsaGrid::transposed() const {
    std::vector<std::complex<double>> t(amp_.size());
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t c = 0; c < cols(); ++c) t[c * rows() + r] = amp_[r * cols() + c];
    JsaMetadata m = meta_;
    std::swap(m.lambda_s_nm, m.lambda_i_nm);
    std::swap(m.signal_branch, m.idler_branch);
    return JsaGrid(idler_, signal_, std::move(t), m);
}

Eigen::MatrixXcd frequency_weighted(const JsaGrid& grid) {
    const auto ws = cell_widths(grid.signal_nm());
    const auto wi = cell_widths(grid.idler_nm());
    Eigen::VectorXd ds(grid.rows()), di(grid.cols());
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        const double l = grid.signal_nm()[r];
        ds[r] = std::sqrt(2.0 * kPi * kSpeedOfLightNmPerFs * ws[r] / (l * l));
    }
    for (std::size_t c = 0; c < grid.cols(); ++c) {
        const double l = grid.idler_nm()[c];
        di[c] = std::sqrt(2.0 * kPi * kSpeedOfLightNmPerFs * wi[c] / (l * l));
    }
    Eigen::MatrixXcd g(grid.rows(), grid.cols());
    for (std::size_t r = 0; r < grid.rows(); ++r)
        for (std::size_t c = 0; c < grid.cols(); ++c) g(r, c) = grid(r, c) * ds[r] * di[c];
    const double n = g.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::validation, "degenerate all-zero amplitude");
    return g / n;
}

// ---------------------------------------------------------------------------

std::pair<double, double> default_spans_nm(const SpdcConfig& config) {
    const PumpSpec pump{config.lambda_p_nm, config.pump_bandwidth_nm};
    const double fwhm = pump.fwhm_lambda_nm();
    auto span_for = [&](double centre) {
        const double ratio = centre / config.lambda_p_nm;
        double span = kSpanInPumpWidths * fwhm * ratio * ratio;
        const Interval v = config.crystal->valid_range_um();
        const double lo = um_to_nm(v.lo), hi = um_to_nm(v.hi);
        const double half = std::min({span / 2.0, centre - lo, hi - centre});
        return 2.0 * std::max(half, 0.0);
    };
    return {span_for(config.lambda_s_nm), span_for(config.lambda_i_nm)};
}

namespace {

std::vector<double> make_axis(double centre, double span, std::size_t n) {
    std::vector<double> a(n);
    const double start = centre - span / 2.0;
    for (std::size_t k = 0; k < n; ++k) a[k] = start + span * static_cast<double>(k) / static_cast<double>(n - 1);
    return a;
}

void check_inside(const SpdcConfig& config, const std::vector<double>& s, const std::vector<double>& i) {
    const Interval v = config.crystal->valid_range_um();
    const Interval valid{um_to_nm(v.lo), um_to_nm(v.hi)};
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::out_of_range,
                    "grid extends outside Sellmeier validity of " + config.crystal->name + ": " + what);
    };
    if (!valid.contains(s.front()) || !valid.contains(s.back())) fail("signal axis");
    if (!valid.contains(i.front()) || !valid.contains(i.back())) fail("idler axis");
    const double p_lo = 1.0 / (1.0 / s.front() + 1.0 / i.front());
    const double p_hi = 1.0 / (1.0 / s.back() + 1.0 / i.back());
    if (!valid.contains(p_lo) || !valid.contains(p_hi)) fail("pump wavelengths");
    if (!config.crystal->transparency_nm.contains(Interval{s.front(), s.back()}) ||
        !config.crystal->transparency_nm.contains(Interval{i.front(), i.back()}))
        fail("transparency window");
}

}  // namespace

JsaGrid compute_jsa_grid(const SpdcConfig& config, const GridSpec& spec, Execution exec) {
    config.validate();
    if (spec.size < 64) throw Error(ErrorKind::validation, "grid size must be at least 64");
    auto [span_s, span_i] = default_spans_nm(config);
    if (spec.span_s_nm) span_s = *spec.span_s_nm;
    if (spec.span_i_nm) span_i = *spec.span_i_nm;
    if (!(span_s > 0.0 && span_i > 0.0)) throw Error(ErrorKind::validation, "grid span must be positive");

    const std::size_t n = spec.size;
    auto s = make_axis(config.lambda_s_nm, span_s, n);
    auto i = make_axis(config.lambda_i_nm, span_i, n);
    check_inside(config, s, i);

    const PumpSpec pump{config.lambda_p_nm, config.pump_bandwidth_nm};
    std::vector<std::complex<double>> amp(n * n);
    std::atomic<bool> failed{false};
    auto row = [&](std::size_t r) {
        try {
            for (std::size_t c = 0; c < n; ++c)
                amp[r * n + c] = pump_envelope(s[r], i[c], pump) * phase_matching_amplitude(config, s[r], i[c]);
        } catch (...) {
            failed = true;
        }
    };
    if (exec == Execution::parallel) {
        const auto rows = static_cast<long>(n);
#pragma omp parallel for schedule(static)
        for (long r = 0; r < rows; ++r) row(static_cast<std::size_t>(r));
    } else {
        for (std::size_t r = 0; r < n; ++r) row(r);
    }
    if (failed) throw Error(ErrorKind::out_of_range, "grid evaluation left the Sellmeier valid range");

    return JsaGrid(std::move(s), std::move(i), std::move(amp), JsaMetadata::from(config));
}

SchmidtResult schmidt_purity(const JsaGrid& grid, std::size_t leading) {
    grid.check_normalized();
    const Eigen::MatrixXcd g = frequency_weighted(grid);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(g);
    const Eigen::VectorXd s = svd.singularValues();
    const double total = s.squaredNorm();
    if (!(total > 0.0)) throw Error(ErrorKind::validation, "degenerate all-zero amplitude");
    SchmidtResult out;
    double p = 0.0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double c2 = s[k] * s[k] / total;
        p += c2 * c2;
    }
    out.purity = p;
    out.schmidt_number = 1.0 / p;
    for (Eigen::Index k = 0; k < s.size() && static_cast<std::size_t>(k) < leading; ++k)
        out.coefficients.push_back(s[k] / std::sqrt(total));
    return out;
}

// ---------------------------------------------------------------------------

std::optional<double> purity_at_bandwidth(const SpdcConfig& config, double delta_lambda_nm,
                                          const GridSpec& spec) {
    SpdcConfig c = config;
    c.pump_bandwidth_nm = delta_lambda_nm;
    try {
        const double p = schmidt_purity(compute_jsa_grid(c, spec)).purity;
        if (!std::isfinite(p)) return std::nullopt;
        return p;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::out_of_range || e.kind() == ErrorKind::validation) return std::nullopt;
        throw;
    }
}

BandwidthOptimum optimize_bandwidth(const SpdcConfig& config, const GridSpec& spec,
                                    const BandwidthSearch& search) {
    if (!(search.lo_nm > 0.0 && search.hi_nm > search.lo_nm && search.coarse_samples >= 3))
        throw Error(ErrorKind::validation, "bandwidth search needs 0 < lo < hi and at least 3 samples");
    BandwidthOptimum out;
    const double a = std::log(search.lo_nm), b = std::log(search.hi_nm);
    std::vector<double> xs, ps;
    for (int k = 0; k < search.coarse_samples; ++k) {
        const double x = a + (b - a) * k / (search.coarse_samples - 1);
        const auto p = purity_at_bandwidth(config, std::exp(x), spec);
        xs.push_back(x);
        ps.push_back(p ? *p : -1.0);
        if (p) out.samples.emplace_back(std::exp(x), *p);
    }
    const auto best = static_cast<std::size_t>(std::max_element(ps.begin(), ps.end()) - ps.begin());
    if (ps[best] < 0.0)
        throw Error(ErrorKind::out_of_range, "no bandwidth in the search interval yields a valid grid");
    const bool edge = best == 0 || best + 1 == xs.size() || ps[best - 1] < 0.0 || ps[best + 1] < 0.0;
    if (edge) {
        out.delta_lambda_nm = std::exp(xs[best]);
        out.purity = ps[best];
        out.at_boundary = true;
        return out;
    }
    auto negative = [&](double x) {
        const auto p = purity_at_bandwidth(config, std::exp(x), spec);
        if (p) out.samples.emplace_back(std::exp(x), *p);
        return p ? -*p : 1.0;
    };
    std::uintmax_t iterations = 100;
    const auto [x, f] = boost::math::tools::brent_find_minima(negative, xs[best - 1], xs[best + 1],
                                                             search.refine_bits, iterations);
    if (-f >= ps[best]) {
        out.delta_lambda_nm = std::exp(x);
        out.purity = -f;
    } else {
        out.delta_lambda_nm = std::exp(xs[best]);
        out.purity = ps[best];
    }
    return out;
}

JsaGrid nondegenerate_jsa(const GvmSolution& solution, const GridSpec& spec, double length_mm,
                          const BandwidthSearch& search) {
    SpdcConfig config = solution.config;
    config.length_mm = length_mm;
    const BandwidthOptimum opt = optimize_bandwidth(config, spec, search);
    config.pump_bandwidth_nm = opt.delta_lambda_nm;
    JsaGrid grid = compute_jsa_grid(config, spec);
    grid.meta().condition = std::string(to_string(solution.condition));
    grid.meta().purity = schmidt_purity(grid).purity;
    return grid;
}

}  // namespace spdc
