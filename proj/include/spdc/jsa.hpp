#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc/phasematch.hpp"

namespace spdc {

enum class Execution { serial, parallel };

struct PumpSpec {
    double lambda0_half_nm = 0.0;  // pump centre wavelength
    double delta_lambda_nm = 0.0;  // bandwidth parameter of the Gaussian envelope

    // Full width at half maximum of |alpha|^2 along the pump wavelength.
    double fwhm_lambda_nm() const;
};

double pump_envelope(double lambda_s_nm, double lambda_i_nm, const PumpSpec& pump);

// sinc(Delta k L / 2) at the config's fixed angle; pump from energy conservation.
double phase_matching_amplitude(const SpdcConfig& config, double lambda_s_nm, double lambda_i_nm);

struct JsaMetadata {
    std::string crystal;
    std::string condition;
    std::string plane;
    double angle_deg = 0.0;
    double lambda_p_nm = 0.0;
    double lambda_s_nm = 0.0;
    double lambda_i_nm = 0.0;
    double length_mm = 0.0;
    double delta_lambda_nm = 0.0;
    std::string signal_branch;
    std::string idler_branch;
    std::optional<double> purity;

    static JsaMetadata from(const SpdcConfig& config, std::string condition = {});
};

// Complex amplitude on a (signal, idler) wavelength lattice, row-major by signal.
// Construction normalizes so that sum |f|^2 dA = 1 in the wavelength measure.
class JsaGrid {
public:
    JsaGrid(std::vector<double> signal_nm, std::vector<double> idler_nm,
            std::vector<std::complex<double>> amplitude, JsaMetadata meta = {});

    std::size_t rows() const { return signal_.size(); }
    std::size_t cols() const { return idler_.size(); }
    const std::vector<double>& signal_nm() const { return signal_; }
    const std::vector<double>& idler_nm() const { return idler_; }
    const std::vector<std::complex<double>>& amplitude() const { return amp_; }
    const std::complex<double>& operator()(std::size_t s, std::size_t i) const { return amp_[s * cols() + i]; }

    // Sum |f|^2 dA recomputed from the stored amplitude.
    double norm() const;
    // Normalization constant removed at construction.
    double raw_norm() const { return raw_norm_; }
    void check_normalized(double tolerance = 1e-10) const;

    const JsaMetadata& meta() const { return meta_; }
    JsaMetadata& meta() { return meta_; }

    // Swaps the roles of the two photons.
    JsaGrid transposed() const;

private:
    std::vector<double> signal_;
    std::vector<double> idler_;
    std::vector<std::complex<double>> amp_;
    double raw_norm_ = 0.0;
    JsaMetadata meta_;
};

// Quadrature weights of a strictly increasing axis (midpoint cells).
std::vector<double> cell_widths(const std::vector<double>& axis);

// Amplitude reweighted to the frequency measure, g = f sqrt(d omega_s d omega_i),
// scaled to unit Frobenius norm. Rows index the signal.
Eigen::MatrixXcd frequency_weighted(const JsaGrid& grid);

struct GridSpec {
    std::size_t size = 201;
    std::optional<double> span_s_nm;
    std::optional<double> span_i_nm;
};

inline constexpr double kDefaultDegenerateLengthMm = 10.0;
inline constexpr double kDefaultNondegenerateLengthMm = 20.0;
inline constexpr double kSpanInPumpWidths = 8.0;

// 8 pump FWHM mapped onto each axis, clipped to the crystal's valid range.
std::pair<double, double> default_spans_nm(const SpdcConfig& config);

JsaGrid compute_jsa_grid(const SpdcConfig& config, const GridSpec& spec = {},
                         Execution exec = Execution::parallel);

struct SchmidtResult {
    double purity = 0.0;
    double schmidt_number = 0.0;
    std::vector<double> coefficients;  // leading normalized c_k, descending
};

SchmidtResult schmidt_purity(const JsaGrid& grid, std::size_t leading = 10);

struct BandwidthSearch {
    double lo_nm = 0.01;
    double hi_nm = 20.0;
    int coarse_samples = 41;
    int refine_bits = 24;
};

struct BandwidthOptimum {
    double delta_lambda_nm = 0.0;
    double purity = 0.0;
    bool at_boundary = false;
    std::vector<std::pair<double, double>> samples;  // (delta lambda, purity), evaluation order
};

// Purity at one bandwidth, or nullopt when the grid leaves the valid range.
std::optional<double> purity_at_bandwidth(const SpdcConfig& config, double delta_lambda_nm,
                                          const GridSpec& spec = {});

// Coarse log-spaced scan followed by a golden-section/parabolic refinement in log(delta lambda).
BandwidthOptimum optimize_bandwidth(const SpdcConfig& config, const GridSpec& spec = {},
                                    const BandwidthSearch& search = {});

// Grid for a nondegenerate solution at its optimal bandwidth; purity recorded in meta.
JsaGrid nondegenerate_jsa(const GvmSolution& solution, const GridSpec& spec = {},
                          double length_mm = kDefaultNondegenerateLengthMm,
                          const BandwidthSearch& search = {});

}  // namespace spdc
