#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "spdc/jsa.hpp"

namespace spdc {

struct DipMetrics {
    double visibility = 0.0;
    double fwhm_fs = 0.0;
    double minimum = 0.0;
    double tau_at_minimum_fs = 0.0;
};

struct HomCurve {
    std::vector<double> tau_fs;
    std::vector<double> probability;
    double baseline = 0.5;
    std::optional<DipMetrics> metrics;  // absent when the dip cannot be resolved
    std::string metrics_note;
};

struct DelaySpec {
    std::optional<double> half_range_fs;  // default: from the spectral width of the grid
    std::size_t samples = 201;
};

enum class HeraldedPhoton { signal, idler };
std::optional<HeraldedPhoton> parse_heralded_photon(std::string_view text);

// Two-fold coincidence probability for signal and idler of one source. Both axes must
// coincide node by node.
HomCurve hom_same_source(const JsaGrid& grid, const DelaySpec& delay = {},
                         Execution exec = Execution::parallel);

// Four-fold coincidence probability for the chosen photon of two independent sources
// whose interfering axes share one lattice.
HomCurve hom_independent(const JsaGrid& first, const JsaGrid& second, const DelaySpec& delay = {},
                         HeraldedPhoton photon = HeraldedPhoton::signal,
                         Execution exec = Execution::parallel);

// Coherence time in fs from the half-maximum width of a photon's marginal spectrum.
double coherence_time_fs(const JsaGrid& grid, HeraldedPhoton photon);

// Requires the first and last samples within 1% of the baseline.
DipMetrics dip_metrics(const std::vector<double>& tau_fs, const std::vector<double>& probability,
                       double baseline);

}  // namespace spdc
