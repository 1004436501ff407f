#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>
#include <vector>

#include "spdc/crystal.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"

namespace spdc::test {

inline const CrystalSet& shipped() {
    static const CrystalSet set = load_crystal_database(SPDC_TEST_DATA);
    return set;
}

inline CrystalPtr crystal(const std::string& name) { return get_crystal(shipped(), name); }

// Uniaxial medium with wavelength-independent indices.
inline CrystalPtr constant_medium(double n_o, double n_e) {
    Crystal c;
    c.name = "CONST";
    c.point_group = "3m";
    c.axis_class = AxisClass::uniaxial;
    c.transparency_nm = {150.0, 5000.0};
    c.d_coefficients = {{"d22", 1.0}};
    c.sellmeier.emplace("o", SellmeierModel(SellmeierForm::standard, {n_o * n_o, 0.0, 0.0, 0.0}, {0.2, 4.0}, "test"));
    c.sellmeier.emplace("e", SellmeierModel(SellmeierForm::standard, {n_e * n_e, 0.0, 0.0, 0.0}, {0.2, 4.0}, "test"));
    validate(c);
    return std::make_shared<const Crystal>(std::move(c));
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("spdc-test-" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// Separable amplitude a(s) b(i) on the given axes.
inline JsaGrid separable_grid(const std::vector<double>& s, const std::vector<double>& i,
                              double centre_s, double width_s, double centre_i, double width_i) {
    std::vector<std::complex<double>> amp;
    for (double ls : s)
        for (double li : i)
            amp.emplace_back(std::exp(-std::pow((ls - centre_s) / width_s, 2)) *
                             std::exp(-std::pow((li - centre_i) / width_i, 2)));
    return JsaGrid(s, i, amp);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return v;
}

}  // namespace spdc::test
