#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/units.hpp"

namespace spdc {

enum class SellmeierForm { standard, two_pole, resonance };

std::string_view to_string(SellmeierForm form);
std::optional<SellmeierForm> parse_sellmeier_form(std::string_view text);

// Dispersion model n(lambda) for one principal axis; lambda in um.
class SellmeierModel {
public:
    SellmeierModel(SellmeierForm form, std::vector<double> coefficients,
                   Interval valid_range_um, std::string provenance);

    SellmeierForm form() const { return form_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const Interval& valid_range_um() const { return valid_range_; }
    const std::string& provenance() const { return provenance_; }

    // Throws out_of_range outside the valid range.
    double index(double lambda_um) const;
    // No range check; NaN where the formula has no real solution.
    double index_unchecked(double lambda_um) const;

    friend bool operator==(const SellmeierModel&, const SellmeierModel&) = default;

private:
    SellmeierForm form_;
    std::vector<double> coefficients_;
    Interval valid_range_;
    std::string provenance_;
};

enum class AxisClass { uniaxial, biaxial };
enum class Plane { uniaxial, xz, yz, xy };
// Which eigen-wave of a biaxial principal plane carries the pump.
enum class PumpWave { in_plane, out_of_plane };

std::string_view to_string(AxisClass c);
std::string_view to_string(Plane p);
std::string_view to_string(PumpWave w);
std::optional<Plane> parse_plane(std::string_view text);

struct Crystal {
    std::string name;
    std::string formula;
    AxisClass axis_class = AxisClass::uniaxial;
    std::string point_group;
    std::map<std::string, SellmeierModel> sellmeier;
    std::map<std::string, double> d_coefficients;
    Interval transparency_nm;
    std::map<std::string, double> deff_table;
    std::map<Plane, PumpWave> planes;
    std::string confidence = "verified";

    const SellmeierModel& axis(std::string_view label) const;
    bool supports(Plane plane) const;
    std::vector<Plane> supported_planes() const;
    PumpWave pump_wave(Plane plane) const;
    // Intersection of all axis valid ranges, in um.
    Interval valid_range_um() const;
    std::optional<double> d(std::string_view label) const;

    friend bool operator==(const Crystal&, const Crystal&) = default;
};

// Throws validation errors naming the crystal and the violated invariant.
void validate(const Crystal& crystal);

using CrystalPtr = std::shared_ptr<const Crystal>;

class CrystalSet {
public:
    CrystalSet() = default;
    explicit CrystalSet(std::vector<Crystal> crystals);

    std::size_t size() const { return crystals_.size(); }
    const std::vector<CrystalPtr>& crystals() const { return crystals_; }
    std::vector<std::string> names() const;
    // Citation strings of all axis models, keyed by crystal name.
    std::map<std::string, std::string> provenance() const;

    CrystalPtr find(std::string_view name) const;

    friend bool operator==(const CrystalSet& a, const CrystalSet& b);

private:
    std::vector<CrystalPtr> crystals_;  // sorted by name
};

inline const char* kCrystalDataEnv = "SPDC_CRYSTAL_DATA";
inline const std::vector<std::string> kTableOneCrystals = {
    "BBO", "CLBO", "KABO", "KBBF", "RBBF", "CBBF", "BABF",
    "BiBO", "LBO", "CBO", "LRB4", "LCB", "YCOB", "GdCOB"};

CrystalSet parse_crystal_database(const std::string& text);
CrystalSet load_crystal_database(const std::filesystem::path& path);
std::string serialize_crystal_database(const CrystalSet& set);

// Path from the environment override, falling back to the shipped file.
std::filesystem::path default_crystal_data_path();

// Case-insensitive; unknown names raise not_found listing nearest matches.
CrystalPtr get_crystal(const CrystalSet& set, std::string_view name);

}  // namespace spdc
