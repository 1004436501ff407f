#include "spdc/crystal.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

#ifndef SPDC_DEFAULT_DATA_PATH
#define SPDC_DEFAULT_DATA_PATH "data/crystals.yaml"
#endif

namespace spdc {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::size_t expected_min_coefficients(SellmeierForm form) {
    switch (form) {
        case SellmeierForm::standard: return 4;
        case SellmeierForm::two_pole: return 5;
        case SellmeierForm::resonance: return 4;
    }
    return 0;
}

bool coefficient_count_ok(SellmeierForm form, std::size_t n) {
    switch (form) {
        case SellmeierForm::standard: return n >= 4 && n <= 6;
        case SellmeierForm::two_pole: return n == 5;
        case SellmeierForm::resonance: return n >= 4 && n % 2 == 0;
    }
    return false;
}

}  // namespace

std::string_view to_string(SellmeierForm form) {
    switch (form) {
        case SellmeierForm::standard: return "standard";
        case SellmeierForm::two_pole: return "two_pole";
        case SellmeierForm::resonance: return "resonance";
    }
    return "?";
}

std::optional<SellmeierForm> parse_sellmeier_form(std::string_view text) {
    if (text == "standard") return SellmeierForm::standard;
    if (text == "two_pole") return SellmeierForm::two_pole;
    if (text == "resonance") return SellmeierForm::resonance;
    return std::nullopt;
}

std::string_view to_string(AxisClass c) {
    return c == AxisClass::uniaxial ? "uniaxial" : "biaxial";
}

std::string_view to_string(Plane p) {
    switch (p) {
        case Plane::uniaxial: return "uniaxial";
        case Plane::xz: return "xz";
        case Plane::yz: return "yz";
        case Plane::xy: return "xy";
    }
    return "?";
}

std::string_view to_string(PumpWave w) {
    return w == PumpWave::in_plane ? "in_plane" : "out_of_plane";
}

std::optional<Plane> parse_plane(std::string_view text) {
    const auto t = lower(text);
    if (t == "uniaxial") return Plane::uniaxial;
    if (t == "xz") return Plane::xz;
    if (t == "yz") return Plane::yz;
    if (t == "xy") return Plane::xy;
    return std::nullopt;
}

// ---------------------------------------------------------------------------

SellmeierModel::SellmeierModel(SellmeierForm form, std::vector<double> coefficients,
                               Interval valid_range_um, std::string provenance)
    : form_(form),
      coefficients_(std::move(coefficients)),
      valid_range_(valid_range_um),
      provenance_(std::move(provenance)) {
    if (!coefficient_count_ok(form_, coefficients_.size())) {
        std::ostringstream msg;
        msg << "Sellmeier form '" << to_string(form_) << "' expects at least "
            << expected_min_coefficients(form_) << " coefficients in a valid layout, got "
            << coefficients_.size();
        throw Error(ErrorKind::validation, msg.str());
    }
    if (!(valid_range_.lo > 0.0 && valid_range_.hi > valid_range_.lo))
        throw Error(ErrorKind::validation, "Sellmeier valid range must be a positive interval");
}

double SellmeierModel::index_unchecked(double lambda_um) const {
    const auto& c = coefficients_;
    const double l2 = lambda_um * lambda_um;
    double n2 = 0.0;
    switch (form_) {
        case SellmeierForm::standard:
            n2 = c[0] + c[1] / (l2 - c[2]) - c[3] * l2;
            if (c.size() > 4) n2 += c[4] * l2 * l2;
            if (c.size() > 5) n2 += c[5] * l2 * l2 * l2;
            break;
        case SellmeierForm::two_pole:
            n2 = c[0] + c[1] / (l2 - c[2]) + c[3] / (l2 - c[4]);
            break;
        case SellmeierForm::resonance:
            n2 = c[0] - c[1] * l2;
            for (std::size_t k = 2; k + 1 < c.size(); k += 2) n2 += c[k] * l2 / (l2 - c[k + 1]);
            break;
    }
    return n2 > 0.0 ? std::sqrt(n2) : std::nan("");
}

double SellmeierModel::index(double lambda_um) const {
    if (!valid_range_.contains(lambda_um)) {
        std::ostringstream msg;
        msg << "wavelength " << format_number(lambda_um, 6) << " um outside Sellmeier valid range ["
            << format_number(valid_range_.lo, 6) << ", " << format_number(valid_range_.hi, 6)
            << "] um";
        throw Error(ErrorKind::out_of_range, msg.str());
    }
    return index_unchecked(lambda_um);
}

// ---------------------------------------------------------------------------

const SellmeierModel& Crystal::axis(std::string_view label) const {
    auto it = sellmeier.find(std::string(label));
    if (it == sellmeier.end())
        throw Error(ErrorKind::not_found,
                    "crystal " + name + " has no Sellmeier axis '" + std::string(label) + "'");
    return it->second;
}

bool Crystal::supports(Plane plane) const {
    if (axis_class == AxisClass::uniaxial) return plane == Plane::uniaxial;
    return planes.count(plane) > 0;
}

std::vector<Plane> Crystal::supported_planes() const {
    if (axis_class == AxisClass::uniaxial) return {Plane::uniaxial};
    std::vector<Plane> out;
    for (const auto& [p, w] : planes) out.push_back(p);
    return out;
}

PumpWave Crystal::pump_wave(Plane plane) const {
    if (axis_class == AxisClass::uniaxial) return PumpWave::in_plane;
    auto it = planes.find(plane);
    if (it == planes.end())
        throw Error(ErrorKind::unsupported, "crystal " + name + " has no data for plane " +
                                                std::string(to_string(plane)));
    return it->second;
}

Interval Crystal::valid_range_um() const {
    Interval r{0.0, 1e300};
    for (const auto& [label, model] : sellmeier) {
        r.lo = std::max(r.lo, model.valid_range_um().lo);
        r.hi = std::min(r.hi, model.valid_range_um().hi);
    }
    return r;
}

std::optional<double> Crystal::d(std::string_view label) const {
    auto it = d_coefficients.find(std::string(label));
    if (it == d_coefficients.end()) return std::nullopt;
    return it->second;
}

void validate(const Crystal& c) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::validation, "crystal " + c.name + ": " + what);
    };
    if (c.name.empty()) throw Error(ErrorKind::validation, "crystal without a name");

    const std::vector<std::string> labels = c.axis_class == AxisClass::uniaxial
                                                ? std::vector<std::string>{"e", "o"}
                                                : std::vector<std::string>{"x", "y", "z"};
    std::vector<std::string> present;
    for (const auto& [label, m] : c.sellmeier) present.push_back(label);
    if (present != labels)
        fail(std::string(to_string(c.axis_class)) + " crystal must carry exactly the axes " +
             (c.axis_class == AxisClass::uniaxial ? "{o, e}" : "{x, y, z}"));

    if (!(c.transparency_nm.lo > 0.0 && c.transparency_nm.hi > c.transparency_nm.lo))
        fail("transparency window must be a positive interval");

    for (const auto& [label, m] : c.sellmeier) {
        if (m.provenance().empty()) fail("axis " + label + " has no provenance");
        const Interval v{um_to_nm(m.valid_range_um().lo), um_to_nm(m.valid_range_um().hi)};
        if (!c.transparency_nm.contains(v))
            fail("axis " + label + " valid range lies outside the transparency window");
        constexpr int samples = 400;
        for (int k = 0; k <= samples; ++k) {
            const double l = m.valid_range_um().lo + m.valid_range_um().width() * k / samples;
            const double n = m.index_unchecked(l);
            if (!std::isfinite(n) || n <= 1.0)
                fail("axis " + label + " index is not real, finite and > 1 at " +
                     format_number(l, 6) + " um");
        }
    }

    const Interval common = c.valid_range_um();
    if (!(common.hi > common.lo)) fail("axis valid ranges do not overlap");
    constexpr int samples = 400;
    for (int k = 0; k <= samples; ++k) {
        const double l = common.lo + common.width() * k / samples;
        if (c.axis_class == AxisClass::uniaxial) {
            if (!(c.sellmeier.at("e").index_unchecked(l) < c.sellmeier.at("o").index_unchecked(l)))
                fail("n_e < n_o violated at " + format_number(l, 6) + " um");
        } else {
            const double nx = c.sellmeier.at("x").index_unchecked(l);
            const double ny = c.sellmeier.at("y").index_unchecked(l);
            const double nz = c.sellmeier.at("z").index_unchecked(l);
            if (!(nx < ny && ny < nz))
                fail("n_x < n_y < n_z violated at " + format_number(l, 6) + " um");
        }
    }

    if (c.axis_class == AxisClass::uniaxial && !c.planes.empty())
        fail("uniaxial crystals do not list principal planes");
    if (c.axis_class == AxisClass::biaxial) {
        if (c.planes.empty()) fail("biaxial crystal lists no principal plane");
        if (c.planes.count(Plane::uniaxial)) fail("plane 'uniaxial' on a biaxial crystal");
    }
    for (const auto& [key, value] : c.deff_table) {
        const auto slash = key.find('/');
        if (slash == std::string::npos || !parse_plane(key.substr(0, slash)))
            fail("deff_table key '" + key + "' must look like <plane>/<scenario>");
        if (!std::isfinite(value)) fail("deff_table entry '" + key + "' is not finite");
    }
    for (const auto& [key, value] : c.d_coefficients)
        if (!std::isfinite(value)) fail("d coefficient " + key + " is not finite");
}

// ---------------------------------------------------------------------------

CrystalSet::CrystalSet(std::vector<Crystal> crystals) {
    std::sort(crystals.begin(), crystals.end(),
              [](const Crystal& a, const Crystal& b) { return a.name < b.name; });
    for (std::size_t i = 1; i < crystals.size(); ++i)
        if (lower(crystals[i].name) == lower(crystals[i - 1].name))
            throw Error(ErrorKind::validation, "duplicate crystal " + crystals[i].name);
    for (auto& c : crystals) {
        validate(c);
        crystals_.push_back(std::make_shared<const Crystal>(std::move(c)));
    }
}

std::vector<std::string> CrystalSet::names() const {
    std::vector<std::string> out;
    for (const auto& c : crystals_) out.push_back(c->name);
    return out;
}

std::map<std::string, std::string> CrystalSet::provenance() const {
    std::map<std::string, std::string> out;
    for (const auto& c : crystals_) {
        std::vector<std::string> cites;
        for (const auto& [label, m] : c->sellmeier)
            if (std::find(cites.begin(), cites.end(), m.provenance()) == cites.end())
                cites.push_back(m.provenance());
        std::string joined;
        for (const auto& s : cites) joined += (joined.empty() ? "" : "; ") + s;
        out[c->name] = joined;
    }
    return out;
}

CrystalPtr CrystalSet::find(std::string_view name) const {
    const auto key = lower(name);
    for (const auto& c : crystals_)
        if (lower(c->name) == key) return c;
    return nullptr;
}

bool operator==(const CrystalSet& a, const CrystalSet& b) {
    if (a.crystals_.size() != b.crystals_.size()) return false;
    for (std::size_t i = 0; i < a.crystals_.size(); ++i)
        if (!(*a.crystals_[i] == *b.crystals_[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------

namespace {

std::string where(const std::string& crystal, const std::string& field) {
    return (crystal.empty() ? std::string("crystal entry") : "crystal " + crystal) + ", field '" +
           field + "'";
}

double as_number(const YAML::Node& node, const std::string& ctx) {
    if (!node || !node.IsScalar()) throw Error(ErrorKind::parse, ctx + ": expected a number");
    try {
        return parse_number(node.Scalar());
    } catch (const Error&) {
        throw Error(ErrorKind::parse, ctx + ": '" + node.Scalar() + "' is not a number");
    }
}

std::string as_string(const YAML::Node& node, const std::string& ctx) {
    if (!node || !node.IsScalar()) throw Error(ErrorKind::parse, ctx + ": expected a string");
    return node.Scalar();
}

Interval as_interval(const YAML::Node& node, const std::string& ctx) {
    if (!node || !node.IsSequence() || node.size() != 2)
        throw Error(ErrorKind::parse, ctx + ": expected [low, high]");
    return {as_number(node[0], ctx), as_number(node[1], ctx)};
}

Crystal crystal_from_node(const YAML::Node& doc) {
    if (!doc.IsMap()) throw Error(ErrorKind::parse, "crystal document must be a mapping");
    Crystal c;
    c.name = as_string(doc["name"], where("", "name"));
    const auto ctx = [&](const std::string& f) { return where(c.name, f); };

    const auto cls = as_string(doc["axis_class"], ctx("axis_class"));
    if (cls == "uniaxial")
        c.axis_class = AxisClass::uniaxial;
    else if (cls == "biaxial")
        c.axis_class = AxisClass::biaxial;
    else
        throw Error(ErrorKind::parse, ctx("axis_class") + ": unknown value '" + cls + "'");

    if (doc["formula"]) c.formula = as_string(doc["formula"], ctx("formula"));
    c.point_group = as_string(doc["point_group"], ctx("point_group"));
    c.transparency_nm = as_interval(doc["transparency_nm"], ctx("transparency_nm"));
    if (doc["confidence"]) c.confidence = as_string(doc["confidence"], ctx("confidence"));
    if (c.confidence != "verified" && c.confidence != "approximate")
        throw Error(ErrorKind::parse, ctx("confidence") + ": must be verified or approximate");

    const auto d = doc["d_coefficients"];
    if (!d || !d.IsMap()) throw Error(ErrorKind::parse, ctx("d_coefficients") + ": expected a mapping");
    for (const auto& kv : d)
        c.d_coefficients[kv.first.Scalar()] = as_number(kv.second, ctx("d_coefficients"));

    const auto s = doc["sellmeier"];
    if (!s || !s.IsMap()) throw Error(ErrorKind::parse, ctx("sellmeier") + ": expected a mapping");
    for (const auto& kv : s) {
        const auto label = kv.first.Scalar();
        const auto& m = kv.second;
        const auto f = ctx("sellmeier." + label);
        const auto form_text = as_string(m["form"], f + ".form");
        const auto form = parse_sellmeier_form(form_text);
        if (!form)
            throw Error(ErrorKind::validation,
                        "crystal " + c.name + ": unknown Sellmeier form_id '" + form_text + "'");
        const auto coeffs = m["coefficients"];
        if (!coeffs || !coeffs.IsSequence())
            throw Error(ErrorKind::parse, f + ".coefficients: expected a sequence");
        std::vector<double> values;
        for (const auto& v : coeffs) values.push_back(as_number(v, f + ".coefficients"));
        if (!m["provenance"])
            throw Error(ErrorKind::validation,
                        "crystal " + c.name + ": axis " + label + " has no provenance");
        try {
            c.sellmeier.emplace(label, SellmeierModel(*form, std::move(values),
                                                      as_interval(m["valid_range_um"], f + ".valid_range_um"),
                                                      as_string(m["provenance"], f + ".provenance")));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::validation) throw;
            throw Error(ErrorKind::validation, "crystal " + c.name + ": axis " + label + ": " + e.what());
        }
    }

    if (const auto planes = doc["planes"]) {
        if (!planes.IsSequence()) throw Error(ErrorKind::parse, ctx("planes") + ": expected a sequence");
        for (const auto& p : planes) {
            const auto text = as_string(p["plane"], ctx("planes.plane"));
            const auto plane = parse_plane(text);
            if (!plane) throw Error(ErrorKind::parse, ctx("planes") + ": unknown plane '" + text + "'");
            const auto wave = as_string(p["extraordinary"], ctx("planes.extraordinary"));
            if (wave != "in_plane" && wave != "out_of_plane")
                throw Error(ErrorKind::parse, ctx("planes.extraordinary") + ": must be in_plane or out_of_plane");
            c.planes[*plane] = wave == "in_plane" ? PumpWave::in_plane : PumpWave::out_of_plane;
        }
    }

    if (const auto table = doc["deff_table"]) {
        if (!table.IsMap()) throw Error(ErrorKind::parse, ctx("deff_table") + ": expected a mapping");
        for (const auto& kv : table)
            c.deff_table[kv.first.Scalar()] = as_number(kv.second, ctx("deff_table"));
    }
    return c;
}

}  // namespace

CrystalSet parse_crystal_database(const std::string& text) {
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAll(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed crystal data: ") + e.what());
    }
    std::vector<Crystal> crystals;
    for (const auto& doc : docs) {
        if (doc.IsNull()) continue;
        crystals.push_back(crystal_from_node(doc));
    }
    if (crystals.empty()) throw Error(ErrorKind::parse, "crystal data contains no crystal documents");
    return CrystalSet(std::move(crystals));
}

CrystalSet load_crystal_database(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open crystal data file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_crystal_database(buf.str());
}

std::string serialize_crystal_database(const CrystalSet& set) {
    YAML::Emitter out;
    for (const auto& cp : set.crystals()) {
        const Crystal& c = *cp;
        out << YAML::BeginDoc << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << c.name;
        if (!c.formula.empty()) out << YAML::Key << "formula" << YAML::Value << c.formula;
        out << YAML::Key << "axis_class" << YAML::Value << std::string(to_string(c.axis_class));
        out << YAML::Key << "point_group" << YAML::Value << YAML::DoubleQuoted << c.point_group;
        out << YAML::Key << "transparency_nm" << YAML::Value << YAML::Flow << YAML::BeginSeq
            << format_exact(c.transparency_nm.lo) << format_exact(c.transparency_nm.hi) << YAML::EndSeq;
        out << YAML::Key << "confidence" << YAML::Value << c.confidence;
        out << YAML::Key << "d_coefficients" << YAML::Value << YAML::BeginMap;
        for (const auto& [k, v] : c.d_coefficients) out << YAML::Key << k << YAML::Value << format_exact(v);
        out << YAML::EndMap;
        if (!c.planes.empty()) {
            out << YAML::Key << "planes" << YAML::Value << YAML::BeginSeq;
            for (const auto& [p, w] : c.planes)
                out << YAML::Flow << YAML::BeginMap << YAML::Key << "plane" << YAML::Value
                    << std::string(to_string(p)) << YAML::Key << "extraordinary" << YAML::Value
                    << std::string(to_string(w)) << YAML::EndMap;
            out << YAML::EndSeq;
        }
        out << YAML::Key << "sellmeier" << YAML::Value << YAML::BeginMap;
        for (const auto& [label, m] : c.sellmeier) {
            out << YAML::Key << label << YAML::Value << YAML::BeginMap;
            out << YAML::Key << "form" << YAML::Value << std::string(to_string(m.form()));
            out << YAML::Key << "coefficients" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double v : m.coefficients()) out << format_exact(v);
            out << YAML::EndSeq;
            out << YAML::Key << "valid_range_um" << YAML::Value << YAML::Flow << YAML::BeginSeq
                << format_exact(m.valid_range_um().lo) << format_exact(m.valid_range_um().hi) << YAML::EndSeq;
            out << YAML::Key << "provenance" << YAML::Value << YAML::DoubleQuoted << m.provenance();
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
        if (!c.deff_table.empty()) {
            out << YAML::Key << "deff_table" << YAML::Value << YAML::BeginMap;
            for (const auto& [k, v] : c.deff_table) out << YAML::Key << k << YAML::Value << format_exact(v);
            out << YAML::EndMap;
        }
        out << YAML::EndMap;
    }
    return std::string(out.c_str()) + "\n";
}

std::filesystem::path default_crystal_data_path() {
    if (const char* env = std::getenv(kCrystalDataEnv); env && *env) return env;
    return SPDC_DEFAULT_DATA_PATH;
}

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

CrystalPtr get_crystal(const CrystalSet& set, std::string_view name) {
    if (auto c = set.find(name)) return c;
    const auto key = lower(name);
    std::vector<std::pair<std::size_t, std::string>> ranked;
    for (const auto& c : set.crystals()) ranked.emplace_back(edit_distance(key, lower(c->name)), c->name);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string msg = "unknown crystal '" + std::string(name) + "'";
    if (!ranked.empty()) {
        msg += "; nearest matches:";
        for (std::size_t i = 0; i < std::min<std::size_t>(3, ranked.size()); ++i)
            msg += (i ? ", " : " ") + ranked[i].second;
    }
    throw Error(ErrorKind::not_found, msg);
}

}  // namespace spdc
