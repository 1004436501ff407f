#include "spdc/app.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "spdc/crystal.hpp"
#include "spdc/error.hpp"
#include "spdc/format.hpp"
#include "spdc/interference.hpp"
#include "spdc/io.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"

namespace fs = std::filesystem;

namespace spdc {

namespace {

using Values = std::vector<std::string>;
using Params = std::map<std::string, Values>;

// Keys that name files written by a command; replay redirects them.
const std::vector<std::string> kOutputKeys = {"out", "report"};

struct Session {
    std::ostream& out;
    std::ostream& err;
    fs::path data_path;
    std::string data_checksum;
    CrystalSet set;
    bool write_manifest = true;
};

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::optional<std::string> one(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
}

double number(const Params& p, const std::string& key, double fallback) {
    auto v = one(p, key);
    if (!v) return fallback;
    try {
        return parse_number(*v);
    } catch (const Error&) {
        throw Error(ErrorKind::validation, "--" + key + " expects a number, got '" + *v + "'");
    }
}

bool flag(const Params& p, const std::string& key) {
    auto v = one(p, key);
    return v && (*v == "true" || *v == "1" || *v == "yes");
}

Values list(const Params& p, const std::string& key) {
    auto it = p.find(key);
    return it == p.end() ? Values{} : it->second;
}

// Fills keys absent from the command line with values from a YAML config file.
// Config keys must name an option of the subcommand; flags given on the command line win.
void merge_config(Params& p, const std::set<std::string>& known) {
    auto cfg = one(p, "config");
    if (!cfg) return;
    YAML::Node root;
    try {
        root = YAML::LoadFile(*cfg);
    } catch (const YAML::BadFile&) {
        throw Error(ErrorKind::io, "cannot open config file " + *cfg);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::parse, "malformed config file " + *cfg + ": " + e.what());
    }
    if (!root.IsMap()) throw Error(ErrorKind::parse, "config file must be a mapping");
    for (const auto& kv : root) {
        const auto key = normalize_key(kv.first.Scalar());
        if (key == "command") continue;
        if (!known.count(key) || key == "config")
            throw Error(ErrorKind::validation, "unknown key '" + kv.first.Scalar() + "' in config file " + *cfg);
        if (p.count(key)) continue;
        Values v;
        if (kv.second.IsSequence())
            for (const auto& item : kv.second) v.push_back(item.Scalar());
        else
            v.push_back(kv.second.Scalar());
        p[key] = v;
    }
    p.erase("config");
}

CrystalPtr crystal_arg(const Session& s, const Params& p) {
    auto name = one(p, "crystal");
    if (!name) throw Error(ErrorKind::validation, "--crystal is required");
    return get_crystal(s.set, *name);
}

Plane plane_arg(const Crystal& c, const Params& p) {
    auto text = one(p, "plane");
    if (!text) {
        const auto planes = c.supported_planes();
        return planes.front();
    }
    auto plane = parse_plane(*text);
    if (!plane) throw Error(ErrorKind::validation, "unknown plane '" + *text + "' (uniaxial, xz, yz, xy)");
    if (!c.supports(*plane))
        throw Error(ErrorKind::validation, "crystal " + c.name + " has no data for plane " + *text);
    return *plane;
}

GvmCondition condition_arg(const std::string& text) {
    auto c = parse_condition(text);
    if (!c) throw Error(ErrorKind::validation, "unknown condition '" + text + "' (gvm1, gvm2, gvm3)");
    return *c;
}

PolarizationAssignment polarization_arg(const Params& p) {
    return PolarizationAssignment::type2(!flag(p, "swap-polarization"));
}

std::string branch_short(Branch b) { return b == Branch::ordinary_like ? "o-like" : "e-like"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

void emit(Session& s, const Params& p, const std::string& key, const std::string& text) {
    if (auto path = one(p, key))
        write_text_file(*path, text);
    else if (key == "out")
        s.out << text;
}

void record_manifest(Session& s, const Values& command, const Params& p) {
    if (!s.write_manifest) return;
    std::optional<std::string> target = one(p, "manifest");
    if (!target) {
        auto out = one(p, "out");
        if (!out) return;
        target = *out + ".manifest.yaml";
    }
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "command" << YAML::Value << YAML::Flow << command;
    e << YAML::Key << "parameters" << YAML::Value << YAML::BeginMap;
    for (const auto& [k, v] : p) {
        if (k == "manifest") continue;
        e << YAML::Key << k << YAML::Value << YAML::Flow << v;
    }
    e << YAML::EndMap;
    e << YAML::Key << "outputs" << YAML::Value << YAML::BeginSeq;
    for (const auto& key : kOutputKeys) {
        auto path = one(p, key);
        if (!path) continue;
        e << YAML::BeginMap << YAML::Key << "key" << YAML::Value << key << YAML::Key << "path"
          << YAML::Value << *path << YAML::Key << "sha256" << YAML::Value << sha256_file(*path) << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "engine_version" << YAML::Value << SPDC_VERSION;
    e << YAML::Key << "crystal_data" << YAML::Value << YAML::BeginMap << YAML::Key << "path" << YAML::Value
      << s.data_path.string() << YAML::Key << "sha256" << YAML::Value << s.data_checksum << YAML::EndMap;
    e << YAML::EndMap;
    write_text_file(*target, std::string(e.c_str()) + "\n");
}

// ---------------------------------------------------------------------------

int cmd_crystals_list(Session& s, const Params& p) {
    const auto format = one(p, "format").value_or("markdown");
    if (format != "markdown" && format != "csv")
        throw Error(ErrorKind::validation, "unknown format '" + format + "' (markdown, csv)");
    std::ostringstream o;
    const auto prov = s.set.provenance();
    auto dcoef = [](const Crystal& c) {
        std::string t;
        for (const auto& [k, v] : c.d_coefficients) t += (t.empty() ? "" : " ") + k + "=" + format_number(v, 4);
        return t;
    };
    auto planes = [](const Crystal& c) {
        std::string t;
        for (auto pl : c.supported_planes()) t += (t.empty() ? "" : " ") + std::string(to_string(pl));
        return t;
    };
    if (format == "csv") {
        o << "name,axis_class,point_group,transparency_lo_nm,transparency_hi_nm,d_coefficients,planes,confidence,provenance\n";
        for (const auto& c : s.set.crystals())
            o << c->name << ',' << to_string(c->axis_class) << ',' << c->point_group << ','
              << format_number(c->transparency_nm.lo) << ',' << format_number(c->transparency_nm.hi) << ','
              << csv_field(dcoef(*c)) << ',' << csv_field(planes(*c)) << ',' << c->confidence << ','
              << csv_field(prov.at(c->name)) << '\n';
    } else {
        o << "| Crystal | Class | Point group | Transparency (nm) | d (pm/V) | Planes | Confidence | Dispersion source |\n";
        o << "|---|---|---|---|---|---|---|---|\n";
        for (const auto& c : s.set.crystals())
            o << "| " << c->name << " | " << to_string(c->axis_class) << " | " << c->point_group << " | "
              << format_number(c->transparency_nm.lo) << "-" << format_number(c->transparency_nm.hi) << " | "
              << dcoef(*c) << " | " << planes(*c) << " | " << c->confidence << " | " << prov.at(c->name) << " |\n";
    }
    emit(s, p, "out", o.str());
    record_manifest(s, {"crystals", "list"}, p);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TableTask {
    CrystalPtr crystal;
    Plane plane = Plane::uniaxial;
    GvmCondition condition = GvmCondition::gvm1;
    std::optional<double> fixed_nm;
    Photon fixed_photon = Photon::signal;
};

struct TableRow {
    TableTask task;
    GvmOutcome outcome;
    std::string error;
};

std::string render_table(const std::vector<TableRow>& rows, const std::string& format) {
    std::ostringstream o;
    const bool csv = format == "csv";
    if (csv)
        o << "crystal,plane,condition,fixed_photon,fixed_nm,status,lambda_p_nm,lambda_s_nm,lambda_i_nm,"
             "signal_branch,idler_branch,angle_name,angle_deg,d_eff_pm_per_v,dk_rad_per_um,gvm_residual,note\n";
    else
        o << "| Crystal | Plane | Condition | Fixed photon | Status | λp (nm) | λs (nm) | λi (nm) | Signal | Idler | "
             "Angle (deg) | d_eff (pm/V) | Δk (rad/µm) | GVM residual (1/c) | Note |\n"
             "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        const auto& t = r.task;
        const std::string fixed = t.fixed_nm ? std::string(to_string(t.fixed_photon)) + "@" + format_number(*t.fixed_nm) : "";
        const std::string status = !r.error.empty() ? "ERROR" : r.outcome.satisfied() ? "OK" : "NOT_SATISFIED";
        const std::string plane(to_string(t.plane));
        const std::string cond(to_string(t.condition));
        if (!r.outcome.satisfied()) {
            const std::string note = r.error.empty() ? r.outcome.diagnostic : r.error;
            if (csv)
                o << t.crystal->name << ',' << plane << ',' << cond << ',' << (t.fixed_nm ? std::string(to_string(t.fixed_photon)) : "")
                  << ',' << (t.fixed_nm ? format_number(*t.fixed_nm) : "") << ',' << status << ",,,,,,,,,,," << csv_field(note) << '\n';
            else
                o << "| " << t.crystal->name << " | " << plane << " | " << cond << " | " << (fixed.empty() ? "-" : fixed) << " | "
                  << status << " | - | - | - | - | - | - | - | - | - | " << note << " |\n";
            continue;
        }
        const auto& sol = *r.outcome.solution;
        const auto& c = sol.config;
        const std::string angle_name(free_angle_name(t.plane));
        const std::string note = sol.d_eff ? "d_eff from " + sol.deff_note : sol.deff_note;
        if (csv) {
            o << t.crystal->name << ',' << plane << ',' << cond << ',' << (t.fixed_nm ? std::string(to_string(t.fixed_photon)) : "") << ','
              << (t.fixed_nm ? format_number(*t.fixed_nm) : "") << ',' << status << ',' << format_number(c.lambda_p_nm) << ','
              << format_number(c.lambda_s_nm) << ',' << format_number(c.lambda_i_nm) << ',' << to_string(c.polarization.signal) << ','
              << to_string(c.polarization.idler) << ',' << angle_name << ',' << format_number(c.geometry.free_angle_deg()) << ','
              << (sol.d_eff ? format_number(*sol.d_eff) : "") << ',' << format_number(sol.dk_residual) << ','
              << format_number(sol.gvm_residual) << ',' << csv_field(note) << '\n';
        } else {
            o << "| " << t.crystal->name << " | " << plane << " | " << cond << " | " << (fixed.empty() ? "-" : fixed) << " | "
              << status << " | " << format_fixed(c.lambda_p_nm, 1) << " | " << format_fixed(c.lambda_s_nm, 1) << " | "
              << format_fixed(c.lambda_i_nm, 1) << " | " << branch_short(c.polarization.signal) << " | "
              << branch_short(c.polarization.idler) << " | " << angle_name << "=" << format_fixed(c.geometry.free_angle_deg(), 2)
              << " | " << (sol.d_eff ? format_fixed(*sol.d_eff, 3) : "n/a") << " | " << format_number(sol.dk_residual, 2)
              << " | " << format_number(sol.gvm_residual, 2) << " | " << note << " |\n";
        }
    }
    return o.str();
}

int cmd_tables(Session& s, const Params& p) {
    const auto format = one(p, "format").value_or("markdown");
    if (format != "markdown" && format != "csv")
        throw Error(ErrorKind::validation, "unknown format '" + format + "' (markdown, csv)");

    std::vector<CrystalPtr> crystals;
    for (const auto& name : list(p, "crystal")) crystals.push_back(get_crystal(s.set, name));
    if (crystals.empty()) crystals = s.set.crystals();

    std::optional<Plane> plane_filter;
    if (auto t = one(p, "plane")) {
        plane_filter = parse_plane(*t);
        if (!plane_filter) throw Error(ErrorKind::validation, "unknown plane '" + *t + "' (uniaxial, xz, yz, xy)");
    }

    std::vector<double> fixed;
    for (const auto& v : list(p, "fixed-idler-nm")) fixed.push_back(number({{"x", {v}}}, "x", 0.0));

    std::vector<GvmCondition> conditions;
    for (const auto& v : list(p, "condition")) conditions.push_back(condition_arg(v));
    if (conditions.empty())
        conditions = fixed.empty() ? std::vector<GvmCondition>{GvmCondition::gvm1, GvmCondition::gvm2, GvmCondition::gvm3}
                                   : std::vector<GvmCondition>{GvmCondition::gvm1};

    std::vector<Photon> photons;
    const auto which = one(p, "fixed-photon").value_or("both");
    if (which == "both")
        photons = {Photon::signal, Photon::idler};
    else if (auto ph = parse_photon(which); ph && *ph != Photon::pump)
        photons = {*ph};
    else
        throw Error(ErrorKind::validation, "--fixed-photon must be signal, idler or both");

    SolverOptions options;
    options.polarization = polarization_arg(p);
    options.scan_step_nm = number(p, "step-nm", 1.0);

    std::vector<TableTask> tasks;
    for (const auto& c : crystals)
        for (auto pl : c->supported_planes()) {
            if (plane_filter && *plane_filter != pl) continue;
            for (auto cond : conditions) {
                if (fixed.empty()) {
                    tasks.push_back({c, pl, cond, std::nullopt, Photon::signal});
                } else {
                    for (double f : fixed)
                        for (auto ph : photons) tasks.push_back({c, pl, cond, f, ph});
                }
            }
        }

    std::vector<TableRow> rows(tasks.size());
    const auto count = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < count; ++k) {
        auto& row = rows[k];
        row.task = tasks[k];
        try {
            const auto& t = tasks[k];
            row.outcome = t.fixed_nm ? solve_gvm_nondegenerate(t.crystal, t.plane, t.fixed_photon, *t.fixed_nm, t.condition, options)
                                     : solve_gvm_degenerate(t.crystal, t.plane, t.condition, options);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }

    emit(s, p, "out", render_table(rows, format));
    record_manifest(s, {"tables"}, p);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ResolvedScenario {
    SpdcConfig config;
    std::string condition;
};

ResolvedScenario resolve_scenario(const Session& s, const Params& p) {
    const CrystalPtr crystal = crystal_arg(s, p);
    const Plane plane = plane_arg(*crystal, p);
    SolverOptions options;
    options.polarization = polarization_arg(p);
    options.scan_step_nm = number(p, "step-nm", 1.0);

    if (auto fixed = one(p, "fixed-idler-nm")) {
        const double nm = number(p, "fixed-idler-nm", 0.0);
        const auto cond = condition_arg(one(p, "condition").value_or("gvm1"));
        const auto which = one(p, "fixed-photon").value_or("auto");
        std::vector<Photon> order;
        if (which == "auto")
            order = {Photon::signal, Photon::idler};
        else if (auto ph = parse_photon(which); ph && *ph != Photon::pump)
            order = {*ph};
        else
            throw Error(ErrorKind::validation, "--fixed-photon must be signal, idler or auto");
        std::string diagnostics;
        for (auto ph : order) {
            auto outcome = solve_gvm_nondegenerate(crystal, plane, ph, nm, cond, options);
            if (outcome.satisfied()) {
                auto config = outcome.solution->config;
                config.length_mm = number(p, "length-mm", kDefaultNondegenerateLengthMm);
                return {config, std::string(to_string(cond))};
            }
            diagnostics += (diagnostics.empty() ? "" : "; ") + std::string(to_string(ph)) + " fixed: " + outcome.diagnostic;
        }
        throw Error(ErrorKind::no_solution, diagnostics);
    }

    if (one(p, "pump-nm")) {
        SpdcConfig config = SpdcConfig::degenerate(crystal, Geometry::in_plane(plane, 0.0), number(p, "pump-nm", 0.0),
                                                   options.polarization);
        config.geometry = config.geometry.with_free_angle(solve_angle(config).angle_deg);
        config.length_mm = number(p, "length-mm", kDefaultDegenerateLengthMm);
        return {config, one(p, "condition").value_or("custom")};
    }

    const auto cond = condition_arg(one(p, "condition").value_or("gvm3"));
    auto outcome = solve_gvm_degenerate(crystal, plane, cond, options);
    if (!outcome.satisfied()) throw Error(ErrorKind::no_solution, outcome.diagnostic);
    auto config = outcome.solution->config;
    config.length_mm = number(p, "length-mm", kDefaultDegenerateLengthMm);
    return {config, std::string(to_string(cond))};
}

int cmd_jsa(Session& s, const Params& p) {
    ResolvedScenario sc = resolve_scenario(s, p);
    SpdcConfig& config = sc.config;

    GridSpec grid;
    grid.size = static_cast<std::size_t>(number(p, "grid", 201));
    const Values spans = list(p, "span-nm");
    if (spans.size() > 2) throw Error(ErrorKind::validation, "--span-nm takes one or two values");
    if (!spans.empty()) {
        grid.span_s_nm = number({{"x", {spans.front()}}}, "x", 0.0);
        grid.span_i_nm = number({{"x", {spans.back()}}}, "x", 0.0);
    }

    std::optional<BandwidthOptimum> optimum;
    if (flag(p, "optimize-bandwidth")) {
        BandwidthSearch search;
        search.lo_nm = number(p, "bandwidth-min-nm", search.lo_nm);
        search.hi_nm = number(p, "bandwidth-max-nm", search.hi_nm);
        optimum = optimize_bandwidth(config, grid, search);
        config.pump_bandwidth_nm = optimum->delta_lambda_nm;
    } else {
        config.pump_bandwidth_nm = number(p, "bandwidth-nm", 1.0);
    }

    JsaGrid jsa = compute_jsa_grid(config, grid);
    const SchmidtResult schmidt = schmidt_purity(jsa);
    jsa.meta().condition = sc.condition;
    jsa.meta().purity = schmidt.purity;

    if (auto out = one(p, "out")) {
        std::ostringstream csv;
        write_jsa_csv(csv, jsa);
        write_text_file(*out, csv.str());
    }

    YAML::Emitter r;
    r << YAML::BeginMap;
    r << YAML::Key << "crystal" << YAML::Value << config.crystal->name;
    r << YAML::Key << "plane" << YAML::Value << std::string(to_string(config.geometry.plane()));
    r << YAML::Key << "condition" << YAML::Value << sc.condition;
    r << YAML::Key << "signal_branch" << YAML::Value << std::string(to_string(config.polarization.signal));
    r << YAML::Key << "idler_branch" << YAML::Value << std::string(to_string(config.polarization.idler));
    r << YAML::Key << "lambda_p_nm" << YAML::Value << format_number(config.lambda_p_nm);
    r << YAML::Key << "lambda_s_nm" << YAML::Value << format_number(config.lambda_s_nm);
    r << YAML::Key << "lambda_i_nm" << YAML::Value << format_number(config.lambda_i_nm);
    r << YAML::Key << std::string(free_angle_name(config.geometry.plane())) + "_deg" << YAML::Value
      << format_number(config.geometry.free_angle_deg());
    r << YAML::Key << "length_mm" << YAML::Value << format_number(config.length_mm);
    r << YAML::Key << "delta_lambda_nm" << YAML::Value << format_number(config.pump_bandwidth_nm);
    r << YAML::Key << "pump_fwhm_nm" << YAML::Value
      << format_number(PumpSpec{config.lambda_p_nm, config.pump_bandwidth_nm}.fwhm_lambda_nm());
    if (optimum) {
        r << YAML::Key << "bandwidth_optimized" << YAML::Value << true;
        r << YAML::Key << "optimum_at_search_boundary" << YAML::Value << optimum->at_boundary;
    }
    r << YAML::Key << "grid" << YAML::Value << std::to_string(jsa.rows()) + "x" + std::to_string(jsa.cols());
    r << YAML::Key << "signal_span_nm" << YAML::Value << format_number(jsa.signal_nm().back() - jsa.signal_nm().front());
    r << YAML::Key << "idler_span_nm" << YAML::Value << format_number(jsa.idler_nm().back() - jsa.idler_nm().front());
    r << YAML::Key << "purity" << YAML::Value << format_number(schmidt.purity);
    r << YAML::Key << "schmidt_number" << YAML::Value << format_number(schmidt.schmidt_number);
    r << YAML::Key << "leading_schmidt_coefficients" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double c : schmidt.coefficients) r << format_number(c);
    r << YAML::EndSeq << YAML::EndMap;
    const std::string report = std::string(r.c_str()) + "\n";
    s.out << report;
    if (auto path = one(p, "report")) write_text_file(*path, report);
    if (optimum && optimum->at_boundary)
        s.err << "warning: purity optimum lies at the bandwidth search boundary\n";
    record_manifest(s, {"jsa"}, p);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_hom(Session& s, const Params& p) {
    const auto mode = one(p, "mode").value_or("same-source");
    if (mode != "same-source" && mode != "independent")
        throw Error(ErrorKind::validation, "--mode must be same-source or independent");
    auto input = one(p, "input");
    if (!input) throw Error(ErrorKind::validation, "--input is required");
    const JsaGrid first = read_jsa_csv(fs::path(*input));

    DelaySpec delay;
    delay.samples = static_cast<std::size_t>(number(p, "samples", 201));
    if (one(p, "tau-range-fs")) delay.half_range_fs = number(p, "tau-range-fs", 0.0);

    HomCurve curve;
    if (mode == "same-source") {
        curve = hom_same_source(first, delay);
    } else {
        const auto photon_text = one(p, "photon").value_or("signal");
        const auto photon = parse_heralded_photon(photon_text);
        if (!photon) throw Error(ErrorKind::validation, "--photon must be signal or idler");
        if (auto second_path = one(p, "input2"))
            curve = hom_independent(first, read_jsa_csv(fs::path(*second_path)), delay, *photon);
        else
            curve = hom_independent(first, first, delay, *photon);
    }

    std::ostringstream csv;
    write_hom_csv(csv, curve, mode);
    if (auto out = one(p, "out")) write_text_file(*out, csv.str());

    s.out << "mode: " << mode << '\n';
    s.out << "baseline: " << format_number(curve.baseline) << '\n';
    s.out << "tau_range_fs: " << format_number(curve.tau_fs.back()) << '\n';
    if (curve.metrics) {
        s.out << "visibility: " << format_number(curve.metrics->visibility) << '\n';
        s.out << "fwhm_fs: " << format_number(curve.metrics->fwhm_fs) << '\n';
        s.out << "minimum: " << format_number(curve.metrics->minimum) << '\n';
    }
    record_manifest(s, {"hom"}, p);
    if (!curve.metrics) {
        s.err << "error: " << curve.metrics_note << '\n';
        return kExitNoSolution;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int replay_manifest(const fs::path& manifest, std::ostream& out, std::ostream& err) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(manifest.string());
    } catch (const YAML::BadFile&) {
        throw Error(ErrorKind::io, "cannot open manifest " + manifest.string());
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed manifest: ") + e.what());
    }
    Values command;
    for (const auto& w : root["command"]) command.push_back(w.Scalar());
    if (command.empty()) throw Error(ErrorKind::parse, "manifest has no command");

    const auto data_path = root["crystal_data"]["path"].as<std::string>("");
    const auto data_sum = root["crystal_data"]["sha256"].as<std::string>("");
    if (data_path.empty() || !fs::exists(data_path))
        throw Error(ErrorKind::io, "crystal data file recorded in the manifest is missing: " + data_path);
    if (sha256_file(data_path) != data_sum)
        throw Error(ErrorKind::validation, "crystal data changed since the manifest was written (checksum mismatch)");
    const auto version = root["engine_version"].as<std::string>("");
    if (version != SPDC_VERSION)
        err << "warning: manifest written by engine " << version << ", replaying with " << SPDC_VERSION << '\n';

    Params params;
    for (const auto& kv : root["parameters"]) {
        Values v;
        for (const auto& item : kv.second) v.push_back(item.Scalar());
        params[kv.first.Scalar()] = v;
    }

    const fs::path dir = fs::temp_directory_path() / ("spdc-replay-" + sha256_file(manifest).substr(0, 16));
    fs::create_directories(dir);
    std::vector<std::tuple<std::string, fs::path, std::string>> expected;
    for (const auto& o : root["outputs"]) {
        const auto key = o["key"].as<std::string>();
        const fs::path original = o["path"].as<std::string>();
        const fs::path redirected = dir / (key + "-" + original.filename().string());
        params[key] = {redirected.string()};
        expected.emplace_back(key, redirected, o["sha256"].as<std::string>());
    }

    std::vector<std::string> args = {"--data", data_path, "--no-manifest"};
    args.insert(args.end(), command.begin(), command.end());
    for (const auto& [k, v] : params) {
        if (v.size() == 1 && v[0] == "true" && (k == "optimize-bandwidth" || k == "swap-polarization")) {
            args.push_back("--" + k);
            continue;
        }
        for (const auto& item : v) {
            args.push_back("--" + k);
            args.push_back(item);
        }
    }
    std::ostringstream sink_out, sink_err;
    const int code = run_cli(args, sink_out, sink_err);
    if (code != kExitOk) {
        err << sink_err.str();
        err << "replay: command exited with status " << code << '\n';
        return code;
    }
    bool all = true;
    for (const auto& [key, path, sum] : expected) {
        const bool same = fs::exists(path) && sha256_file(path) == sum;
        all = all && same;
        out << key << ": " << (same ? "identical" : "DIFFERENT") << " (" << path.string() << ")\n";
    }
    out << (all ? "replay: outputs reproduced bit-identically\n" : "replay: outputs differ\n");
    return all ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------

struct Subcommand {
    CLI::App* app = nullptr;
    Params raw;
    std::map<std::string, bool> flags;
};

void add_option(Subcommand& sc, const std::string& name, const std::string& help, bool multi = false) {
    auto* opt = sc.app->add_option("--" + name, sc.raw[name], help);
    if (multi) opt->delimiter(',');
    else opt->expected(1)->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_flag(Subcommand& sc, const std::string& name, const std::string& help) {
    sc.app->add_flag("--" + name, sc.flags[name], help);
}

Params collect(const Subcommand& sc) {
    Params p;
    for (const auto& [k, v] : sc.raw)
        if (!v.empty()) p[k] = v;
    for (const auto& [k, v] : sc.flags)
        if (v) p[k] = {"true"};
    return p;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::io: return kExitIo;
        case ErrorKind::no_solution: return kExitNoSolution;
        default: return kExitValidation;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design engine for spectrally uncorrelated photon pairs from borate crystals"};
    app.name("spdc-design");
    app.require_subcommand(1);
    std::string data_option;
    int threads = 0;
    bool no_manifest = false;
    app.add_option("--data", data_option, std::string("Crystal data file (default: $") + kCrystalDataEnv + " or the shipped file)");
    app.add_option("--threads", threads, "OpenMP worker count (0: runtime default)");
    app.add_flag("--no-manifest", no_manifest, "Do not write a run manifest");

    auto* crystals = app.add_subcommand("crystals", "Crystal database");
    crystals->require_subcommand(1);
    Subcommand list_cmd{crystals->add_subcommand("list", "List crystals with metadata and dispersion sources"), {}, {}};
    add_option(list_cmd, "format", "markdown (default) or csv");
    add_option(list_cmd, "out", "Write to file instead of stdout");
    add_option(list_cmd, "manifest", "Run manifest path");

    Subcommand tables{app.add_subcommand("tables", "Solve degenerate or nondegenerate GVM conditions"), {}, {}};
    add_option(tables, "crystal", "Crystal name(s); default all", true);
    add_option(tables, "plane", "uniaxial, xz, yz or xy");
    add_option(tables, "condition", "gvm1, gvm2, gvm3 (repeatable)", true);
    add_option(tables, "fixed-idler-nm", "Fixed telecom wavelength(s) in nm; switches to nondegenerate rows", true);
    add_option(tables, "fixed-photon", "Photon held at the fixed wavelength: signal, idler or both (default)");
    add_flag(tables, "swap-polarization", "Put the signal on the extraordinary-like branch");
    add_option(tables, "step-nm", "Coarse scan step in nm (default 1)");
    add_option(tables, "format", "markdown (default) or csv");
    add_option(tables, "out", "Write to file instead of stdout");
    add_option(tables, "config", "YAML config file; flags override");
    add_option(tables, "manifest", "Run manifest path");

    Subcommand jsa{app.add_subcommand("jsa", "Joint spectral amplitude and purity"), {}, {}};
    add_option(jsa, "crystal", "Crystal name");
    add_option(jsa, "plane", "uniaxial, xz, yz or xy");
    add_option(jsa, "condition", "gvm1, gvm2 or gvm3 (default gvm3; gvm1 when --fixed-idler-nm is set)");
    add_option(jsa, "pump-nm", "Degenerate pump wavelength in nm; angle solved for phase matching");
    add_option(jsa, "fixed-idler-nm", "Fixed wavelength of one down-converted photon (nondegenerate)");
    add_option(jsa, "fixed-photon", "signal, idler or auto (default)");
    add_flag(jsa, "swap-polarization", "Put the signal on the extraordinary-like branch");
    add_option(jsa, "length-mm", "Crystal length in mm (default 10 degenerate, 20 nondegenerate)");
    add_option(jsa, "bandwidth-nm", "Pump bandwidth parameter in nm (default 1)");
    add_flag(jsa, "optimize-bandwidth", "Choose the bandwidth that maximizes purity");
    add_option(jsa, "bandwidth-min-nm", "Lower end of the bandwidth search (default 0.01)");
    add_option(jsa, "bandwidth-max-nm", "Upper end of the bandwidth search (default 20)");
    add_option(jsa, "grid", "Grid points per axis (default 201)");
    add_option(jsa, "span-nm", "Axis span(s) in nm: one value for both axes or signal,idler", true);
    add_option(jsa, "step-nm", "Coarse scan step in nm (default 1)");
    add_option(jsa, "out", "JSA CSV output file");
    add_option(jsa, "report", "Also write the purity report to this file");
    add_option(jsa, "config", "YAML config file; flags override");
    add_option(jsa, "manifest", "Run manifest path");

    Subcommand hom{app.add_subcommand("hom", "Hong-Ou-Mandel interference from JSA files"), {}, {}};
    add_option(hom, "mode", "same-source (default) or independent");
    add_option(hom, "input", "JSA CSV file");
    add_option(hom, "input2", "Second JSA CSV file (independent mode; default: same as --input)");
    add_option(hom, "photon", "Interfering photon for independent mode: signal (default) or idler");
    add_option(hom, "tau-range-fs", "Half range of the delay axis in fs (default from the coherence time)");
    add_option(hom, "samples", "Number of delay samples (default 201)");
    add_option(hom, "out", "Curve CSV output file");
    add_option(hom, "config", "YAML config file; flags override");
    add_option(hom, "manifest", "Run manifest path");

    auto* manifest = app.add_subcommand("manifest", "Run manifests");
    manifest->require_subcommand(1);
    std::string manifest_file;
    auto* replay = manifest->add_subcommand("replay", "Re-run a manifest and compare outputs byte for byte");
    replay->add_option("file", manifest_file, "Manifest file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        if (replay->parsed()) return replay_manifest(manifest_file, out, err);

        Session s{out, err, data_option.empty() ? default_crystal_data_path() : fs::path(data_option), {}, {}, !no_manifest};
        s.data_checksum = sha256_file(s.data_path);
        s.set = load_crystal_database(s.data_path);

        auto run = [&](Subcommand& sc, int (*fn)(Session&, const Params&)) {
            Params p = collect(sc);
            std::set<std::string> known;
            for (const auto& [k, v] : sc.raw) known.insert(k);
            for (const auto& [k, v] : sc.flags) known.insert(k);
            merge_config(p, known);
            return fn(s, p);
        };
        if (list_cmd.app->parsed()) return run(list_cmd, cmd_crystals_list);
        if (tables.app->parsed()) return run(tables, cmd_tables);
        if (jsa.app->parsed()) return run(jsa, cmd_jsa);
        if (hom.app->parsed()) return run(hom, cmd_hom);
        err << app.help();
        return kExitValidation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const YAML::Exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace spdc
