#include "spdc/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/format.hpp"

namespace spdc {

namespace {

constexpr const char* kJsaMagic = "# spdc-jsa v1";

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

void write_row(std::ostream& out, const std::string& label, const std::vector<double>& values) {
    out << label;
    for (double v : values) out << ',' << format_number(v);
    out << '\n';
}

}  // namespace

void write_jsa_csv(std::ostream& out, const JsaGrid& grid) {
    const auto& m = grid.meta();
    out << kJsaMagic << '\n';
    out << "# crystal," << m.crystal << '\n';
    out << "# plane," << m.plane << '\n';
    out << "# condition," << m.condition << '\n';
    out << "# angle_deg," << format_number(m.angle_deg) << '\n';
    out << "# lambda_p_nm," << format_number(m.lambda_p_nm) << '\n';
    out << "# lambda_s_nm," << format_number(m.lambda_s_nm) << '\n';
    out << "# lambda_i_nm," << format_number(m.lambda_i_nm) << '\n';
    out << "# signal_branch," << m.signal_branch << '\n';
    out << "# idler_branch," << m.idler_branch << '\n';
    out << "# delta_lambda_nm," << format_number(m.delta_lambda_nm) << '\n';
    out << "# length_mm," << format_number(m.length_mm) << '\n';
    out << "# grid," << grid.rows() << 'x' << grid.cols() << '\n';
    out << "# purity," << (m.purity ? format_number(*m.purity) : std::string()) << '\n';
    write_row(out, "signal_nm", grid.signal_nm());
    write_row(out, "idler_nm", grid.idler_nm());
    bool complex = false;
    for (const auto& v : grid.amplitude()) complex = complex || v.imag() != 0.0;
    out << "real\n";
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) out << (c ? "," : "") << format_number(grid(r, c).real());
        out << '\n';
    }
    if (complex) {
        out << "imag\n";
        for (std::size_t r = 0; r < grid.rows(); ++r) {
            for (std::size_t c = 0; c < grid.cols(); ++c) out << (c ? "," : "") << format_number(grid(r, c).imag());
            out << '\n';
        }
    }
}

JsaGrid read_jsa_csv(std::istream& in) {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::parse, "malformed JSA file: " + what); };
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kJsaMagic) fail("missing '# spdc-jsa v1' header");
    std::map<std::string, std::string> header;
    std::vector<double> s, i;
    auto parse_axis = [&](const std::string& l, const char* label) {
        auto cells = split(l);
        if (cells.empty() || cells[0] != label) fail(std::string("expected ") + label + " row");
        std::vector<double> v;
        for (std::size_t k = 1; k < cells.size(); ++k) v.push_back(parse_number(cells[k]));
        return v;
    };
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.rfind("# ", 0) == 0) {
            const auto comma = line.find(',');
            if (comma == std::string::npos) fail("header line without value: " + line);
            header[line.substr(2, comma - 2)] = line.substr(comma + 1);
            continue;
        }
        s = parse_axis(line, "signal_nm");
        break;
    }
    if (!std::getline(in, line)) fail("missing idler axis");
    i = parse_axis(strip_cr(line), "idler_nm");
    auto read_table = [&](const char* label, std::vector<double>& dst) {
        if (!std::getline(in, line) || strip_cr(line) != label) return false;
        for (std::size_t r = 0; r < s.size(); ++r) {
            if (!std::getline(in, line)) fail("amplitude table truncated");
            auto cells = split(strip_cr(line));
            if (cells.size() != i.size()) fail("amplitude row has the wrong number of columns");
            for (const auto& cell : cells) dst.push_back(parse_number(cell));
        }
        return true;
    };
    std::vector<double> re, im;
    if (!read_table("real", re)) fail("missing 'real' amplitude table");
    read_table("imag", im);
    std::vector<std::complex<double>> amp(re.size());
    for (std::size_t k = 0; k < re.size(); ++k) amp[k] = {re[k], im.empty() ? 0.0 : im[k]};

    JsaMetadata m;
    auto num = [&](const char* key) {
        auto it = header.find(key);
        return it == header.end() || it->second.empty() ? 0.0 : parse_number(it->second);
    };
    m.crystal = header["crystal"];
    m.plane = header["plane"];
    m.condition = header["condition"];
    m.signal_branch = header["signal_branch"];
    m.idler_branch = header["idler_branch"];
    m.angle_deg = num("angle_deg");
    m.lambda_p_nm = num("lambda_p_nm");
    m.lambda_s_nm = num("lambda_s_nm");
    m.lambda_i_nm = num("lambda_i_nm");
    m.delta_lambda_nm = num("delta_lambda_nm");
    m.length_mm = num("length_mm");
    if (!header["purity"].empty()) m.purity = parse_number(header["purity"]);
    try {
        return JsaGrid(std::move(s), std::move(i), std::move(amp), m);
    } catch (const Error& e) {
        fail(e.what());
    }
    throw Error(ErrorKind::parse, "unreachable");
}

JsaGrid read_jsa_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open JSA file " + path.string());
    return read_jsa_csv(in);
}

void write_hom_csv(std::ostream& out, const HomCurve& curve, const std::string& mode) {
    out << "# spdc-hom v1\n";
    out << "# mode," << mode << '\n';
    out << "# baseline," << format_number(curve.baseline) << '\n';
    out << "# visibility," << (curve.metrics ? format_number(curve.metrics->visibility) : "") << '\n';
    out << "# fwhm_fs," << (curve.metrics ? format_number(curve.metrics->fwhm_fs) : "") << '\n';
    if (!curve.metrics) out << "# note," << curve.metrics_note << '\n';
    out << "tau_fs,probability\n";
    for (std::size_t k = 0; k < curve.tau_fs.size(); ++k)
        out << format_number(curve.tau_fs[k]) << ',' << format_number(curve.probability[k]) << '\n';
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::io, "SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[digest[k] >> 4];
        out += hex[digest[k] & 0xf];
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace spdc
