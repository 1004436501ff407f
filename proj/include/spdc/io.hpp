#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spdc/interference.hpp"
#include "spdc/jsa.hpp"

namespace spdc {

// Header block of "# key,value" lines, then the two axis rows, then the real
// amplitude table (and an imaginary one when any entry is complex).
void write_jsa_csv(std::ostream& out, const JsaGrid& grid);
JsaGrid read_jsa_csv(std::istream& in);
JsaGrid read_jsa_csv(const std::filesystem::path& path);

void write_hom_csv(std::ostream& out, const HomCurve& curve, const std::string& mode);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace spdc
