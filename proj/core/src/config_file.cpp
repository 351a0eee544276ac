#include "atomchip/config_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

double to_number(const std::string& origin, int line, const std::string& key,
                 const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail(origin, line, "key '" + key + "': cannot parse number '" + value + "'");
  }
}

std::vector<double> to_numbers(const std::string& origin, int line,
                               const std::string& key,
                               const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_number(origin, line, key, tok));
  return out;
}

} // namespace

ParsedConfig parse_config_text(const std::string& text,
                               const std::string& origin) {
  ParsedConfig out;
  out.species = rb87_f2m2(); // species keys override the shipped defaults
  out.chip.bias_direction = {0.0, 1.0, 0.0};

  double wire_current = 0.0;
  bool saw_chip = false, saw_current = false, saw_bias = false;
  std::vector<std::vector<double>> segments;

  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  bool any_content = false;
  while (std::getline(in, raw)) {
    ++line;
    size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    any_content = true;

    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "chip" && section != "species" && section != "sweep")
        fail(origin, line, "unknown section [" + section + "]");
      if (section == "chip") saw_chip = true;
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      fail(origin, line, "expected 'key = value'");
    if (section.empty())
      fail(origin, line, "key '" + key + "' outside any section");

    if (section == "chip") {
      if (key == "wire_current_A") {
        wire_current = to_number(origin, line, key, value);
        saw_current = true;
      } else if (key == "bias_G") {
        out.chip.bias_magnitude = to_number(origin, line, key, value) * 1e-4;
        saw_bias = true;
      } else if (key == "bias_direction") {
        auto v = to_numbers(origin, line, key, value);
        if (v.size() != 3)
          fail(origin, line, "bias_direction needs 3 components");
        Vec3 dir{v[0], v[1], v[2]};
        double n = norm(dir);
        if (n == 0.0) fail(origin, line, "bias_direction must be non-zero");
        out.chip.bias_direction = dir * (1.0 / n);
      } else if (key == "segment_mm") {
        auto v = to_numbers(origin, line, key, value);
        if (v.size() != 6)
          fail(origin, line, "segment_mm needs 6 numbers: x1 y1 z1 x2 y2 z2");
        segments.push_back(v);
      } else {
        fail(origin, line, "unknown key '" + key + "' in [chip]");
      }
    } else if (section == "species") {
      double v = to_number(origin, line, key, value);
      if (key == "mass_amu") out.species.mass = v * constants::amu;
      else if (key == "g_F") out.species.g_F = v;
      else if (key == "m_F") out.species.m_F = v;
      else if (key == "scattering_length_a0")
        out.species.a_s = v * constants::a_bohr;
      else if (key == "atom_number") out.species.atom_number = v;
      else fail(origin, line, "unknown key '" + key + "' in [species]");
    } else { // sweep
      double v = to_number(origin, line, key, value);
      if (key == "bias_lo_G") out.defaults.bias_lo = v * 1e-4;
      else if (key == "bias_hi_G") out.defaults.bias_hi = v * 1e-4;
      else if (key == "samples") out.defaults.table_samples = (int)v;
      else fail(origin, line, "unknown key '" + key + "' in [sweep]");
    }
  }

  if (!any_content) throw ParseError(origin + ": empty config file");
  if (!saw_chip) throw ValidationError(origin + ": missing [chip] section");
  if (!saw_current)
    throw ValidationError(origin + ": [chip] requires wire_current_A");
  if (!saw_bias) throw ValidationError(origin + ": [chip] requires bias_G");
  if (segments.empty())
    throw ValidationError(origin + ": [chip] requires at least one segment_mm");

  const double mm = 1e-3;
  for (const auto& v : segments)
    out.chip.segments.push_back({{v[0] * mm, v[1] * mm, v[2] * mm},
                                 {v[3] * mm, v[4] * mm, v[5] * mm},
                                 wire_current});
  if (out.defaults.bias_lo >= out.defaults.bias_hi)
    throw ValidationError(origin + ": sweep requires bias_lo_G < bias_hi_G");

  out.chip.validate();
  out.species.validate();
  return out;
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

} // namespace atomchip
