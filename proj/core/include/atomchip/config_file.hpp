#pragma once

#include <string>

#include "atomchip/chip_model.hpp"

namespace atomchip {

// Sweep / table defaults carried alongside the physical objects.
struct ConfigDefaults {
  double bias_lo = 4.3e-4;  // T
  double bias_hi = 22.0e-4; // T
  int table_samples = 60;
};

struct ParsedConfig {
  ChipConfig chip;
  AtomSpecies species;
  ConfigDefaults defaults;
};

// INI-style file with [chip], [species] and optional [sweep] sections.
// Lengths are given in mm, currents in A, fields in G inside the file and
// converted to SI here. Unknown keys or sections raise ParseError with the
// offending line; invariant violations raise ValidationError.
ParsedConfig parse_config(const std::string& path);
ParsedConfig parse_config_text(const std::string& text,
                               const std::string& origin = "<string>");

} // namespace atomchip
