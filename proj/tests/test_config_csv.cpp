#include <sstream>

#include "doctest.h"

#include "atomchip/chip_model.hpp"
#include "atomchip/config_file.hpp"
#include "atomchip/csv.hpp"
#include "atomchip/errors.hpp"

using namespace atomchip;

namespace {

const char* kMinimal =
    "[chip]\n"
    "wire_current_A = 5.0\n"
    "bias_G = 21.5\n"
    "segment_mm = -2 16 0 -2 0 0\n"
    "segment_mm = -2 0 0 2 0 0\n"
    "segment_mm = 2 0 0 2 -16 0\n";

} // namespace

TEST_CASE("minimal config matches the built-in preset") {
  auto p = parse_config_text(kMinimal);
  auto ref = quantus_z_chip(5.0, 21.5e-4);
  REQUIRE(p.chip.segments.size() == ref.segments.size());
  for (size_t i = 0; i < ref.segments.size(); ++i) {
    CHECK(norm(p.chip.segments[i].start - ref.segments[i].start) < 1e-12);
    CHECK(norm(p.chip.segments[i].end - ref.segments[i].end) < 1e-12);
    CHECK(p.chip.segments[i].current == ref.segments[i].current);
  }
  CHECK(p.chip.bias_magnitude == doctest::Approx(21.5e-4).epsilon(1e-14));
  // Species defaults are the shipped Rb values.
  CHECK(p.species.atom_number == doctest::Approx(1e5));
  CHECK(p.species.m_F * p.species.g_F == doctest::Approx(1.0));
}

TEST_CASE("species and sweep keys override defaults") {
  std::string text = std::string(kMinimal) +
                     "[species]\n"
                     "atom_number = 2e5\n"
                     "scattering_length_a0 = 100\n"
                     "[sweep]\n"
                     "bias_lo_G = 5\n"
                     "bias_hi_G = 20\n"
                     "samples = 30\n";
  auto p = parse_config_text(text);
  CHECK(p.species.atom_number == doctest::Approx(2e5));
  CHECK(p.species.a_s == doctest::Approx(100 * 5.29177210903e-11));
  CHECK(p.defaults.bias_lo == doctest::Approx(5e-4));
  CHECK(p.defaults.bias_hi == doctest::Approx(20e-4));
  CHECK(p.defaults.table_samples == 30);
}

TEST_CASE("parser rejects malformed input with location info") {
  CHECK_THROWS_AS(parse_config_text(""), ParseError); // empty file
  CHECK_THROWS_AS(parse_config_text("# only comments\n\n"), ParseError);

  try {
    parse_config_text("[chip]\nwire_current_A = 5\nmystery = 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    CHECK(std::string(e.what()).find("mystery") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text("[warp]\nx = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[chip]\nbias_G 21\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("[chip]\nbias_G = abc\n"), ParseError);
}

TEST_CASE("parser rejects invariant violations") {
  // Negative bias magnitude.
  std::string neg(kMinimal);
  neg.replace(neg.find("21.5"), 4, "-1.0");
  CHECK_THROWS_AS(parse_config_text(neg), ValidationError);

  // Missing required pieces.
  CHECK_THROWS_AS(parse_config_text("[chip]\nwire_current_A = 5\n"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config_text("[chip]\nwire_current_A = 5\nbias_G = 21.5\n"),
      ValidationError);
}

TEST_CASE("csv writer format") {
  CsvWriter csv({"a", "b"});
  csv.row({1.0, -0.5});
  csv.row({3.14159e-7, 2e10});
  std::ostringstream out;
  csv.write(out);
  CHECK(out.str() ==
        "a,b\n"
        "1.000000000e+00,-5.000000000e-01\n"
        "3.141590000e-07,2.000000000e+10\n");

  CHECK_THROWS_AS(csv.row({1.0}), ValidationError);
  CHECK_THROWS_AS(CsvWriter({}), ValidationError);

  // Byte-identical on repeated serialization.
  std::ostringstream again;
  csv.write(again);
  CHECK(out.str() == again.str());
}
