#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "pqlm/bytesio.hpp"
#include "pqlm/manifest.hpp"
#include "pqlm/svgplot.hpp"
#include "test_helpers.hpp"

using namespace pqlm;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("", 0) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  CHECK(sha256_hex(abc.data(), abc.size()) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  testutil::TempDir dir;
  const auto path = dir.file("abc.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << abc;
  }
  CHECK(sha256_hex_file(path) == sha256_hex(abc.data(), abc.size()));
  CHECK_THROWS(sha256_hex_file(dir.file("missing.bin")));
}

TEST_CASE("crc32 check value") {
  const std::string nine = "123456789";
  CHECK(crc32_ieee(reinterpret_cast<const std::uint8_t*>(nine.data()), nine.size()) ==
        0xCBF43926u);
  CHECK(crc32_ieee(nullptr, 0) == 0u);
}

TEST_CASE("byte writer and reader round trip") {
  ByteWriter w;
  w.u8(0xAB);
  w.u16(0x1234);
  w.u32(0xDEADBEEF);
  w.u64(0x0123456789ABCDEFull);
  w.f32(1.5f);
  w.f64(-0.125);
  w.str16("hello");

  ByteReader r(w.bytes, "test blob");
  CHECK(r.u8() == 0xAB);
  CHECK(r.u16() == 0x1234);
  CHECK(r.u32() == 0xDEADBEEFu);
  CHECK(r.u64() == 0x0123456789ABCDEFull);
  CHECK(r.f32() == 1.5f);
  CHECK(r.f64() == -0.125);
  CHECK(r.str16() == "hello");
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u8(), FormatError);
}

TEST_CASE("little-endian layout is explicit") {
  ByteWriter w;
  w.u32(0x11223344);
  REQUIRE(w.bytes.size() == 4);
  CHECK(w.bytes[0] == 0x44);
  CHECK(w.bytes[3] == 0x11);
}

TEST_CASE("seed derivation separates tags and bases") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  // Pinned: any change here silently breaks every stored artifact.
  CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("g17 formatting survives a parse round trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1152.78, 0.0}) {
    const auto s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("manifest serialization shape") {
  RunManifest m;
  m.subcommand = "demo";
  m.config = {{"alpha", 1}};
  m.inputs.emplace_back("in.txt", std::string(64, 'a'));
  m.outputs.emplace_back("out.bin", std::string(64, 'b'));
  m.duration_seconds = 0.25;

  const auto j = manifest_to_json(m);
  CHECK(j.at("subcommand") == "demo");
  CHECK(j.at("config").at("alpha") == 1);
  CHECK(j.at("inputs").at("in.txt") == std::string(64, 'a'));
  CHECK(j.at("outputs").at("out.bin") == std::string(64, 'b'));
  CHECK(j.at("duration_seconds") == 0.25);

  testutil::TempDir dir;
  const auto path = dir.file("m.json");
  write_manifest(m, path);
  CHECK(nlohmann::json::parse(testutil::slurp_text(path)) == j);
}

TEST_CASE("line plot rendering") {
  PlotSeries a{"first", {1.0, 2.0, 3.0}};
  PlotSeries b{"second", {3.0, 1.0, 2.0}};
  const auto svg = render_line_svg("losses", "batch", "loss", {a, b});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("first") != std::string::npos);
  CHECK(svg.find("losses") != std::string::npos);

  // Escaping keeps arbitrary labels well-formed.
  const auto esc = render_line_svg("t", "x", "y", {PlotSeries{"a<b&c", {1.0, 2.0}}});
  CHECK(esc.find("a<b&c") == std::string::npos);
  CHECK(esc.find("a&lt;b&amp;c") != std::string::npos);

  CHECK_THROWS_AS(render_line_svg("t", "x", "y", {}), std::invalid_argument);

  testutil::TempDir dir;
  const auto path = dir.file("plot.svg");
  write_line_svg(path, "t", "x", "y", {a});
  CHECK(testutil::slurp_text(path).find("</svg>") != std::string::npos);
}
