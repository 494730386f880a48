#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"
#include "volfeed/manifest.hpp"
#include "volfeed/rng.hpp"
#include "volfeed/svgplot.hpp"

using namespace volfeed;

namespace {

SvgChart sample_chart() {
  SvgChart chart;
  chart.title = "kernel decay";
  chart.x_label = "lag";
  chart.y_label = "K(tau)";
  SvgSeries a;
  a.label = "k_v";
  a.x = {1, 2, 3, 4};
  a.y = {0.06, 0.05, 0.041, 0.033};
  SvgSeries b;
  b.label = "k_l";
  b.x = {1, 2, 3, 4};
  b.y = {-0.01, -0.008, -0.007, -0.006};
  b.color = "#aa3311";
  b.dashed = true;
  SvgSeries c;
  c.label = "samples";
  c.x = {1, 2};
  c.y = {0.061, 0.052};
  c.points = true;
  chart.series = {a, b, c};
  chart.hlines = {{0.0, "zero"}};
  return chart;
}

// Independent FNV-1a, written from the published constants.
std::uint64_t fnv_ref(const std::string& s) {
  std::uint64_t h = UINT64_C(14695981039346656037);
  for (unsigned char c : s) {
    h ^= c;
    h *= UINT64_C(1099511628211);
  }
  return h;
}

}  // namespace

TEST_CASE("chart rendering is deterministic") {
  const SvgChart chart = sample_chart();
  const std::string once = chart.render();
  const std::string again = chart.render();
  CHECK(once == again);
  CHECK(!once.empty());

  const std::string path = testutil::tmp_path("chart.svg");
  chart.write(path);
  CHECK(testutil::read_file(path) == once);
}

TEST_CASE("chart structure") {
  const std::string svg = sample_chart().render();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("kernel decay") != std::string::npos);
  CHECK(svg.find("#aa3311") != std::string::npos);        // explicit color
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // dashed series
  CHECK(svg.find("<circle") != std::string::npos);        // point markers
  CHECK(svg.find("zero") != std::string::npos);           // hline label
  CHECK(svg.find("<!--") != std::string::npos);           // embedded data
  CHECK(svg.find("0.041") != std::string::npos);          // plotted value
}

TEST_CASE("xml-significant characters are escaped") {
  SvgChart chart = sample_chart();
  chart.title = "a<b & \"c\">";
  const std::string svg = chart.render();
  CHECK(svg.find("a&lt;b &amp; &quot;c&quot;&gt;") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("fnv1a64 test vectors") {
  CHECK(fnv1a64("", 0) == UINT64_C(0xcbf29ce484222325));
  CHECK(fnv1a64("a", 1) == UINT64_C(0xaf63dc4c8601ec8c));
  CHECK(fnv1a64("foobar", 6) == UINT64_C(0x85944171f73967e8));
}

TEST_CASE("fnv1a64 agrees with an independent loop on random strings") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng.uniform01() * 64);
    for (int i = 0; i < len; ++i)
      s.push_back(static_cast<char>(rng.next_u64() & 0xff));
    CHECK(fnv1a64(s.data(), s.size()) == fnv_ref(s));
  }
}

TEST_CASE("file hashing matches in-memory hashing") {
  const std::string path = testutil::write_file("hashme.bin", "foobar");
  CHECK(fnv1a64_file_hex(path) == "85944171f73967e8");
  const std::string empty = testutil::write_file("empty.bin", "");
  CHECK(fnv1a64_file_hex(empty) == "cbf29ce484222325");
}

TEST_CASE("manifest rendering is deterministic and timestamp free") {
  RunManifest m;
  m.command = "observables";
  m.tool_version = "1.0.0";
  m.inputs = {{"a.csv", "85944171f73967e8"}};
  m.config = {{"tau_max", "40"}, {"cutoff", "0.15"}};
  m.seed = 42;
  m.outputs = {"out/observables.csv"};

  const std::string text = m.render();
  CHECK(text == m.render());
  CHECK(text.find("command = observables") != std::string::npos);
  CHECK(text.find("fnv1a64:85944171f73967e8") != std::string::npos);
  CHECK(text.find("config.tau_max = 40") != std::string::npos);
  CHECK(text.find("seed = 42") != std::string::npos);

  const std::string path = testutil::tmp_path("manifest.txt");
  m.write(path);
  CHECK(testutil::read_file(path) == text);

  RunManifest unseeded = m;
  unseeded.seed.reset();
  CHECK(unseeded.render().find("seed") == std::string::npos);
}
