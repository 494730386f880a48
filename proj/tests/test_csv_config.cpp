#include <string>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"
#include "volfeed/config.hpp"
#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"

using namespace volfeed;
using testutil::write_file;

TEST_CASE("read_csv parses header and rows") {
  const std::string path =
      write_file("basic.csv", "date,close\n2020-01-02, 100.5 \n2020-01-03,101\n");
  CsvTable t = read_csv(path);
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[0] == "date");
  CHECK(t.header[1] == "close");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "100.5");  // fields are trimmed
  CHECK(t.column("close") == 1);
  CHECK(t.line_numbers[0] == 2);
}

TEST_CASE("read_csv skips blank lines and strips a UTF-8 BOM") {
  const std::string path = write_file(
      "bom.csv", "\xEF\xBB\xBF" "date,close\n\n2020-01-02,100\n\n2020-01-03,101\n");
  CsvTable t = read_csv(path);
  CHECK(t.header[0] == "date");  // no BOM residue
  CHECK(t.rows.size() == 2);
  CHECK(t.line_numbers[1] == 5);
}

TEST_CASE("read_csv rejects ragged rows with the line number") {
  const std::string path =
      write_file("ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_csv(path), doctest::Contains(":3: expected 2 fields"),
                       InputError);
}

TEST_CASE("read_csv error cases") {
  CHECK_THROWS_AS(read_csv(testutil::tmp_path("does_not_exist.csv")), InputError);
  const std::string empty = write_file("empty.csv", "");
  CHECK_THROWS_WITH_AS(read_csv(empty), doctest::Contains("empty file"), InputError);
}

TEST_CASE("column lookup failure names file and column") {
  const std::string path = write_file("cols.csv", "a,b\n1,2\n");
  CsvTable t = read_csv(path);
  CHECK_THROWS_WITH_AS(t.column("zz"), doctest::Contains("missing column 'zz'"),
                       InputError);
}

TEST_CASE("parse_double is strict") {
  CHECK(parse_double("1.5e-3", "t") == 1.5e-3);
  CHECK(parse_double(" 2.25", "t") == 2.25);
  CHECK_THROWS_AS(parse_double("abc", "t"), InputError);
  CHECK_THROWS_AS(parse_double("1.5x", "t"), InputError);
  CHECK_THROWS_AS(parse_double("", "t"), InputError);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1 + 0.2, 1.0 / 3.0, 1e300, -2.5e-308, 0.0}) {
    CHECK(parse_double(format_double(v), "t") == v);
  }
  CHECK(format_double(0.25, 3) == "0.25");
}

TEST_CASE("key-value parsing with comments") {
  KeyValueFile kv = KeyValueFile::from_string(
      "a = 1\n# full-line comment\nb = two words\nc=3.5 # inline\n");
  CHECK(kv.has("a"));
  CHECK(!kv.has("z"));
  CHECK(kv.get_string("b") == "two words");
  CHECK(kv.get_double("c") == 3.5);
  CHECK(kv.get_double("missing", 7.0) == 7.0);
  CHECK(kv.get_string("missing", "dflt") == "dflt");
  REQUIRE(kv.entries().size() == 3);
  CHECK(kv.entries()[0].first == "a");  // file order preserved
  CHECK(kv.entries()[2].first == "c");
}

TEST_CASE("key-value error cases") {
  CHECK_THROWS_WITH_AS(KeyValueFile::from_string("a = 1\na = 2\n", "f"),
                       doctest::Contains("duplicate key 'a'"), InputError);
  CHECK_THROWS_WITH_AS(KeyValueFile::from_string("just text\n", "f"),
                       doctest::Contains("expected 'key = value'"), InputError);
  CHECK_THROWS_WITH_AS(KeyValueFile::from_string(" = v\n", "f"),
                       doctest::Contains("empty key"), InputError);
  KeyValueFile kv = KeyValueFile::from_string("a = oops\n", "f");
  CHECK_THROWS_WITH_AS(kv.get_string("nope"),
                       doctest::Contains("missing key 'nope'"), ConfigError);
  CHECK_THROWS_WITH_AS(kv.get_double("a"), doctest::Contains("bad number"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(kv.get_u64("a", 1), doctest::Contains("bad integer"),
                       ConfigError);
}

TEST_CASE("get_u64 and get_size") {
  KeyValueFile kv =
      KeyValueFile::from_string("n = 18446744073709551615\nm = 12\n");
  CHECK(kv.get_u64("n", 0) == UINT64_C(18446744073709551615));
  CHECK(kv.get_size("m", 0) == 12);
  CHECK(kv.get_size("absent", 99) == 99);
}

TEST_CASE("get_double_list from inline commas") {
  KeyValueFile kv = KeyValueFile::from_string("k = 1, 2.5, -3\nt = 1,2,\n");
  CHECK(kv.get_double_list("k") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(kv.get_double_list("t") == std::vector<double>{1.0, 2.0});
  KeyValueFile bad = KeyValueFile::from_string("k = 1, zz\n", "f");
  CHECK_THROWS_WITH_AS(bad.get_double_list("k"), doctest::Contains("bad number"),
                       ConfigError);
}

TEST_CASE("get_double_list from @csv file") {
  const std::string csv = write_file("list.csv", "k\n0.125\n-0.5\n");
  KeyValueFile kv = KeyValueFile::from_string("k = @" + csv + "\n");
  CHECK(kv.get_double_list("k") == std::vector<double>{0.125, -0.5});
}
