#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tvbeta/errors.hpp"
#include "tvbeta/ingest.hpp"
#include "tvbeta/simlab.hpp"

using namespace tvbeta;

namespace {

std::vector<EventRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return read_events(in);
}

}  // namespace

TEST_CASE("rows parse with mixed separators and an optional header") {
  const std::vector<EventRecord> ev =
      parse("src,dst,ts\n1 2 10\n2;1;40\n1\t2\t40\n1 2 45\n");
  REQUIRE(ev.size() == 4);
  CHECK(ev[0].src == "1");
  CHECK(ev[0].dst == "2");
  CHECK(ev[0].ts == doctest::Approx(10.0));
  CHECK(ev[1].src == "2");
  CHECK(ev[1].dst == "1");
  CHECK(ev[3].ts == doctest::Approx(45.0));
}

TEST_CASE("blank lines and CR line endings are tolerated") {
  const std::vector<EventRecord> ev = parse("\n\n1 2 10\r\n\n2 1 20\r\n");
  REQUIRE(ev.size() == 2);
  CHECK(ev[1].src == "2");
  CHECK(ev[1].ts == doctest::Approx(20.0));

  // blank lines do not consume the header allowance
  const std::vector<EventRecord> ev2 = parse("\nfrom to when\n3 4 1.5\n");
  REQUIRE(ev2.size() == 1);
  CHECK(ev2[0].src == "3");
}

TEST_CASE("a malformed row after the first content line is an error") {
  CHECK_THROWS_WITH_AS(parse("src dst ts\n1 2 0.5\n1 2\n"),
                       doctest::Contains("line 3"), DataError);
  // third field must be a finite number
  CHECK_THROWS_WITH_AS(parse("1 2 3\nbad row here\n"),
                       doctest::Contains("line 2"), DataError);
  // non-finite timestamps never parse, so a leading nan row only counts as
  // the header; a later one is an error
  CHECK(parse("1 2 nan\n1 2 4\n").size() == 1);
  CHECK_THROWS_AS(parse("1 2 4\n1 2 nan\n"), DataError);
}

TEST_CASE("event files round trip through the filesystem") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "tvbeta_ingest_test.csv";
  {
    std::ofstream out(path);
    out << "source,target,stamp\n7 8 100\n8 7 200\n";
  }
  const std::vector<EventRecord> ev = read_events_file(path.string());
  std::remove(path.string().c_str());
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].src == "7");
  CHECK(ev[1].ts == doctest::Approx(200.0));

  CHECK_THROWS_AS(read_events_file((fs::temp_directory_path() /
                                    "tvbeta_no_such_file.csv")
                                       .string()),
                  DataError);
}

TEST_CASE("events aggregate into unit-window buckets") {
  const std::vector<EventRecord> ev = {
      {"1", "2", 10.0}, {"2", "1", 40.0}, {"1", "2", 40.0}, {"1", "2", 45.0}};
  const IngestResult res = ingest(ev, 30.0);

  CHECK(res.node_ids == std::vector<std::string>{"1", "2"});
  CHECK(res.report.events_read == 4);
  CHECK(res.report.self_events == 0);
  CHECK(res.report.filtered_out == 0);
  CHECK(res.report.duplicates == 1);  // two 1->2 events in the second bucket
  CHECK(res.report.total_buckets == 2);
  CHECK(res.report.empty_buckets == 0);

  REQUIRE(res.net.size() == 2);
  CHECK(res.net.n() == 2);
  CHECK(res.net.window_a() == doctest::Approx(0.0));
  CHECK(res.net.window_b() == doctest::Approx(1.0));
  CHECK(res.net.time(0) == doctest::Approx(0.25));
  CHECK(res.net.time(1) == doctest::Approx(0.75));

  CHECK(res.net.snapshot(0)(0, 1) == 1);
  CHECK(res.net.snapshot(0)(1, 0) == 0);
  CHECK(res.net.snapshot(1)(0, 1) == 1);
  CHECK(res.net.snapshot(1)(1, 0) == 1);
}

TEST_CASE("self loops are counted and dropped") {
  const std::vector<EventRecord> ev = {
      {"1", "1", 5.0}, {"1", "2", 10.0}, {"2", "1", 12.0}, {"2", "2", 12.0}};
  const IngestResult res = ingest(ev, 100.0);
  CHECK(res.report.self_events == 2);
  CHECK(res.report.events_read == 4);
  REQUIRE(res.net.size() == 1);
  CHECK(res.net.snapshot(0).diagonal().sum() == 0);
  CHECK(static_cast<int>(res.net.snapshot(0).sum()) == 2);
}

TEST_CASE("a node filter restricts events and keeps isolated members") {
  const std::vector<EventRecord> ev = {
      {"1", "2", 0.0}, {"1", "2", 1.0}, {"3", "1", 2.0}};
  const IngestResult res = ingest(ev, 10.0, {"1", "2", "7"});

  CHECK(res.node_ids == std::vector<std::string>{"1", "2", "7"});
  CHECK(res.report.filtered_out == 1);  // 3 -> 1 has an endpoint outside
  CHECK(res.report.duplicates == 1);
  REQUIRE(res.net.size() == 1);
  CHECK(res.net.n() == 3);
  CHECK(res.net.time(0) == doctest::Approx(0.5));

  const Adjacency& a = res.net.snapshot(0);
  CHECK(a(0, 1) == 1);
  CHECK(static_cast<int>(a.sum()) == 1);
  CHECK(static_cast<int>(a.row(2).sum()) == 0);  // "7" never appears
  CHECK(static_cast<int>(a.col(2).sum()) == 0);
}

TEST_CASE("ids sort numerically when integral and lexically otherwise") {
  const std::vector<EventRecord> num = {{"10", "2", 0.0}, {"2", "10", 1.0}};
  CHECK(ingest(num, 10.0).node_ids == std::vector<std::string>{"2", "10"});

  const std::vector<EventRecord> lex = {{"a10", "a2", 0.0}, {"a2", "a10", 1.0}};
  CHECK(ingest(lex, 10.0).node_ids == std::vector<std::string>{"a10", "a2"});
}

TEST_CASE("empty buckets are dropped but counted") {
  const std::vector<EventRecord> ev = {{"1", "2", 0.0}, {"2", "1", 95.0}};
  const IngestResult res = ingest(ev, 30.0);
  CHECK(res.report.total_buckets == 4);
  CHECK(res.report.empty_buckets == 2);
  REQUIRE(res.net.size() == 2);
  CHECK(res.net.time(0) == doctest::Approx(0.125));
  CHECK(res.net.time(1) == doctest::Approx(0.875));
}

TEST_CASE("a simulated network survives an event-list round trip") {
  SimDesign de;
  de.n = 8;
  de.N = 4;
  de.seed = 77;
  const DynamicNetwork src = generate(de, ParamFamily::constant(de.n, 0.0), 0);

  // one event per edge, snapshot l stamped at 16 + 32 l
  std::vector<EventRecord> ev;
  for (int l = 0; l < src.size(); ++l) {
    for (int i = 0; i < de.n; ++i)
      for (int j = 0; j < de.n; ++j)
        if (src.snapshot(l)(i, j))
          ev.push_back({std::to_string(i + 1), std::to_string(j + 1),
                        16.0 + 32.0 * l});
  }
  const IngestResult res = ingest(ev, 32.0);

  REQUIRE(res.net.n() == de.n);  // every node active somewhere
  REQUIRE(res.net.size() == src.size());
  CHECK(res.report.duplicates == 0);
  CHECK(res.report.empty_buckets == 0);
  for (int i = 0; i < de.n; ++i)
    CHECK(res.node_ids[static_cast<std::size_t>(i)] == std::to_string(i + 1));
  for (int l = 0; l < src.size(); ++l) {
    CHECK(res.net.time(l) == doctest::Approx((l + 0.5) / 4.0).epsilon(1e-12));
    CHECK((res.net.snapshot(l).array() == src.snapshot(l).array()).all());
  }
}

TEST_CASE("ingest rejects unusable input") {
  const std::vector<EventRecord> ok = {{"1", "2", 0.0}};
  CHECK_THROWS_AS(ingest(ok, 0.0), ConfigError);
  CHECK_THROWS_AS(ingest(ok, -1.0), ConfigError);

  CHECK_THROWS_WITH_AS(ingest({}, 1.0), doctest::Contains("no usable events"),
                       DataError);
  const std::vector<EventRecord> selfs = {{"a", "a", 1.0}, {"b", "b", 2.0}};
  CHECK_THROWS_AS(ingest(selfs, 1.0), DataError);
  // a filter that excludes everything leaves nothing usable
  const std::vector<EventRecord> pair = {{"1", "2", 0.0}};
  CHECK_THROWS_AS(ingest(pair, 1.0, {"5", "6"}), DataError);
}
