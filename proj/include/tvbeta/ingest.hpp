#pragma once

#include <istream>
#include <string>
#include <vector>

#include "tvbeta/network.hpp"

namespace tvbeta {

// One timestamped directed event: src sent to dst at ts (arbitrary epoch
// units; only differences matter).
struct EventRecord {
  std::string src;
  std::string dst;
  double ts = 0.0;
};

// Parses "src dst timestamp" rows separated by commas, semicolons, tabs or
// spaces. A first line that does not parse is treated as a header; any later
// malformed row raises DataError naming the line. Blank lines are skipped.
std::vector<EventRecord> read_events(std::istream& in);
std::vector<EventRecord> read_events_file(const std::string& path);

struct IngestReport {
  long events_read = 0;    // parsed rows
  long self_events = 0;    // src == dst, dropped
  long filtered_out = 0;   // an endpoint outside the node filter, dropped
  long duplicates = 0;     // repeat of an edge already present in its bucket
  int total_buckets = 0;   // bucket count spanned by the usable time range
  int empty_buckets = 0;   // buckets with no events, dropped
};

struct IngestResult {
  DynamicNetwork net;
  std::vector<std::string> node_ids;  // row/column index -> original id
  IngestReport report;
};

// Aggregates events into binary snapshots on consecutive time buckets of the
// given width, starting at the earliest usable event. Bucket midpoints are
// rescaled to (0, 1) and the network window is [0, 1]. When a node filter is
// given, the node set is exactly the filter (isolated nodes included);
// otherwise it is every id observed on a usable event. Ids sort numerically
// when all of them are integers, lexicographically otherwise.
IngestResult ingest(const std::vector<EventRecord>& events, double bucket_width,
                    const std::vector<std::string>& node_filter = {});

}  // namespace tvbeta
