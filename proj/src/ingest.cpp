#include "tvbeta/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "tvbeta/errors.hpp"

namespace tvbeta {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ';' || c == '\t' || c == ' ') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<EventRecord> parse_line(const std::string& line) {
  const std::vector<std::string> f = split_fields(line);
  if (f.size() != 3) return std::nullopt;
  const char* s = f[2].c_str();
  char* end = nullptr;
  const double ts = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(ts)) return std::nullopt;
  return EventRecord{f[0], f[1], ts};
}

bool all_integer_ids(const std::vector<std::string>& ids) {
  for (const std::string& id : ids) {
    if (id.empty()) return false;
    const char* s = id.c_str();
    char* end = nullptr;
    (void)std::strtoll(s, &end, 10);
    if (end == s || *end != '\0') return false;
  }
  return true;
}

}  // namespace

std::vector<EventRecord> read_events(std::istream& in) {
  std::vector<EventRecord> events;
  std::string line;
  long lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split_fields(line).empty()) continue;  // blank
    const std::optional<EventRecord> ev = parse_line(line);
    if (!ev) {
      if (first_content) {
        first_content = false;  // header row
        continue;
      }
      throw DataError("line " + std::to_string(lineno) +
                      ": expected 'src dst timestamp'");
    }
    first_content = false;
    events.push_back(*ev);
  }
  return events;
}

std::vector<EventRecord> read_events_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open events file: " + path);
  return read_events(in);
}

IngestResult ingest(const std::vector<EventRecord>& events, double bucket_width,
                    const std::vector<std::string>& node_filter) {
  if (!(bucket_width > 0.0))
    throw ConfigError("ingest: bucket width must be positive");

  IngestReport report;
  report.events_read = static_cast<long>(events.size());

  const bool filtered = !node_filter.empty();
  std::set<std::string> allowed(node_filter.begin(), node_filter.end());

  // usable events and the node set
  std::vector<const EventRecord*> usable;
  std::set<std::string> seen;
  for (const EventRecord& ev : events) {
    if (ev.src == ev.dst) {
      ++report.self_events;
      continue;
    }
    if (filtered && (!allowed.count(ev.src) || !allowed.count(ev.dst))) {
      ++report.filtered_out;
      continue;
    }
    usable.push_back(&ev);
    seen.insert(ev.src);
    seen.insert(ev.dst);
  }
  if (usable.empty()) throw DataError("ingest: no usable events");

  std::vector<std::string> ids(filtered ? allowed.begin() : seen.begin(),
                               filtered ? allowed.end() : seen.end());
  if (all_integer_ids(ids)) {
    std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
      const long long x = std::strtoll(a.c_str(), nullptr, 10);
      const long long y = std::strtoll(b.c_str(), nullptr, 10);
      return x != y ? x < y : a < b;
    });
  } else {
    std::sort(ids.begin(), ids.end());
  }
  const int n = static_cast<int>(ids.size());
  if (n < 2) throw DataError("ingest: need at least two nodes");

  std::map<std::string, int> index;
  for (int i = 0; i < n; ++i) index[ids[static_cast<std::size_t>(i)]] = i;

  double tmin = usable.front()->ts, tmax = usable.front()->ts;
  for (const EventRecord* ev : usable) {
    tmin = std::min(tmin, ev->ts);
    tmax = std::max(tmax, ev->ts);
  }
  const int nb = static_cast<int>(std::floor((tmax - tmin) / bucket_width)) + 1;
  report.total_buckets = nb;

  std::map<int, Adjacency> buckets;
  for (const EventRecord* ev : usable) {
    int k = static_cast<int>(std::floor((ev->ts - tmin) / bucket_width));
    k = std::clamp(k, 0, nb - 1);  // guard the float edge at tmax
    auto it = buckets.find(k);
    if (it == buckets.end())
      it = buckets.emplace(k, Adjacency::Zero(n, n)).first;
    std::uint8_t& cell = it->second(index[ev->src], index[ev->dst]);
    if (cell)
      ++report.duplicates;
    else
      cell = 1;
  }
  report.empty_buckets = nb - static_cast<int>(buckets.size());

  std::vector<double> times;
  std::vector<Adjacency> snaps;
  times.reserve(buckets.size());
  snaps.reserve(buckets.size());
  for (auto& kv : buckets) {
    times.push_back((kv.first + 0.5) / nb);
    snaps.push_back(std::move(kv.second));
  }

  DynamicNetwork net(std::move(times), std::move(snaps), 0.0, 1.0);
  return IngestResult{std::move(net), std::move(ids), report};
}

}  // namespace tvbeta
