#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graspcap/session/store.hpp"

namespace graspcap::session {

struct ObjectCounts {
  std::string object;
  std::size_t good = 0, bad = 0;
  friend bool operator==(const ObjectCounts&, const ObjectCounts&) = default;
};

struct ParticipantCounts {
  std::string participant;
  std::size_t objects = 0;  // distinct objects with at least one trial
  std::size_t good = 0, bad = 0;
  double mean_good() const { return objects ? static_cast<double>(good) / objects : 0.0; }
  double mean_bad() const { return objects ? static_cast<double>(bad) / objects : 0.0; }
  friend bool operator==(const ParticipantCounts&, const ParticipantCounts&) = default;
};

/// Grasp counts per object and per participant. Means are per
/// participant-object pair: total / number of distinct (participant, object)
/// pairs that have at least one trial.
struct CountsReport {
  std::vector<ObjectCounts> objects;  // sorted by name
  std::vector<ParticipantCounts> participants;  // sorted by id
  std::size_t total_good = 0, total_bad = 0;
  std::size_t pairs = 0;

  double mean_good() const { return pairs ? static_cast<double>(total_good) / pairs : 0.0; }
  double mean_bad() const { return pairs ? static_cast<double>(total_bad) / pairs : 0.0; }

  const ObjectCounts& object(const std::string& name) const {
    for (const auto& o : objects)
      if (o.object == name) return o;
    throw PreconditionViolation("no counts for object '" + name + "'");
  }
};

/// Value rounded half away from zero to 2 decimals, as rendered in reports.
inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline std::string format2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", round2(v));
  return buf;
}

inline CountsReport aggregate_counts(const std::vector<SessionRecord>& records) {
  CountsReport r;
  std::map<std::string, std::size_t> object_slot;
  std::map<std::string, ParticipantCounts> per_participant;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& s : records) {
    for (const auto& t : s.trials) {
      auto [it, inserted] = object_slot.try_emplace(t.object, r.objects.size());
      if (inserted) r.objects.push_back({t.object, 0, 0});
      auto& oc = r.objects[it->second];
      auto& pc = per_participant[t.participant];
      pc.participant = t.participant;
      if (pairs.insert({t.participant, t.object}).second) ++pc.objects;
      for (const auto& gid : t.grasps) {
        const bool good = s.grasp(gid).label == grasps::Label::Good;
        (good ? oc.good : oc.bad) += 1;
        (good ? pc.good : pc.bad) += 1;
        (good ? r.total_good : r.total_bad) += 1;
      }
    }
  }
  // Object order is canonicalised so the report is independent of record order.
  std::sort(r.objects.begin(), r.objects.end(), [](const auto& a, const auto& b) { return a.object < b.object; });
  for (auto& [id, pc] : per_participant) r.participants.push_back(pc);
  r.pairs = pairs.size();
  return r;
}

inline CountsReport aggregate_counts(const SessionRecord& record) {
  return aggregate_counts(std::vector<SessionRecord>{record});
}

/// Aligned text table: Object | Good | Bad, then Total and Mean rows.
inline std::string render_counts(const CountsReport& r) {
  std::size_t width = 6;
  for (const auto& o : r.objects) width = std::max(width, o.object.size());
  std::string out;
  auto row = [&](const std::string& name, const std::string& good, const std::string& bad) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s | %6s | %6s\n", static_cast<int>(width), name.c_str(), good.c_str(),
                  bad.c_str());
    out += buf;
  };
  row("Object", "Good", "Bad");
  out += std::string(width, '-') + "-+-" + std::string(6, '-') + "-+-" + std::string(6, '-') + "\n";
  for (const auto& o : r.objects) row(o.object, std::to_string(o.good), std::to_string(o.bad));
  row("Total", std::to_string(r.total_good), std::to_string(r.total_bad));
  row("Mean", format2(r.mean_good()), format2(r.mean_bad()));
  return out;
}

struct Census {
  std::size_t with_extremes = 0;
  std::size_t without = 0;
  std::size_t total() const { return with_extremes + without; }
  friend bool operator==(const Census&, const Census&) = default;
};

/// Splits the grasps listed by trials into those that anchor a range with at
/// least one extreme and point grasps. Extremes themselves are not counted.
inline Census range_census(const std::vector<SessionRecord>& records) {
  Census c;
  for (const auto& s : records) {
    std::set<std::string> ranged;
    for (const auto& r : s.ranges)
      if (!r.extremes.empty()) ranged.insert(r.original);
    for (const auto& t : s.trials)
      for (const auto& gid : t.grasps) (ranged.count(gid) ? c.with_extremes : c.without) += 1;
  }
  return c;
}

inline Census range_census(const SessionRecord& record) { return range_census(std::vector<SessionRecord>{record}); }

}  // namespace graspcap::session
