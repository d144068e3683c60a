#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "graspcap/annotations/annotations.hpp"
#include "graspcap/core/error.hpp"
#include "graspcap/core/json_io.hpp"
#include "graspcap/grasps/grasp.hpp"
#include "graspcap/kinematics/object_model.hpp"
#include "graspcap/timebase/offset.hpp"

// Session store: UTF-8, one JSON object per line, each typed by "kind".
//
//   {"kind":"header","schema":"graspcap-session","version":1}      first line
//   {"kind":"session","id":S,"participant":P}                       exactly one
//   {"kind":"stream","id":..,"path":..,"clock":..,"format":..}
//   {"kind":"offset","from":clock,"to":clock,"offset_ns":n,"uncertainty_ns":n}
//   {"kind":"object", <object description>}
//   {"kind":"grasp","id":..,"object":..,"task":"pick-up"|"natural",
//    "label":"good"|"bad","hand":"robot"|"human",
//    "joints":[11 values]|null,"timestamp_s":t,"object_pose_in_palm":<transform>,
//    "contacts":[{"finger":f,"link":l,"point":[x,y,z],"sd":d}],
//    "max_penetration":d,"warnings":[..]}
//   {"kind":"range","id":..,"original":grasp id,"extremes":[grasp ids],
//    "symmetry":{"axis":[x,y,z],"period_rad":p}|null,"notes":".."}
//   {"kind":"annotation","id":..,"t_ns":n,"event":"GRASP_SET"|..,"text":".."}
//   {"kind":"trial","id":..,"participant":..,"object":..,"task":..,
//    "phase":"good"|"bad","hand":..,"grasps":[ids],"ranges":[ids],"annotations":[ids]}
//
// Records may appear in any order after the header; references are by id and
// resolved after the whole file is read. Every grasp is referenced exactly
// once, either from a trial's grasp list or as a range extreme.

namespace graspcap::session {

inline constexpr const char* kSchema = "graspcap-session";
inline constexpr int kVersion = 1;

struct StreamEntry {
  std::string id;
  std::string path;
  std::string clock;
  std::string format;
  friend bool operator==(const StreamEntry&, const StreamEntry&) = default;
};

struct RangeRecord {
  std::string id;
  std::string original;
  std::vector<std::string> extremes;
  std::optional<grasps::SymmetryAxis> symmetry;
  std::string notes;
  friend bool operator==(const RangeRecord&, const RangeRecord&) = default;
};

struct AnnotationRecord {
  std::string id;
  annotations::AnnotationEvent event;
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct TrialRecord {
  std::string id;
  std::string participant;
  std::string object;
  grasps::Task task = grasps::Task::PickUp;
  grasps::Label phase = grasps::Label::Good;
  grasps::Hand hand = grasps::Hand::Robot;
  std::vector<std::string> grasps;
  std::vector<std::string> ranges;
  std::vector<std::string> annotations;
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct SessionRecord {
  std::string id;
  std::string participant;
  std::vector<StreamEntry> streams;
  std::vector<timebase::StreamOffset> offsets;
  std::vector<kinematics::ObjectModel> objects;
  std::vector<grasps::Grasp> grasps;
  std::vector<RangeRecord> ranges;
  std::vector<AnnotationRecord> annotations;
  std::vector<TrialRecord> trials;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;

  const grasps::Grasp& grasp(const std::string& gid) const {
    for (const auto& g : grasps)
      if (g.id == gid) return g;
    throw DanglingReference("no grasp '" + gid + "'");
  }

  const RangeRecord& range_record(const std::string& rid) const {
    for (const auto& r : ranges)
      if (r.id == rid) return r;
    throw DanglingReference("no range '" + rid + "'");
  }

  grasps::GraspRange range(const std::string& rid) const {
    const auto& r = range_record(rid);
    grasps::GraspRange out;
    out.id = r.id;
    out.original = grasp(r.original);
    for (const auto& e : r.extremes) out.extremes.push_back(grasp(e));
    out.symmetry = r.symmetry;
    out.notes = r.notes;
    return out;
  }

  const kinematics::ObjectModel& object(const std::string& name) const {
    for (const auto& o : objects)
      if (o.name == name) return o;
    throw DanglingReference("no object '" + name + "'");
  }
};

// ---- JSON records ---------------------------------------------------------

inline Json grasp_to_json(const grasps::Grasp& g) {
  Json contacts = Json::array();
  for (const auto& c : g.contacts.contacts)
    contacts.push_back({{"finger", c.finger}, {"link", c.link}, {"point", vec3_to_json(c.point)}, {"sd", c.signed_distance}});
  Json j{{"kind", "grasp"},
         {"id", g.id},
         {"object", g.object},
         {"task", grasps::to_string(g.task)},
         {"label", grasps::to_string(g.label)},
         {"hand", grasps::to_string(g.hand)},
         {"joints", nullptr},
         {"timestamp_s", g.joints ? g.joints->timestamp_s : 0.0},
         {"object_pose_in_palm", transform_to_json(g.object_pose_in_palm)},
         {"contacts", contacts},
         {"max_penetration", g.contacts.max_penetration},
         {"warnings", g.warnings}};
  if (g.joints) j["joints"] = g.joints->q;
  return j;
}

inline grasps::Grasp grasp_from_json(const Json& j) {
  grasps::Grasp g;
  g.id = j.at("id").get<std::string>();
  g.object = j.at("object").get<std::string>();
  g.task = grasps::parse_task(j.at("task").get<std::string>());
  g.label = grasps::parse_label(j.at("label").get<std::string>());
  g.hand = grasps::parse_hand(j.at("hand").get<std::string>());
  if (!j.at("joints").is_null()) {
    kinematics::JointState q;
    q.q = j.at("joints").get<std::array<double, kinematics::kJointCount>>();
    q.timestamp_s = j.value("timestamp_s", 0.0);
    g.joints = q;
  }
  g.object_pose_in_palm = transform_from_json(j.at("object_pose_in_palm"));
  for (const auto& c : j.at("contacts"))
    g.contacts.contacts.push_back(
        {c.at("finger").get<int>(), c.at("link").get<int>(), vec3_from_json(c.at("point")), c.at("sd").get<double>()});
  g.contacts.max_penetration = j.value("max_penetration", 0.0);
  g.warnings = j.value("warnings", std::vector<std::string>{});
  return g;
}

inline Json range_to_json(const RangeRecord& r) {
  Json j{{"kind", "range"}, {"id", r.id}, {"original", r.original}, {"extremes", r.extremes},
         {"symmetry", nullptr}, {"notes", r.notes}};
  if (r.symmetry) j["symmetry"] = {{"axis", vec3_to_json(r.symmetry->axis)}, {"period_rad", r.symmetry->period_rad}};
  return j;
}

inline RangeRecord range_from_json(const Json& j) {
  RangeRecord r;
  r.id = j.at("id").get<std::string>();
  r.original = j.at("original").get<std::string>();
  r.extremes = j.at("extremes").get<std::vector<std::string>>();
  if (j.contains("symmetry") && !j.at("symmetry").is_null())
    r.symmetry = grasps::SymmetryAxis{vec3_from_json(j.at("symmetry").at("axis")),
                                      j.at("symmetry").at("period_rad").get<double>()};
  r.notes = j.value("notes", std::string{});
  return r;
}

inline Json trial_to_json(const TrialRecord& t) {
  return {{"kind", "trial"},  {"id", t.id},       {"participant", t.participant},
          {"object", t.object}, {"task", grasps::to_string(t.task)}, {"phase", grasps::to_string(t.phase)},
          {"hand", grasps::to_string(t.hand)}, {"grasps", t.grasps}, {"ranges", t.ranges},
          {"annotations", t.annotations}};
}

inline TrialRecord trial_from_json(const Json& j) {
  TrialRecord t;
  t.id = j.at("id").get<std::string>();
  t.participant = j.at("participant").get<std::string>();
  t.object = j.at("object").get<std::string>();
  t.task = grasps::parse_task(j.at("task").get<std::string>());
  t.phase = grasps::parse_label(j.at("phase").get<std::string>());
  t.hand = grasps::parse_hand(j.at("hand").get<std::string>());
  t.grasps = j.value("grasps", std::vector<std::string>{});
  t.ranges = j.value("ranges", std::vector<std::string>{});
  t.annotations = j.value("annotations", std::vector<std::string>{});
  return t;
}

// ---- validation -----------------------------------------------------------

/// Checks ids, cross-references and the trial invariants.
inline void validate(const SessionRecord& s) {
  auto unique = [](const auto& items, const char* what) {
    std::set<std::string> seen;
    for (const auto& it : items)
      if (!seen.insert(it.id).second) throw SchemaViolation(std::string("duplicate ") + what + " id '" + it.id + "'");
    return seen;
  };
  unique(s.streams, "stream");
  const auto grasp_ids = unique(s.grasps, "grasp");
  const auto range_ids = unique(s.ranges, "range");
  const auto annotation_ids = unique(s.annotations, "annotation");
  unique(s.trials, "trial");
  std::set<std::string> object_names;
  for (const auto& o : s.objects)
    if (!object_names.insert(o.name).second) throw SchemaViolation("duplicate object '" + o.name + "'");

  std::set<std::string> clocks;
  for (const auto& st : s.streams) clocks.insert(st.clock);
  for (const auto& o : s.offsets)
    if (!clocks.count(o.from_clock) || !clocks.count(o.to_clock))
      throw DanglingReference("offset " + o.from_clock + " -> " + o.to_clock + " names a clock with no stream");

  std::map<std::string, int> grasp_refs;
  for (const auto& g : s.grasps) {
    if (g.hand == grasps::Hand::Robot && !g.joints) throw SchemaViolation("robot grasp '" + g.id + "' has no joints");
    if (g.hand == grasps::Hand::Human && g.joints) throw SchemaViolation("human grasp '" + g.id + "' carries joints");
  }
  for (const auto& r : s.ranges) {
    if (!grasp_ids.count(r.original))
      throw DanglingReference("range '" + r.id + "' references missing grasp '" + r.original + "'");
    if (r.extremes.size() > 2) throw SchemaViolation("range '" + r.id + "' has more than two extremes");
    const auto& original = s.grasp(r.original);
    for (const auto& e : r.extremes) {
      if (!grasp_ids.count(e)) throw DanglingReference("range '" + r.id + "' references missing grasp '" + e + "'");
      ++grasp_refs[e];
      const auto& x = s.grasp(e);
      if (x.label != original.label || x.task != original.task || x.object != original.object)
        throw SchemaViolation("range '" + r.id + "': extreme '" + e + "' differs from its original");
    }
  }
  std::map<std::string, int> range_refs;
  for (const auto& t : s.trials) {
    for (const auto& gid : t.grasps) {
      if (!grasp_ids.count(gid)) throw DanglingReference("trial '" + t.id + "' references missing grasp '" + gid + "'");
      ++grasp_refs[gid];
      const auto& g = s.grasp(gid);
      if (g.label != t.phase)
        throw SchemaViolation("trial '" + t.id + "' (" + grasps::to_string(t.phase) + " phase) lists " +
                              grasps::to_string(g.label) + " grasp '" + gid + "'");
      if (g.hand != t.hand) throw SchemaViolation("trial '" + t.id + "' lists grasp '" + gid + "' of the other hand");
    }
    const std::set<std::string> listed(t.grasps.begin(), t.grasps.end());
    for (const auto& rid : t.ranges) {
      if (!range_ids.count(rid)) throw DanglingReference("trial '" + t.id + "' references missing range '" + rid + "'");
      ++range_refs[rid];
      if (!listed.count(s.range_record(rid).original))
        throw SchemaViolation("trial '" + t.id + "': range '" + rid + "' has an original outside the trial");
    }
    for (const auto& aid : t.annotations)
      if (!annotation_ids.count(aid))
        throw DanglingReference("trial '" + t.id + "' references missing annotation '" + aid + "'");
  }
  for (const auto& g : s.grasps) {
    const int n = grasp_refs[g.id];
    if (n != 1)
      throw SchemaViolation("grasp '" + g.id + "' is referenced " + std::to_string(n) + " times (expected once)");
  }
  for (const auto& r : s.ranges)
    if (range_refs[r.id] != 1) throw SchemaViolation("range '" + r.id + "' must belong to exactly one trial");
}

// ---- whole-store I/O ------------------------------------------------------

inline std::string dump_session(const SessionRecord& s) {
  validate(s);
  std::ostringstream out;
  auto line = [&](const Json& j) { out << j.dump() << '\n'; };
  line({{"kind", "header"}, {"schema", kSchema}, {"version", kVersion}});
  line({{"kind", "session"}, {"id", s.id}, {"participant", s.participant}});
  for (const auto& st : s.streams)
    line({{"kind", "stream"}, {"id", st.id}, {"path", st.path}, {"clock", st.clock}, {"format", st.format}});
  for (const auto& o : s.offsets)
    line({{"kind", "offset"}, {"from", o.from_clock}, {"to", o.to_clock}, {"offset_ns", o.offset.count()},
          {"uncertainty_ns", o.uncertainty.count()}});
  for (const auto& o : s.objects) {
    Json j = kinematics::object_to_json(o);
    j["kind"] = "object";
    line(j);
  }
  for (const auto& g : s.grasps) line(grasp_to_json(g));
  for (const auto& r : s.ranges) line(range_to_json(r));
  for (const auto& a : s.annotations)
    line({{"kind", "annotation"}, {"id", a.id}, {"t_ns", a.event.timestamp.count()},
          {"event", std::string(annotations::to_string(a.event.kind))}, {"text", a.event.text}});
  for (const auto& t : s.trials) line(trial_to_json(t));
  return out.str();
}

inline SessionRecord parse_session(const std::string& text) {
  SessionRecord s;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool header = false, session = false;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    Json j;
    try {
      j = Json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(where + "not a JSON record (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
      throw SchemaViolation(where + "record has no string field 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    if (!header) {
      if (kind != "header" || j.value("schema", std::string{}) != kSchema)
        throw SchemaViolation(where + "expected a " + std::string(kSchema) + " header record");
      if (j.value("version", -1) != kVersion)
        throw SchemaViolation(where + "unsupported store version");
      header = true;
      continue;
    }
    try {
      if (kind == "session") {
        if (session) throw SchemaViolation(where + "second session record");
        s.id = j.at("id").get<std::string>();
        s.participant = j.at("participant").get<std::string>();
        session = true;
      } else if (kind == "stream") {
        s.streams.push_back({j.at("id").get<std::string>(), j.at("path").get<std::string>(),
                             j.at("clock").get<std::string>(), j.at("format").get<std::string>()});
      } else if (kind == "offset") {
        s.offsets.push_back({j.at("from").get<std::string>(), j.at("to").get<std::string>(),
                             Duration{j.at("offset_ns").get<std::int64_t>()},
                             Duration{j.value("uncertainty_ns", std::int64_t{0})}});
      } else if (kind == "object") {
        s.objects.push_back(kinematics::object_from_json(j));
      } else if (kind == "grasp") {
        s.grasps.push_back(grasp_from_json(j));
      } else if (kind == "range") {
        s.ranges.push_back(range_from_json(j));
      } else if (kind == "annotation") {
        const auto k = annotations::parse_kind(j.at("event").get<std::string>());
        if (!k) throw SchemaViolation(where + "unknown annotation event '" + j.at("event").get<std::string>() + "'");
        const Duration t{j.at("t_ns").get<std::int64_t>()};
        if (t < Duration{0}) throw SchemaViolation(where + "negative annotation time");
        s.annotations.push_back({j.at("id").get<std::string>(), {t, *k, j.value("text", std::string{})}});
      } else if (kind == "trial") {
        s.trials.push_back(trial_from_json(j));
      } else if (kind == "header") {
        throw SchemaViolation(where + "second header record");
      } else {
        throw SchemaViolation(where + "unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(where + kind + " record: " + e.what());
    } catch (const SchemaViolation& e) {
      const std::string msg = e.what();
      throw SchemaViolation(msg.rfind("line ", 0) == 0 ? msg : where + msg);
    }
  }
  if (!header) throw SchemaViolation("empty store: missing header record");
  if (!session) throw SchemaViolation("store has no session record");
  validate(s);
  return s;
}

inline SessionRecord load_session(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open session store '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_session(buf.str());
}

inline void save_session(const SessionRecord& s, const std::string& path) {
  const std::string text = dump_session(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write session store '" + path + "'");
  out << text;
  if (!out) throw IoFailure("write to '" + path + "' failed");
}

}  // namespace graspcap::session
