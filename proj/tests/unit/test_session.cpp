#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "graspcap/session/stats.hpp"
#include "graspcap/session/store.hpp"
#include "synth.hpp"

using namespace graspcap;
using namespace graspcap::session;

namespace {

SessionRecord two_trials() {
  SessionRecord s;
  s.id = "s1";
  s.participant = "p01";
  s.objects.push_back({"Cup", kinematics::CylinderShape{0.04, 0.1}, {}});
  for (int i = 0; i < 3; ++i) {
    grasps::Grasp g;
    g.id = "g" + std::to_string(i);
    g.object = "Cup";
    g.label = i < 2 ? grasps::Label::Good : grasps::Label::Bad;
    g.joints = kinematics::JointState{};
    g.joints->q[0] = 0.1 * i;
    s.grasps.push_back(g);
  }
  s.trials.push_back({"t1", "p01", "Cup", grasps::Task::PickUp, grasps::Label::Good, grasps::Hand::Robot,
                      {"g0", "g1"}, {}, {}});
  s.trials.push_back({"t2", "p01", "Cup", grasps::Task::PickUp, grasps::Label::Bad, grasps::Hand::Robot,
                      {"g2"}, {}, {}});
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("graspcap_session_" + name)).string();
}

}  // namespace

TEST(Store, EmptySessionRoundTrip) {
  SessionRecord s;
  s.id = "empty";
  s.participant = "p00";
  EXPECT_EQ(parse_session(dump_session(s)), s);
}

TEST(Store, TwoTrialsRoundTripThroughFile) {
  const auto s = two_trials();
  const auto path = temp_path("two.jsonl");
  save_session(s, path);
  EXPECT_EQ(load_session(path), s);
  std::filesystem::remove(path);
}

TEST(Store, RandomRoundTripsAreExact) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto s = synth::random_session(rng, i);
    const auto text = dump_session(s);
    const auto back = parse_session(text);
    EXPECT_EQ(back, s) << i;
    EXPECT_EQ(dump_session(back), text);
  }
}

TEST(Store, MissingGraspIsDangling) {
  auto s = two_trials();
  s.trials[0].grasps.push_back("ghost");
  EXPECT_THROW(validate(s), DanglingReference);
  // Bypass dump validation to build a store text with the bad reference.
  auto ok = two_trials();
  auto text = dump_session(ok);
  const auto pos = text.find("\"g2\"]");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 4, "\"g9\"");
  EXPECT_THROW(parse_session(text), DanglingReference);
  EXPECT_THROW(s.grasp("ghost"), DanglingReference);
  EXPECT_THROW(s.object("Plate"), DanglingReference);
}

TEST(Store, TrialInvariants) {
  auto s = two_trials();
  s.trials[1].grasps.push_back("g0");  // referenced twice
  EXPECT_THROW(validate(s), SchemaViolation);

  s = two_trials();
  s.trials[0].grasps.push_back("g2");  // bad grasp in a good trial
  s.trials[1].grasps.clear();
  EXPECT_THROW(validate(s), SchemaViolation);

  s = two_trials();
  s.trials[1].grasps.clear();  // g2 unreferenced
  EXPECT_THROW(validate(s), SchemaViolation);

  s = two_trials();
  s.offsets.push_back({"glasses", "kinect", Duration(1), {}});
  EXPECT_THROW(validate(s), DanglingReference);

  s = two_trials();
  s.ranges.push_back({"r", "g0", {"g1"}, {}, ""});
  s.trials[0].ranges.push_back("r");
  EXPECT_THROW(validate(s), SchemaViolation);  // g1 now referenced by trial and range
  s.trials[0].grasps = {"g0"};
  EXPECT_NO_THROW(validate(s));
  s.trials[1].ranges.push_back("r");
  EXPECT_THROW(validate(s), SchemaViolation);  // range in two trials

  s = two_trials();
  s.grasps[0].joints.reset();
  EXPECT_THROW(validate(s), SchemaViolation);
}

TEST(Store, RangeLookup) {
  auto s = two_trials();
  s.ranges.push_back({"r", "g0", {"g1"}, grasps::SymmetryAxis{Vec3::UnitZ(), 0.0}, "turn"});
  s.trials[0].grasps = {"g0"};
  s.trials[0].ranges = {"r"};
  const auto r = s.range("r");
  EXPECT_EQ(r.original.id, "g0");
  ASSERT_EQ(r.extremes.size(), 1u);
  EXPECT_EQ(r.extremes[0].id, "g1");
  EXPECT_TRUE(r.symmetry);
  EXPECT_THROW(s.range("q"), DanglingReference);
}

TEST(Store, MalformedTextNamesTheLine) {
  auto text = dump_session(two_trials());
  EXPECT_THROW(parse_session(""), SchemaViolation);
  EXPECT_THROW(parse_session(text.substr(text.find('\n') + 1)), SchemaViolation);
  try {
    parse_session(text + "{\"kind\":\"mystery\"}\n");
    FAIL();
  } catch (const SchemaViolation& e) {
    const auto expected = "line " + std::to_string(std::count(text.begin(), text.end(), '\n') + 1) + ": ";
    EXPECT_EQ(std::string(e.what()).rfind(expected, 0), 0u) << e.what();
  }
  EXPECT_THROW(parse_session(text + "not json\n"), SchemaViolation);
  EXPECT_THROW(load_session("/nonexistent/store.jsonl"), IoFailure);
}

TEST(Counts, ObjectsTable) {
  const auto s = load_session(synth::fixture("objects_table.jsonl"));
  const auto r = aggregate_counts(s);
  EXPECT_EQ(r.total_good, 192u);
  EXPECT_EQ(r.total_bad, 153u);
  EXPECT_EQ(r.object("Water Pitcher"), (ObjectCounts{"Water Pitcher", 11, 1}));
  EXPECT_EQ(r.objects.size(), 16u);
  std::size_t good = 0, bad = 0;
  for (const auto& o : r.objects) good += o.good, bad += o.bad;
  EXPECT_EQ(good, r.total_good);
  EXPECT_EQ(bad, r.total_bad);
  EXPECT_EQ(format2(r.mean_good()), "11.29");
  EXPECT_EQ(format2(r.mean_bad()), "9.00");
  const auto table = render_counts(r);
  const auto row = table.find("Water Pitcher ");
  ASSERT_NE(row, std::string::npos) << table;
  const auto line = table.substr(row, table.find('\n', row) - row);
  EXPECT_NE(line.find("|     11 |      1"), std::string::npos) << line;
  EXPECT_NE(table.find("Total"), std::string::npos);
}

TEST(Counts, ParticipantsTable) {
  const auto r = aggregate_counts(load_session(synth::fixture("participants_table.jsonl")));
  EXPECT_EQ(round2(r.mean_good()), 4.5);
  EXPECT_EQ(round2(r.mean_bad()), 3.0);
  EXPECT_EQ(format2(r.mean_good()), "4.50");
  EXPECT_EQ(format2(r.mean_bad()), "3.00");
  std::size_t pairs = 0;
  for (const auto& p : r.participants) pairs += p.objects;
  EXPECT_EQ(pairs, r.pairs);
}

TEST(Counts, PermutationInvariant) {
  auto s = load_session(synth::fixture("objects_table.jsonl"));
  const auto base = aggregate_counts(s);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(s.trials.begin(), s.trials.end(), rng);
    const auto r = aggregate_counts(s);
    EXPECT_EQ(r.objects, base.objects);
    EXPECT_EQ(r.participants, base.participants);
    EXPECT_EQ(r.total_good, base.total_good);
    EXPECT_EQ(r.pairs, base.pairs);
  }
  std::vector<SessionRecord> records{load_session(synth::fixture("participants_table.jsonl")), s};
  const auto ab = aggregate_counts(records);
  std::swap(records[0], records[1]);
  const auto ba = aggregate_counts(records);
  EXPECT_EQ(ab.objects, ba.objects);
  EXPECT_EQ(ab.participants, ba.participants);
}

TEST(Census, Fixture) {
  const auto s = load_session(synth::fixture("census.jsonl"));
  const auto c = range_census(s);
  EXPECT_EQ(c, (Census{179, 115}));
  std::size_t listed = 0;
  for (const auto& t : s.trials) listed += t.grasps.size();
  EXPECT_EQ(c.total(), listed);
}

TEST(Census, Boundaries) {
  EXPECT_EQ(range_census(std::vector<SessionRecord>{}), (Census{0, 0}));
  SessionRecord empty;
  EXPECT_EQ(range_census(empty), (Census{0, 0}));
  // Give every trial grasp of the census fixture one extreme.
  auto s = two_trials();
  std::vector<grasps::Grasp> extra;
  for (auto& t : s.trials) {
    for (const auto& gid : t.grasps) {
      auto e = s.grasp(gid);
      e.id = gid + "x";
      extra.push_back(e);
      s.ranges.push_back({"r" + gid, gid, {e.id}, {}, ""});
      t.ranges.push_back("r" + gid);
    }
  }
  s.grasps.insert(s.grasps.end(), extra.begin(), extra.end());
  validate(s);
  EXPECT_EQ(range_census(s), (Census{3, 0}));
}
