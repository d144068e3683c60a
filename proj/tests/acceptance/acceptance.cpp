// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "synth.hpp"

using namespace graspcap;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Outcome {
  bool pass = false;
  std::string detail;
};

const kinematics::KinematicChain& chain() {
  static const auto c = kinematics::load_chain(synth::chain_path());
  return c;
}

// ---- 1, 2: beep detection ---------------------------------------------------

struct BeepCase {
  timebase::AudioTrack track;
  Duration onset;
};

constexpr std::int64_t kRate = 22050;

std::vector<BeepCase> beep_suite() {
  std::vector<BeepCase> cases;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> onset(1.0, 28.5);
  // 10 dB: tone power a^2/2 is ten times the noise variance.
  const double amp = 0.5;
  const double noise = std::sqrt(amp * amp / 2.0 / 10.0);
  for (unsigned i = 0; i < 100; ++i) {
    const double t = onset(rng);
    BeepCase c;
    c.track = synth::tone_track(30.0, t, 0.5, amp, noise, 100 + i, kRate);
    c.onset = sample_time(static_cast<std::int64_t>(std::llround(t * kRate)), kRate);
    cases.push_back(std::move(c));
  }
  return cases;
}

timebase::BandPowerParams beep_params() {
  timebase::BandPowerParams p;
  p.window_ms = 100;
  p.overlap = 2;
  return p;
}

Outcome beep_bound(const std::vector<BeepCase>& suite, int levels, Duration bound, double budget_s) {
  const auto p = beep_params();
  int within = 0;
  Duration worst{0};
  const auto t0 = Clock::now();
  for (const auto& c : suite) {
    try {
      auto det = timebase::detect_beep(timebase::band_power_series(c.track, p));
      if (levels > 0) det = timebase::refine_beep(c.track, det, levels, 10, p);
      const Duration err = det.time > c.onset ? det.time - c.onset : c.onset - det.time;
      worst = std::max(worst, err);
      if (err <= bound) ++within;
    } catch (const Error&) {
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << within << "/100 within " << to_seconds(bound) * 1000 << " ms, worst " << to_seconds(worst) * 1000
    << " ms, " << elapsed << " s";
  return {within == 100 && elapsed < budget_s, d.str()};
}

// ---- 3: Procrustes ----------------------------------------------------------

Outcome procrustes_recovery() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto src = synth::random_points(rng, 50, Vec3(1, 1, 1));
    const auto truth = synth::random_transform(rng, std::numbers::pi, 2.0);
    const auto dst = truth.apply(src);
    const auto est = align::procrustes(src, dst);
    worst = std::max(worst, rms_distance(est.apply(src), dst));
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "worst rms " << worst << " m, " << elapsed << " s";
  return {worst < 1e-9 && elapsed < 5.0, d.str()};
}

// ---- 4: ICP -----------------------------------------------------------------

Outcome icp_recovery() {
  std::mt19937_64 rng(4);
  const kinematics::ObjectModel slab{"slab", kinematics::BoxShape{Vec3(0.4, 0.2, 0.1)}, {}};
  auto dense = kinematics::sample_object_surface(slab, 4e5, 4);
  std::shuffle(dense.begin(), dense.end(), rng);
  dense.resize(10000);
  const align::KdTree tree(dense);
  // Noiseless clouds have no outliers, so nothing is trimmed or gated.
  align::IcpParams params;
  params.trim_fraction = 0.0;
  params.max_pair_distance = align::IcpParams::unlimited;
  params.max_iterations = 200;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int good = 0;
  bool monotone = true;
  const auto t0 = Clock::now();
  for (int i = 0; i < 100; ++i) {
    const auto truth = synth::perturbation(rng, u(rng) * 10.0 * std::numbers::pi / 180.0, u(rng) * 0.05);
    const auto src = truth.inverse().apply(dense);
    const auto r = align::icp(src, tree, RigidTransform::identity(), params);
    for (std::size_t k = 1; k < r.rms_history.size(); ++k)
      if (r.rms_history[k] > r.rms_history[k - 1]) monotone = false;
    if (r.rms_residual < 1e-3 && deg(rotation_angle_between(r.transform.rotation, truth.rotation)) < 0.5) ++good;
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << good << "/100 recovered, residuals " << (monotone ? "non-increasing" : "INCREASED") << ", " << elapsed << " s";
  return {good >= 99 && monotone && elapsed < 60.0, d.str()};
}

// ---- 5: alternating object alignment ----------------------------------------

// A cylinder's spin about its own axis is unobservable, so only the axis
// direction is compared for it.
double orientation_error_deg(const kinematics::ObjectModel& truth, const RigidTransform& estimate) {
  if (std::holds_alternative<kinematics::CylinderShape>(truth.shape)) {
    const double c = truth.pose.rotation.col(2).dot(estimate.rotation.col(2));
    return deg(std::acos(std::clamp(c, -1.0, 1.0)));
  }
  return deg(rotation_angle_between(estimate.rotation, truth.pose.rotation));
}

Outcome object_alignment() {
  const std::vector<kinematics::Shape> shapes{kinematics::BoxShape{Vec3(0.06, 0.09, 0.12)},
                                              kinematics::BoxShape{Vec3(0.05, 0.08, 0.1)},
                                              kinematics::CylinderShape{0.035, 0.12},
                                              kinematics::BoxShape{Vec3(0.07, 0.05, 0.11)}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto q = synth::reach_pose();
  for (std::size_t k = 0; k < 3; ++k) q.flexion(k) = 0.6;
  const auto hand = kinematics::sample_surface(chain(), q, 4e4, /*hand_only=*/true);
  int good = 0;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto object = synth::object_in_front(chain(), q, shapes[s], 0.01);
    auto cloud = kinematics::sample_surface(chain(), q, 2.5e4, true);
    const auto obj = kinematics::sample_object_surface(object, 2e4, static_cast<unsigned>(s + 1));
    cloud.insert(cloud.end(), obj.begin(), obj.end());
    for (int i = 0; i < 25; ++i) {
      const auto init =
          object.pose * synth::perturbation(rng, u(rng) * 10.0 * std::numbers::pi / 180.0, u(rng) * 0.05);
      try {
        const auto r = align::alternate_object_alignment(cloud, hand, object, init, 3);
        const double dt = (r.object_pose.translation - object.pose.translation).norm();
        const double da = orientation_error_deg(object, r.object_pose);
        if (dt < 5e-3 && da < 5.0) ++good;
      } catch (const Error&) {
      }
    }
  }
  std::ostringstream d;
  d << good << "/100 within 5 mm / 5 deg";
  return {good >= 95, d.str()};
}

// ---- 6, 7: grasp ranges -----------------------------------------------------

struct RangeCase {
  grasps::GraspRange range;
  kinematics::ObjectModel object;  // in the chain's base frame
};

std::vector<RangeCase> range_fixture() {
  const std::vector<kinematics::Shape> shapes{kinematics::BoxShape{Vec3(0.06, 0.06, 0.06)},
                                              kinematics::BoxShape{Vec3(0.05, 0.08, 0.1)},
                                              kinematics::CylinderShape{0.03, 0.12},
                                              kinematics::CylinderShape{0.025, 0.1},
                                              kinematics::SphereShape{0.035}};
  // Candidate wrist rolls; the first four whose extreme resolves are kept per shape.
  const std::vector<double> rolls{0.2, 0.35, -0.25, 0.5, -0.15, 0.3, -0.35, 0.15, 0.25, -0.2, 0.1, -0.1};
  constexpr std::size_t kPerShape = 4;
  grasps::ResolveParams params;
  params.contact_fingers = {1, 2, 3};
  std::vector<RangeCase> out;
  for (const auto& shape : shapes) {
    const auto q0 = synth::reach_pose();
    const auto object = synth::object_in_front(chain(), q0, shape, 0.01, "obj");
    const auto original = grasps::resolve_grasp(q0, object, chain(), params);
    std::size_t kept = 0;
    for (std::size_t r = 0; r < rolls.size() && kept < kPerShape; ++r) {
      auto q1 = q0;
      q1.arm(6) += rolls[r];
      grasps::Grasp extreme;
      try {
        extreme = grasps::resolve_grasp(q1, object, chain(), params);
      } catch (const Unresolvable&) {
        continue;
      }
      RangeCase c;
      c.object = object;
      c.range.id = "r" + std::to_string(out.size());
      c.range.original = original;
      c.range.original.id = c.range.id + "-orig";
      extreme.id = c.range.id + "-ext";
      c.range.extremes.push_back(std::move(extreme));
      out.push_back(std::move(c));
      ++kept;
    }
    if (kept < kPerShape) throw std::runtime_error("range fixture: too few resolvable extremes");
  }
  return out;
}

double max_joint_diff(const kinematics::JointState& a, const kinematics::JointState& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < kinematics::kJointCount; ++j) m = std::max(m, std::abs(a.q[j] - b.q[j]));
  return m;
}

double penetration(const grasps::Grasp& g, const kinematics::ObjectModel& model) {
  const auto placed = grasps::object_in_base(g, model, chain());
  return kinematics::detect_contacts(chain(), *g.joints, placed, 1e-3).max_penetration;
}

Outcome interpolation_feasibility(const std::vector<RangeCase>& fixture) {
  double worst_end = 0.0, worst_pen = 0.0;
  int resolved = 0;
  for (const auto& c : fixture) {
    for (double t : {0.0, 1.0 / 3, 0.5, 2.0 / 3, 1.0}) {
      try {
        const auto g = grasps::interpolate_range(c.range, t, c.object, chain());
        ++resolved;
        worst_pen = std::max(worst_pen, penetration(g, c.object));
        if (t == 0.0) worst_end = std::max(worst_end, max_joint_diff(*g.joints, *c.range.original.joints));
        if (t == 1.0) worst_end = std::max(worst_end, max_joint_diff(*g.joints, *c.range.extremes[0].joints));
      } catch (const Error&) {
      }
    }
  }
  std::ostringstream d;
  d << resolved << "/100 resolved, endpoint error " << worst_end << " rad, worst penetration " << worst_pen << " m";
  return {resolved == 100 && worst_end <= 1e-6 && worst_pen <= 1e-3, d.str()};
}

Outcome nearest_direction(const std::vector<RangeCase>& fixture) {
  int cases = 0, correct = 0;
  for (const auto& c : fixture) {
    const auto metric = grasps::GraspMetric::of(chain(), c.object);
    for (double t : {1.0 / 3, 2.0 / 3}) {
      try {
        const auto g = grasps::interpolate_range(c.range, t, c.object, chain());
        if (penetration(g, c.object) > 1e-3) continue;
        ++cases;
        const auto want = t < 0.5 ? grasps::Nearest::Original : grasps::Nearest::Extreme;
        if (grasps::nearest_extreme(g, c.range.original, c.range.extremes[0], metric).label == want) ++correct;
      } catch (const Error&) {
        ++cases;
      }
    }
  }
  std::ostringstream d;
  d << correct << "/" << cases << " classified in the expected direction";
  return {cases > 0 && correct == cases, d.str()};
}

// ---- 8: similarity ----------------------------------------------------------

Outcome similarity_sanity() {
  std::array<double, kinematics::kJointCount> range{};
  range.fill(1.0);
  range[0] = 4.0;
  grasps::GraspFeatures a, b;
  b.joints.q[0] = 0.2;
  const auto r = grasps::similarity({a, b}, range, 1.0);
  const bool example = std::abs(r.joint_variation[0] - 0.025) <= 1e-12;

  auto q = synth::reach_pose();
  q.flexion(1) = 0.4;
  grasps::Grasp g;
  g.id = "g";
  g.object = "obj";
  g.joints = q;
  const auto same = grasps::similarity(std::vector<grasps::Grasp>{g, g, g, g},
                                       kinematics::ObjectModel{"obj", kinematics::BoxShape{Vec3(0.1, 0.2, 0.3)}, {}},
                                       chain());
  bool zero = same.mean_joint_variation == 0.0 && same.palm_spread == 0.0 && same.fingertip_spread == 0.0;
  for (double v : same.joint_variation) zero = zero && v == 0.0;

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> k(-64, 64);
  bool invariant = true;
  for (int i = 0; i < 100; ++i) {
    std::vector<grasps::GraspFeatures> group(4), big;
    for (auto& f : group) {
      f.palm = Vec3(k(rng), k(rng), k(rng)) / 64.0;
      for (auto& t : f.fingertips) t = Vec3(k(rng), k(rng), k(rng)) / 64.0;
    }
    big = group;
    for (auto& f : big) {
      f.palm *= 4.0;
      for (auto& t : f.fingertips) t *= 4.0;
    }
    const auto r1 = grasps::similarity(group, range, 2.0);
    const auto r4 = grasps::similarity(big, range, 8.0);
    invariant = invariant && r1.palm_spread == r4.palm_spread && r1.fingertip_spread == r4.fingertip_spread;
  }
  std::ostringstream d;
  d << "identical group zero: " << zero << ", scale invariance: " << invariant
    << ", normalized std example: " << r.joint_variation[0];
  return {example && zero && invariant, d.str()};
}

// ---- 9: statistics ----------------------------------------------------------

Outcome statistics_fidelity() {
  const auto objects = session::aggregate_counts(session::load_session(synth::fixture("objects_table.jsonl")));
  const auto people = session::aggregate_counts(session::load_session(synth::fixture("participants_table.jsonl")));
  const auto census = session::range_census(session::load_session(synth::fixture("census.jsonl")));
  const auto& pitcher = objects.object("Water Pitcher");
  const bool ok = objects.total_good == 192 && objects.total_bad == 153 && pitcher.good == 11 && pitcher.bad == 1 &&
                  session::round2(people.mean_good()) == 4.5 && session::round2(people.mean_bad()) == 3.0 &&
                  census.with_extremes == 179 && census.without == 115;
  std::ostringstream d;
  d << "totals " << objects.total_good << "/" << objects.total_bad << ", Water Pitcher " << pitcher.good << "/"
    << pitcher.bad << ", means " << session::format2(people.mean_good()) << "/" << session::format2(people.mean_bad())
    << ", census " << census.with_extremes << "/" << census.without;
  return {ok, d.str()};
}

// ---- 10: round trips --------------------------------------------------------

Outcome round_trips() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<float> coord(-5.0f, 5.0f);
  std::uniform_int_distribution<int> byte(0, 255), count(0, 300);
  int ply = 0, store = 0, notes = 0;
  for (int i = 0; i < 1000; ++i) {
    rgbd::PointCloud cloud;
    const int n = count(rng);
    for (int p = 0; p < n; ++p)
      cloud.push_back(Vec3(coord(rng), coord(rng), coord(rng)),
                      rgbd::Rgb{static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                                static_cast<std::uint8_t>(byte(rng))});
    const auto bin = rgbd::encode_ply(cloud);
    const auto txt = rgbd::encode_ply_ascii(cloud);
    if (rgbd::decode_ply({bin.begin(), bin.end()}) == cloud && rgbd::decode_ply({txt.begin(), txt.end()}) == cloud)
      ++ply;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto s = synth::random_session(rng, i);
    if (session::parse_session(session::dump_session(s)) == s) ++store;
  }
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ABC0123456789-_,.:;()'\"";
  std::uniform_int_distribution<std::int64_t> ms(0, 10'000'000);
  std::uniform_int_distribution<int> kind(0, 3), len(1, 40), ch(0, static_cast<int>(alphabet.size()) - 1);
  for (int i = 0; i < 1000; ++i) {
    annotations::AnnotationEvent e;
    e.timestamp = std::chrono::milliseconds(ms(rng));
    e.kind = static_cast<annotations::Kind>(kind(rng));
    const int m = len(rng);
    for (int c = 0; c < m; ++c) e.text += alphabet[static_cast<std::size_t>(ch(rng))];
    e.text = std::string(annotations::detail::trim(e.text));
    if (e.text.empty()) e.text = "x";
    if (annotations::parse_annotation_line(annotations::format_annotation_line(e), 1) == e) ++notes;
  }
  std::ostringstream d;
  d << "ply " << ply << "/1000, session " << store << "/1000, annotations " << notes << "/1000";
  return {ply == 1000 && store == 1000 && notes == 1000, d.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  const auto beeps = beep_suite();
  report(1, "beep detection within 50 ms", [&] { return beep_bound(beeps, 0, std::chrono::milliseconds(50), 10.0); });
  report(2, "refined beep within 5 ms", [&] { return beep_bound(beeps, 1, std::chrono::milliseconds(5), 10.0); });
  report(3, "procrustes recovery", procrustes_recovery);
  report(4, "icp recovery", icp_recovery);
  report(5, "alternating object alignment", object_alignment);
  std::vector<RangeCase> fixture;
  try {
    fixture = range_fixture();
  } catch (const std::exception& e) {
    std::printf("range fixture construction failed: %s\n", e.what());
  }
  report(6, "interpolation endpoints and feasibility", [&] { return interpolation_feasibility(fixture); });
  report(7, "nearest-extreme direction", [&] { return nearest_direction(fixture); });
  report(8, "similarity sanity", similarity_sanity);
  report(9, "statistics fidelity", statistics_fidelity);
  report(10, "format round trips", round_trips);
  return failures == 0 ? 0 : 1;
}
