// graspcap: command-line front end for the capture-processing library.
//
// Exit codes:
//   0  success
//   1  usage error (bad flags, violated precondition)
//   2  input rejected (malformed line, no beep, schema violation, ...)
//   3  I/O failure
//   4  numerical failure (degenerate alignment, unresolvable grasp, tie, ...)

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "graspcap/graspcap.hpp"

namespace {

using namespace graspcap;
using Json = nlohmann::json;

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Usage: return 1;
    case ErrorClass::Input: return 2;
    case ErrorClass::Io: return 3;
    case ErrorClass::Numerical: return 4;
  }
  return 1;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoFailure("write to '" + path + "' failed");
}

void emit(bool json, const Json& j, const std::string& text) {
  if (json) std::cout << j.dump(2) << '\n';
  else std::cout << text;
}

std::string fixed(double v, int decimals) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(decimals);
  out << v;
  return out.str();
}

Json detection_json(const timebase::BeepDetection& d) {
  return {{"clock", d.clock},         {"window_index", d.window_index}, {"time_s", d.time_s()},
          {"time_ns", d.time.count()}, {"resolution_ms", d.resolution_ms}, {"degraded", d.degraded}};
}

Json offset_json(const timebase::StreamOffset& o) {
  return {{"from", o.from_clock},   {"to", o.to_clock},           {"offset_s", o.offset_s()},
          {"offset_ns", o.offset.count()}, {"uncertainty_ns", o.uncertainty.count()}};
}

Json registration_json(const align::RegistrationResult& r) {
  return {{"transform", transform_to_json(r.transform)}, {"rms_residual", r.rms_residual},
          {"iterations", r.iterations_used},           {"converged", r.converged},
          {"pairs_used", r.pairs_used},               {"rms_history", r.rms_history}};
}

kinematics::JointState select_joints(const std::string& path, std::optional<double> at_time, std::size_t index) {
  const auto records = kinematics::parse_joint_stream(read_text(path));
  if (records.empty()) throw SchemaViolation("joint stream '" + path + "' has no records");
  if (at_time) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
      if (std::abs(records[i].timestamp_s - *at_time) < std::abs(records[best].timestamp_s - *at_time)) best = i;
    return records[best];
  }
  if (index >= records.size()) throw PreconditionViolation("joint record index out of range");
  return records[index];
}

std::string transform_text(const RigidTransform& t) {
  std::ostringstream out;
  out.precision(9);
  const auto m = t.to_row_major();
  for (int r = 0; r < 3; ++r) {
    out << "  ";
    for (int c = 0; c < 4; ++c) out << (c ? " " : "") << m[static_cast<std::size_t>(4 * r + c)];
    out << '\n';
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graspcap: temporal sync, annotation alignment, RGB-D clouds, registration, grasp ranges, reports"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Machine-readable JSON output");

  std::function<void()> action;

  // ---- sync --------------------------------------------------------------
  struct {
    std::string a, b, clock_a = "a", clock_b = "b", session;
    double window_ms = 100, freq_hz = 5000, band_hz = 100, threshold = timebase::kDefaultSlopeThreshold;
    int levels = 1, shrink = 10, overlap = 2;
    bool hann = false;
  } sync;
  auto* cmd_sync = app.add_subcommand("sync", "Estimate the clock offset between two WAV tracks from their beep marker");
  cmd_sync->add_option("--audio-a", sync.a, "First WAV file (PCM16)")->required();
  cmd_sync->add_option("--audio-b", sync.b, "Second WAV file (PCM16)")->required();
  cmd_sync->add_option("--clock-a", sync.clock_a, "Clock domain of the first file")->capture_default_str();
  cmd_sync->add_option("--clock-b", sync.clock_b, "Clock domain of the second file")->capture_default_str();
  cmd_sync->add_option("--window-ms", sync.window_ms, "Analysis window")->capture_default_str();
  cmd_sync->add_option("--freq-hz", sync.freq_hz, "Beep frequency")->capture_default_str();
  cmd_sync->add_option("--band-hz", sync.band_hz, "Band width around the beep frequency")->capture_default_str();
  cmd_sync->add_option("--threshold", sync.threshold, "Band-power rise that triggers a detection")->capture_default_str();
  cmd_sync->add_option("--refine-levels", sync.levels, "Refinement passes on shrinking windows")->capture_default_str();
  cmd_sync->add_option("--shrink", sync.shrink, "Window shrink factor per refinement level")->capture_default_str();
  cmd_sync->add_option("--overlap", sync.overlap, "Windows per hop (1 = back-to-back)")->capture_default_str();
  cmd_sync->add_flag("--hann", sync.hann, "Apply a Hann window");
  cmd_sync->add_option("--session", sync.session, "Session store to record the offset in");
  cmd_sync->callback([&] {
    action = [&] {
      timebase::BandPowerParams p;
      p.window_ms = sync.window_ms;
      p.target_hz = sync.freq_hz;
      p.bandwidth_hz = sync.band_hz;
      p.overlap = sync.overlap;
      p.hann = sync.hann;
      auto detect = [&](const std::string& path, const std::string& clock) {
        const auto track = timebase::read_wav(path, clock);
        const auto coarse = timebase::detect_beep(timebase::band_power_series(track, p), sync.threshold);
        return sync.levels > 0 ? timebase::refine_beep(track, coarse, sync.levels, sync.shrink, p, sync.threshold)
                               : coarse;
      };
      const auto da = detect(sync.a, sync.clock_a);
      const auto db = detect(sync.b, sync.clock_b);
      const auto off = timebase::compute_offset(da, db);
      if (!sync.session.empty()) {
        auto s = session::load_session(sync.session);
        for (const auto& [clock, path] : {std::pair{sync.clock_a, sync.a}, std::pair{sync.clock_b, sync.b}}) {
          bool known = false;
          for (const auto& st : s.streams) known = known || st.clock == clock;
          if (!known) s.streams.push_back({"audio-" + clock, path, clock, "wav"});
        }
        std::erase_if(s.offsets, [&](const auto& o) { return o.from_clock == off.from_clock && o.to_clock == off.to_clock; });
        s.offsets.push_back(off);
        session::save_session(s, sync.session);
      }
      std::string text = timebase::format_detection(da) + "\n" + timebase::format_detection(db) + "\n";
      text += "offset " + off.from_clock + "->" + off.to_clock + " = " + format_decimal_seconds(off.offset, 6) +
              " s (uncertainty " + format_decimal_seconds(off.uncertainty, 6) + " s)\n";
      emit(json, {{"a", detection_json(da)}, {"b", detection_json(db)}, {"offset", offset_json(off)}}, text);
    };
  });

  // ---- annotate ----------------------------------------------------------
  struct {
    std::string file, session, from, to;
    std::optional<std::string> offset_s;
  } ann;
  auto* cmd_ann = app.add_subcommand("annotate", "List annotations on a video clock as 'MM:SS.mmm KIND message'");
  cmd_ann->add_option("--file", ann.file, "Annotation log (<seconds> <KIND> <message> per line)")->required();
  auto* ann_session = cmd_ann->add_option("--session", ann.session, "Session store holding the offset");
  auto* ann_offset = cmd_ann->add_option("--offset-s", ann.offset_s, "Offset added to every timestamp (decimal seconds)");
  ann_session->excludes(ann_offset);
  cmd_ann->add_option("--from-clock", ann.from, "Offset source clock (with --session)");
  cmd_ann->add_option("--to-clock", ann.to, "Offset target clock (with --session)");
  cmd_ann->callback([&] {
    action = [&] {
      const auto events = annotations::parse_annotations(read_text(ann.file));
      timebase::StreamOffset off = timebase::identity_offset("annotations");
      if (ann.offset_s) {
        const auto d = parse_decimal_seconds(*ann.offset_s);
        if (!d) throw PreconditionViolation("--offset-s must be a decimal number of seconds");
        off = {"annotations", "video", *d, Duration{0}};
      } else if (!ann.session.empty()) {
        const auto s = session::load_session(ann.session);
        std::vector<timebase::StreamOffset> matches;
        for (const auto& o : s.offsets)
          if ((ann.from.empty() || o.from_clock == ann.from) && (ann.to.empty() || o.to_clock == ann.to))
            matches.push_back(o);
        if (matches.size() != 1)
          throw PreconditionViolation("session holds " + std::to_string(matches.size()) +
                                      " matching offsets; name one with --from-clock/--to-clock");
        off = matches.front();
      }
      const auto aligned = annotations::align_annotations(events, off);
      std::string text;
      Json arr = Json::array();
      for (const auto& a : aligned) {
        text += annotations::format_aligned(a) + "\n";
        arr.push_back({{"time", annotations::format_video_time(a.video_time)}, {"t_ns", a.mapped.count()},
                       {"kind", std::string(annotations::to_string(a.event.kind))}, {"text", a.event.text}});
      }
      emit(json, {{"annotations", arr}}, text);
    };
  });

  // ---- cloud -------------------------------------------------------------
  struct {
    std::string color, depth, intrinsics, out;
    bool ascii = false;
  } cl;
  auto* cmd_cloud = app.add_subcommand("cloud", "Back-project a color + depth frame into a colored PLY point cloud");
  cmd_cloud->add_option("--color", cl.color, "Color image (binary PPM, or PNG when built with libpng)")->required();
  cmd_cloud->add_option("--depth", cl.depth, "Depth image (16-bit binary PGM, millimetres; 0 = no reading)")->required();
  cmd_cloud->add_option("--intrinsics", cl.intrinsics, "JSON {fx, fy, cx, cy, width, height}")->required();
  cmd_cloud->add_option("-o,--output", cl.out, "Output PLY path")->required();
  cmd_cloud->add_flag("--ascii", cl.ascii, "Write ASCII PLY instead of binary little endian");
  cmd_cloud->callback([&] {
    action = [&] {
      const auto frame = rgbd::make_frame(rgbd::read_intrinsics(cl.intrinsics), rgbd::read_color(cl.color),
                                          rgbd::read_depth_pgm(cl.depth));
      const auto cloud = rgbd::to_point_cloud(frame);
      write_text(cl.out, cl.ascii ? rgbd::encode_ply_ascii(cloud) : rgbd::encode_ply(cloud));
      emit(json, {{"points", cloud.size()}, {"output", cl.out}},
           "wrote " + std::to_string(cloud.size()) + " points to " + cl.out + "\n");
    };
  });

  // ---- align-arm ---------------------------------------------------------
  struct {
    std::string cloud, joints, chain, init, out;
    std::optional<double> at;
    std::size_t index = 0;
    double density = 20000, margin = 0.05;
    bool no_crop = false;
    align::IcpParams icp;
  } arm;
  auto* cmd_arm = app.add_subcommand("align-arm", "Register a point cloud to the arm model posed by a joint record");
  cmd_arm->add_option("--cloud", arm.cloud, "Input PLY")->required();
  cmd_arm->add_option("--joints", arm.joints, "Joint stream (timestamp + 11 angles per line)")->required();
  cmd_arm->add_option("--chain", arm.chain, "Chain description JSON")->required();
  cmd_arm->add_option("--init", arm.init, "Seed transform JSON {\"m\": [12 row-major], \"scale\": 1}")->required();
  cmd_arm->add_option("--joint-time", arm.at, "Use the joint record nearest this time (s)");
  cmd_arm->add_option("--joint-index", arm.index, "Use this joint record")->capture_default_str();
  cmd_arm->add_option("--density", arm.density, "Arm surface samples per m^2")->capture_default_str();
  cmd_arm->add_option("--margin", arm.margin, "Crop margin around the arm (m)")->capture_default_str();
  cmd_arm->add_flag("--no-crop", arm.no_crop, "Do not crop the cloud to the arm's neighbourhood");
  cmd_arm->add_option("--max-iterations", arm.icp.max_iterations)->capture_default_str();
  cmd_arm->add_option("--trim", arm.icp.trim_fraction, "Fraction of worst pairs dropped")->capture_default_str();
  cmd_arm->add_option("--max-pair-distance", arm.icp.max_pair_distance)->capture_default_str();
  cmd_arm->add_option("-o,--output", arm.out, "Write the cloud->arm transform JSON here");
  cmd_arm->callback([&] {
    action = [&] {
      const auto chain = kinematics::load_chain(arm.chain);
      const auto q = select_joints(arm.joints, arm.at, arm.index);
      const auto samples = kinematics::sample_surface(chain, q, arm.density);
      align::ArmAlignmentOptions opt;
      opt.crop = !arm.no_crop;
      opt.crop_margin = arm.margin;
      const auto r = align::align_cloud_to_arm(rgbd::read_ply(arm.cloud), samples, read_transform_file(arm.init),
                                               arm.icp, opt);
      if (!arm.out.empty()) write_text(arm.out, transform_to_json(r.transform).dump(2) + "\n");
      emit(json, registration_json(r),
           "cloud->arm transform:\n" + transform_text(r.transform) + "rms " + fixed(r.rms_residual, 6) +
               " m after " + std::to_string(r.iterations_used) + " iterations" +
               (r.converged ? "" : " (not converged)") + "\n");
    };
  });

  // ---- align-object ------------------------------------------------------
  struct {
    std::string cloud, chain, joints, object, init, cloud_to_arm, out;
    std::optional<double> at;
    std::size_t index = 0;
    int rounds = 3;
    double density = 20000;
    align::IcpParams icp;
    align::ObjectAlignmentOptions opt;
  } obj;
  auto* cmd_obj = app.add_subcommand("align-object",
                                     "Alternate cloud->hand and object->cloud alignment to estimate the object pose");
  cmd_obj->add_option("--cloud", obj.cloud, "Input PLY")->required();
  cmd_obj->add_option("--chain", obj.chain, "Chain description JSON")->required();
  cmd_obj->add_option("--joints", obj.joints, "Joint stream")->required();
  cmd_obj->add_option("--object", obj.object, "Object description JSON")->required();
  cmd_obj->add_option("--init", obj.init, "Object seed pose in the arm frame (transform JSON)")->required();
  cmd_obj->add_option("--cloud-to-arm", obj.cloud_to_arm, "Transform applied to the cloud first (align-arm output)");
  cmd_obj->add_option("--joint-time", obj.at, "Use the joint record nearest this time (s)");
  cmd_obj->add_option("--joint-index", obj.index, "Use this joint record")->capture_default_str();
  cmd_obj->add_option("--rounds", obj.rounds, "Alternation rounds")->capture_default_str();
  cmd_obj->add_option("--density", obj.density, "Hand surface samples per m^2")->capture_default_str();
  cmd_obj->add_option("--gate", obj.opt.partition_gate, "Ignore points farther than this from hand and object (m)")
      ->capture_default_str();
  cmd_obj->add_option("-o,--output", obj.out, "Write the object pose JSON here");
  cmd_obj->callback([&] {
    action = [&] {
      const auto chain = kinematics::load_chain(obj.chain);
      const auto q = select_joints(obj.joints, obj.at, obj.index);
      const auto hand = kinematics::sample_surface(chain, q, obj.density, /*hand_only=*/true);
      auto cloud = rgbd::read_ply(obj.cloud);
      if (!obj.cloud_to_arm.empty()) cloud = rgbd::transform_cloud(cloud, read_transform_file(obj.cloud_to_arm));
      const auto model = kinematics::load_object(obj.object);
      const auto r = align::alternate_object_alignment(cloud.points, hand, model, read_transform_file(obj.init),
                                                       obj.rounds, obj.icp, obj.opt);
      if (!obj.out.empty()) write_text(obj.out, transform_to_json(r.object_pose).dump(2) + "\n");
      emit(json,
           {{"object_pose", transform_to_json(r.object_pose)},
            {"cloud_to_hand", transform_to_json(r.cloud_to_hand)},
            {"hand_residuals", r.hand_residuals},
            {"object_residuals", r.object_residuals},
            {"hand_points", r.hand_points},
            {"object_points", r.object_points}},
           "object pose:\n" + transform_text(r.object_pose) + "hand rms " + fixed(r.hand_residual, 6) +
               " m, object rms " + fixed(r.object_residual, 6) + " m\n");
    };
  });

  // ---- interpolate -------------------------------------------------------
  struct {
    std::string session, range, chain;
    double t = 0.0;
    std::size_t extreme = 0;
    grasps::ResolveParams params;
  } interp;
  auto* cmd_interp = app.add_subcommand("interpolate", "Generate a grasp between a range's original and an extreme");
  cmd_interp->add_option("--session", interp.session, "Session store")->required();
  cmd_interp->add_option("--range-id", interp.range, "Range id")->required();
  cmd_interp->add_option("--t", interp.t, "Fraction from original (0) to extreme (1)")->required();
  cmd_interp->add_option("--chain", interp.chain, "Chain description JSON")->required();
  cmd_interp->add_option("--extreme", interp.extreme, "Extreme index (0 or 1)")->capture_default_str();
  cmd_interp->add_option("--contact-threshold", interp.params.contact_threshold)->capture_default_str();
  cmd_interp->add_option("--tolerance", interp.params.tolerance)->capture_default_str();
  cmd_interp->callback([&] {
    action = [&] {
      const auto chain = kinematics::load_chain(interp.chain);
      const auto s = session::load_session(interp.session);
      const auto range = s.range(interp.range);
      const auto placed = grasps::object_in_base(range.original, s.object(range.original.object), chain);
      const auto g = grasps::interpolate_range(range, interp.t, placed, chain, interp.params, interp.extreme);
      const Json record = session::grasp_to_json(g);
      std::string text = "grasp " + g.id + " (" + grasps::to_string(g.label) + ", " + grasps::to_string(g.task) + ")\n";
      text += "joints";
      for (double v : g.joints->q) text += " " + fixed(v, 6);
      text += "\nfinger contacts " + std::to_string(g.contacts.finger_count()) + ", max penetration " +
              fixed(g.contacts.max_penetration, 6) + " m\n";
      for (const auto& w : g.warnings) text += "warning: " + w + "\n";
      emit(json, record, text);
    };
  });

  // ---- similarity --------------------------------------------------------
  struct {
    std::string session, object, chain;
    double group_threshold = 0.05;
  } sim;
  auto* cmd_sim = app.add_subcommand("similarity", "Similarity statistics of an object's robot grasps, per task and label");
  cmd_sim->add_option("--session", sim.session, "Session store")->required();
  cmd_sim->add_option("--object", sim.object, "Object name")->required();
  cmd_sim->add_option("--chain", sim.chain, "Chain description JSON")->required();
  cmd_sim->add_option("--group-threshold", sim.group_threshold, "Single-linkage grouping threshold")
      ->capture_default_str();
  cmd_sim->callback([&] {
    action = [&] {
      const auto chain = kinematics::load_chain(sim.chain);
      const auto s = session::load_session(sim.session);
      const auto& model = s.object(sim.object);
      const auto metric = grasps::GraspMetric::of(chain, model);
      Json out = Json::array();
      std::string text;
      for (auto task : {grasps::Task::PickUp, grasps::Task::Natural}) {
        for (auto label : {grasps::Label::Good, grasps::Label::Bad}) {
          std::vector<grasps::Grasp> group;
          for (const auto& g : s.grasps)
            if (g.object == sim.object && g.task == task && g.label == label && g.joints) group.push_back(g);
          if (group.size() < 2) continue;
          const auto r = grasps::similarity(group, model, chain);
          const auto groups = grasps::group_grasps(group, metric, sim.group_threshold);
          out.push_back({{"task", grasps::to_string(task)},
                         {"label", grasps::to_string(label)},
                         {"grasps", group.size()},
                         {"joint_variation", r.joint_variation},
                         {"mean_joint_variation", r.mean_joint_variation},
                         {"contacts", {r.min_contacts, r.max_contacts}},
                         {"palm_spread", r.palm_spread},
                         {"fingertip_spread", r.fingertip_spread},
                         {"groups", groups}});
          text += std::string(grasps::to_string(task)) + "/" + grasps::to_string(label) + ": " +
                  std::to_string(group.size()) + " grasps, joint variation " + fixed(r.mean_joint_variation, 4) +
                  ", contacts " + std::to_string(r.min_contacts) + "-" + std::to_string(r.max_contacts) +
                  ", palm spread " + fixed(r.palm_spread, 4) + ", fingertip spread " + fixed(r.fingertip_spread, 4) +
                  ", " + std::to_string(groups.size()) + " group(s)\n";
        }
      }
      if (out.empty()) throw GroupTooSmall("no task/label group of '" + sim.object + "' has two robot grasps");
      emit(json, {{"object", sim.object}, {"groups", out}}, text);
    };
  });

  // ---- report ------------------------------------------------------------
  std::vector<std::string> report_sessions;
  auto* cmd_report = app.add_subcommand("report", "Grasp count table, per-participant means and range census");
  cmd_report->add_option("--session", report_sessions, "Session store (repeatable)")->required();
  cmd_report->callback([&] {
    action = [&] {
      std::vector<session::SessionRecord> records;
      for (const auto& p : report_sessions) records.push_back(session::load_session(p));
      const auto counts = session::aggregate_counts(records);
      const auto census = session::range_census(records);
      std::string text = session::render_counts(counts);
      text += "\nParticipant | Objects | Good/object | Bad/object\n";
      Json parts = Json::array();
      for (const auto& p : counts.participants) {
        text += p.participant + " | " + std::to_string(p.objects) + " | " + session::format2(p.mean_good()) + " | " +
                session::format2(p.mean_bad()) + "\n";
        parts.push_back({{"participant", p.participant}, {"objects", p.objects}, {"good", p.good}, {"bad", p.bad},
                         {"mean_good", session::round2(p.mean_good())}, {"mean_bad", session::round2(p.mean_bad())}});
      }
      text += "\nRanges: " + std::to_string(census.with_extremes) + " with extremes, " +
              std::to_string(census.without) + " without\n";
      Json objs = Json::array();
      for (const auto& o : counts.objects) objs.push_back({{"object", o.object}, {"good", o.good}, {"bad", o.bad}});
      emit(json,
           {{"objects", objs},
            {"total", {{"good", counts.total_good}, {"bad", counts.total_bad}}},
            {"mean", {{"good", session::round2(counts.mean_good())}, {"bad", session::round2(counts.mean_bad())}}},
            {"participant_object_pairs", counts.pairs},
            {"participants", parts},
            {"census", {{"with_extremes", census.with_extremes}, {"without", census.without}}}},
           text);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const MalformedLine& e) {
    std::cerr << "error[MalformedLine]: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error[" << e.code() << "]: " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
