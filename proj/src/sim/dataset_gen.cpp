#include "mmref/sim/dataset_gen.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include "mmref/core/dataset_io.hpp"
#include "mmref/core/validate.hpp"

namespace mmref::sim {

using nlohmann::json;

namespace {

enum Stream : std::uint64_t { kProfile = 1, kScene, kTarget, kRequest, kCalibration, kHeldout };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

void ScenarioConfig::check() const {
  if (n_participants < 1) throw std::invalid_argument("n_participants must be >= 1");
  if (requests_per_participant < 1) throw std::invalid_argument("requests_per_participant must be >= 1");
  if (scene.n_objects < 2) throw std::invalid_argument("n_objects must be >= 2");
  if (calibration_noise_m < 0.0) throw std::invalid_argument("calibration_noise_m must be >= 0");
  requests.check();
}

json scenario_to_json(const ScenarioConfig& c) {
  json j = request_gen_to_json(c.requests);
  j["n_participants"] = c.n_participants;
  j["requests_per_participant"] = c.requests_per_participant;
  j["n_objects"] = c.scene.n_objects;
  j["ambiguity"] = c.scene.ambiguity;
  j["min_separation_m"] = c.scene.min_separation_m;
  j["timing_shift_s"] = c.timing_shift_s;
  j["noise_free"] = c.noise_free;
  j["calibration_noise_m"] = c.calibration_noise_m;
  j["population"] = population_to_json(c.population);
  return j;
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  json rest = json::object();
  for (const auto& [key, v] : j.items()) {
    if (key == "n_participants") c.n_participants = v.get<int>();
    else if (key == "requests_per_participant") c.requests_per_participant = v.get<int>();
    else if (key == "n_objects") c.scene.n_objects = v.get<int>();
    else if (key == "ambiguity") c.scene.ambiguity = v.get<bool>();
    else if (key == "min_separation_m") c.scene.min_separation_m = v.get<double>();
    else if (key == "timing_shift_s") c.timing_shift_s = v.get<double>();
    else if (key == "noise_free") c.noise_free = v.get<bool>();
    else if (key == "calibration_noise_m") c.calibration_noise_m = v.get<double>();
    else if (key == "population") c.population = population_from_json(v);
    else rest[key] = v;
  }
  c.requests = request_gen_from_json(rest);
  c.check();
  return c;
}

json calibration_recording_to_json(const CalibrationRecording& r) {
  json frames = json::array(), heldout = json::array();
  for (const auto& f : r.frames) frames.push_back(core::frame_to_json(f));
  for (const auto& f : r.heldout_frames) heldout.push_back(core::frame_to_json(f));
  return {{"participant_id", r.participant_id},
          {"schedule", calibration::schedule_to_json(r.schedule)},
          {"frames", std::move(frames)},
          {"heldout_schedule", calibration::schedule_to_json(r.heldout_schedule)},
          {"heldout_frames", std::move(heldout)}};
}

CalibrationRecording calibration_recording_from_json(const json& j) {
  CalibrationRecording r;
  r.participant_id = j.at("participant_id").get<int>();
  r.schedule = calibration::schedule_from_json(j.at("schedule"));
  for (const auto& f : j.at("frames")) r.frames.push_back(core::frame_from_json(f));
  r.heldout_schedule = calibration::schedule_from_json(j.at("heldout_schedule"));
  for (const auto& f : j.at("heldout_frames")) r.heldout_frames.push_back(core::frame_from_json(f));
  return r;
}

std::vector<Vec2> calibration_points() {
  std::vector<Vec2> pts;
  for (double y : {-0.2, 0.0, 0.2})
    for (double x : {-0.3, -0.15, 0.0, 0.15, 0.3})
      if (x != 0.0 || y != 0.0) pts.emplace_back(x, y);
  return pts;
}

std::vector<Vec2> heldout_points() {
  std::vector<Vec2> pts;
  for (double y : {-0.1, 0.1})
    for (double x : {-0.225, -0.075, 0.075, 0.225}) pts.emplace_back(x, y);
  return pts;
}

std::pair<std::vector<calibration::ScheduleEntry>, std::vector<core::ObservationFrame>> record_calibration(
    const ParticipantProfile& profile, const std::vector<Vec2>& points, double noise_m, double rate_hz,
    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  constexpr double kSweepMs = 300.0;

  std::vector<calibration::ScheduleEntry> schedule;
  for (std::size_t i = 0; i < points.size(); ++i)
    schedule.push_back({points[i], static_cast<std::int64_t>(i) * kDwellMs,
                        static_cast<std::int64_t>(i + 1) * kDwellMs});

  std::vector<core::ObservationFrame> frames;
  const std::int64_t total = static_cast<std::int64_t>(points.size()) * kDwellMs;
  for (long k = 0;; ++k) {
    const std::int64_t t = frame_time_ms(k, rate_hz);
    if (t >= total) break;
    const std::size_t i = static_cast<std::size_t>(t / kDwellMs);
    const double into = static_cast<double>(t - schedule[i].start_ms);
    const Vec2 from = i > 0 ? points[i - 1] : Vec2(0.0, -0.15);
    Vec2 p = into < kSweepMs ? Vec2(from + (points[i] - from) * (into / kSweepMs)) : points[i];
    p += Vec2(z(rng), z(rng)) * noise_m;

    core::ObservationFrame f;
    f.timestamp_ms = t;
    f.head = profile.gaze.head_angles_for(p);
    f.head_fixation = into >= kSweepMs;
    f.left_dir = profile.left_hand.direction_for(p);
    f.right_dir = profile.right_hand.direction_for(p);
    f.left_pointing = f.right_pointing = true;
    frames.push_back(std::move(f));
  }
  return {std::move(schedule), std::move(frames)};
}

observation::SensorMaps ground_truth_maps(const ParticipantProfile& profile) {
  return {[g = profile.gaze](const core::Vec3& a) { return g.table_point(a); },
          [h = profile.left_hand](const core::Vec3& d) { return h.table_point(d); },
          [h = profile.right_hand](const core::Vec3& d) { return h.table_point(d); }};
}

json request_truth_to_json(const RequestTruth& t) {
  json patterns = json::array(), events = json::array();
  for (auto p : t.patterns) patterns.push_back(to_string(p));
  for (const auto& e : t.events) events.push_back(ground_truth_event_to_json(e));
  return {{"participant_id", t.participant_id},
          {"request_id", t.request_id},
          {"target_id", t.target_id},
          {"patterns", std::move(patterns)},
          {"events", std::move(events)}};
}

Dataset generate_dataset(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.check();
  Dataset d;
  d.seed = seed;
  d.config = cfg;
  RequestGenConfig req_cfg = cfg.requests;
  if (cfg.noise_free) req_cfg.word_revision_rate = 0.0;

  for (int p = 0; p < cfg.n_participants; ++p) {
    const auto up = static_cast<std::uint64_t>(p);
    ParticipantProfile profile =
        draw_profile(cfg.population, p, derive_seed(seed, kProfile, up), cfg.timing_shift_s, cfg.noise_free);

    core::Session session;
    session.participant_id = p;
    session.scene = generate_scene(cfg.scene, derive_seed(seed, kScene, up));
    session.profile_meta = profile_to_json(profile);

    std::mt19937_64 target_rng(derive_seed(seed, kTarget, up));
    std::uniform_int_distribution<std::size_t> pick(0, session.scene.size() - 1);
    for (int r = 0; r < cfg.requests_per_participant; ++r) {
      const int target = session.scene.objects[pick(target_rng)].id;
      const auto idx = up * 100000u + static_cast<std::uint64_t>(r);
      GeneratedRequest g = generate_request(profile, session.scene, target, r, req_cfg,
                                            derive_seed(seed, kRequest, idx));
      d.truth.push_back({p, r, target, g.patterns, std::move(g.events)});
      session.requests.push_back(std::move(g.request));
    }
    const auto violations = core::validate_session(session);
    if (!violations.empty())
      throw std::logic_error("simulator produced an invalid session: " + violations.front().describe());

    const double cal_noise = cfg.noise_free ? 0.0 : cfg.calibration_noise_m;
    CalibrationRecording rec;
    rec.participant_id = p;
    std::tie(rec.schedule, rec.frames) = record_calibration(profile, calibration_points(), cal_noise,
                                                            req_cfg.frame_rate_hz, derive_seed(seed, kCalibration, up));
    std::tie(rec.heldout_schedule, rec.heldout_frames) = record_calibration(
        profile, heldout_points(), cal_noise, req_cfg.frame_rate_hz, derive_seed(seed, kHeldout, up));

    d.profiles.push_back(std::move(profile));
    d.sessions.push_back(std::move(session));
    d.calibration.push_back(std::move(rec));
  }
  return d;
}

json dataset_manifest(const Dataset& d) {
  json participants = json::array();
  std::size_t n_requests = 0, n_frames = 0;
  for (std::size_t i = 0; i < d.sessions.size(); ++i) {
    const auto& s = d.sessions[i];
    std::size_t frames = 0;
    for (const auto& r : s.requests) frames += r.frames.size();
    n_requests += s.requests.size();
    n_frames += frames;
    participants.push_back({{"participant_id", s.participant_id},
                            {"profile_seed", d.profiles[i].seed},
                            {"requests", s.requests.size()},
                            {"frames", frames}});
  }
  return {{"seed", d.seed},
          {"config", scenario_to_json(d.config)},
          {"participants", std::move(participants)},
          {"n_sessions", d.sessions.size()},
          {"n_requests", n_requests},
          {"n_frames", n_frames},
          {"files", {"dataset.jsonl", "ground_truth.jsonl", "calibration.jsonl"}}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

}  // namespace

json write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  core::save_sessions(d.sessions, dir / "dataset.jsonl");
  {
    auto out = open_out(dir / "ground_truth.jsonl");
    for (const auto& t : d.truth) core::write_json_line(out, request_truth_to_json(t));
  }
  {
    auto out = open_out(dir / "calibration.jsonl");
    for (const auto& c : d.calibration) core::write_json_line(out, calibration_recording_to_json(c));
  }
  json manifest = dataset_manifest(d);
  auto out = open_out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  return manifest;
}

std::vector<CalibrationRecording> load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::vector<CalibrationRecording> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(calibration_recording_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw core::DatasetError(n, e.what());
    }
  }
  return out;
}

}  // namespace mmref::sim
