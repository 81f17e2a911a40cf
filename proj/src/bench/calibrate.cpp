#include "mmref/bench/calibrate.hpp"

#include <fstream>
#include <stdexcept>

#include "mmref/sim/geometry.hpp"

namespace mmref::bench {

using nlohmann::json;

namespace {

constexpr std::array<calibration::InputChannel, 3> kChannels{
    calibration::InputChannel::head, calibration::InputChannel::left, calibration::InputChannel::right};
constexpr std::array<const char*, 3> kChannelNames{"head", "left", "right"};

json error_to_json(const calibration::CalibrationError& e) {
  return {{"mean_m", e.mean_error_m}, {"std_m", e.std_error_m}};
}

calibration::CalibrationError error_from_json(const json& j) {
  return {j.at("mean_m").get<double>(), j.at("std_m").get<double>()};
}

}  // namespace

ParticipantCalibration calibrate_participant(const sim::CalibrationRecording& recording,
                                             const sim::ParticipantProfile& profile,
                                             const calibration::SvrHyper& hyper) {
  ParticipantCalibration out;
  out.participant_id = recording.participant_id;
  for (std::size_t c = 0; c < kChannels.size(); ++c) {
    const auto train = calibration::extract_calibration_samples(recording.frames, recording.schedule, kChannels[c]);
    const auto heldout =
        calibration::extract_calibration_samples(recording.heldout_frames, recording.heldout_schedule, kChannels[c]);
    auto& ch = out.channels[c];
    ch.model = calibration::train_svr(train, hyper);
    ch.heldout = calibration::evaluate_calibration(ch.model, heldout);
    ch.n_train = train.size();
    ch.n_heldout = heldout.size();
    if (kChannels[c] == calibration::InputChannel::head) {
      const core::Vec3 eye = profile.gaze.eye;
      out.naive_head = calibration::evaluate_calibration(
          [&](const core::Vec3& angles) { return sim::naive_projection(angles, eye); }, heldout);
    }
  }
  return out;
}

CalibrationSet calibrate_all(const std::vector<sim::CalibrationRecording>& recordings,
                             const std::map<int, sim::ParticipantProfile>& profiles,
                             const calibration::SvrHyper& hyper) {
  CalibrationSet set;
  set.hyper = hyper;
  for (const auto& rec : recordings) {
    auto it = profiles.find(rec.participant_id);
    if (it == profiles.end())
      throw std::invalid_argument("no profile for calibration recording of participant " +
                                  std::to_string(rec.participant_id));
    set.participants.push_back(calibrate_participant(rec, it->second, hyper));
  }
  return set;
}

json calibration_set_to_json(const CalibrationSet& set) {
  json participants = json::array();
  for (const auto& p : set.participants) {
    json channels = json::object();
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& ch = p.channels[c];
      channels[kChannelNames[c]] = {{"model", calibration::model_to_json(ch.model)},
                                    {"heldout_error", error_to_json(ch.heldout)},
                                    {"n_train", ch.n_train},
                                    {"n_heldout", ch.n_heldout}};
    }
    participants.push_back({{"participant_id", p.participant_id},
                            {"channels", std::move(channels)},
                            {"naive_head_error", error_to_json(p.naive_head)}});
  }
  const auto& h = set.hyper;
  return {{"hyper", {{"C", h.C}, {"gamma", h.gamma}, {"epsilon", h.epsilon}, {"tolerance", h.tolerance},
                     {"max_sweeps", h.max_sweeps}}},
          {"participants", std::move(participants)},
          {"summary", calibration_summary(set)}};
}

CalibrationSet calibration_set_from_json(const json& j) {
  CalibrationSet set;
  const auto& h = j.at("hyper");
  set.hyper.C = h.at("C").get<double>();
  set.hyper.gamma = h.at("gamma").get<double>();
  set.hyper.epsilon = h.at("epsilon").get<double>();
  set.hyper.tolerance = h.at("tolerance").get<double>();
  set.hyper.max_sweeps = h.at("max_sweeps").get<int>();
  for (const auto& pj : j.at("participants")) {
    ParticipantCalibration p;
    p.participant_id = pj.at("participant_id").get<int>();
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& cj = pj.at("channels").at(kChannelNames[c]);
      auto& ch = p.channels[c];
      ch.model = calibration::model_from_json(cj.at("model"));
      ch.heldout = error_from_json(cj.at("heldout_error"));
      ch.n_train = cj.at("n_train").get<std::size_t>();
      ch.n_heldout = cj.at("n_heldout").get<std::size_t>();
    }
    p.naive_head = error_from_json(pj.at("naive_head_error"));
    set.participants.push_back(std::move(p));
  }
  return set;
}

json calibration_summary(const CalibrationSet& set) {
  json out = json::object();
  const double n = static_cast<double>(set.participants.size());
  if (n == 0) return out;
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (const auto& p : set.participants) sum += p.channels[c].heldout.mean_error_m;
    out[std::string(kChannelNames[c]) + "_mean_error_m"] = sum / n;
  }
  double naive = 0.0;
  for (const auto& p : set.participants) naive += p.naive_head.mean_error_m;
  out["naive_head_mean_error_m"] = naive / n;
  out["participants"] = set.participants.size();
  return out;
}

observation::SensorMaps maps_from(const ParticipantCalibration& p) {
  return {[m = p.channels[0].model](const core::Vec3& x) { return m.predict(x); },
          [m = p.channels[1].model](const core::Vec3& x) { return m.predict(x); },
          [m = p.channels[2].model](const core::Vec3& x) { return m.predict(x); }};
}

std::map<int, sim::ParticipantProfile> profiles_from_sessions(const std::vector<core::Session>& sessions) {
  std::map<int, sim::ParticipantProfile> out;
  for (const auto& s : sessions) {
    if (!s.profile_meta) continue;
    out[s.participant_id] = sim::profile_from_json(*s.profile_meta);
  }
  return out;
}

std::map<int, observation::SensorMaps> resolve_maps(const std::vector<core::Session>& sessions,
                                                    const CalibrationSet* set, bool ground_truth) {
  std::map<int, observation::SensorMaps> out;
  if (ground_truth) {
    const auto profiles = profiles_from_sessions(sessions);
    for (const auto& s : sessions) {
      auto it = profiles.find(s.participant_id);
      if (it == profiles.end())
        throw std::invalid_argument("participant " + std::to_string(s.participant_id) +
                                    " has no simulator profile; ground-truth maps unavailable");
      out[s.participant_id] = sim::ground_truth_maps(it->second);
    }
    return out;
  }
  if (!set) throw std::invalid_argument("no calibration models given");
  std::map<int, const ParticipantCalibration*> by_id;
  for (const auto& p : set->participants) by_id[p.participant_id] = &p;
  for (const auto& s : sessions) {
    auto it = by_id.find(s.participant_id);
    if (it == by_id.end())
      throw std::invalid_argument("no calibration for participant " + std::to_string(s.participant_id));
    out[s.participant_id] = maps_from(*it->second);
  }
  return out;
}

void save_calibration(const CalibrationSet& set, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << calibration_set_to_json(set).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CalibrationSet load_calibration_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  try {
    return calibration_set_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace mmref::bench
