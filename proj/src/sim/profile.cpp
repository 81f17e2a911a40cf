#include "mmref/sim/profile.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "mmref/core/dataset_io.hpp"

namespace mmref::sim {

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::p1: return "P1";
    case Pattern::p2: return "P2";
    case Pattern::p3: return "P3";
  }
  return "?";
}

nlohmann::json population_to_json(const PopulationConfig& p) {
  return {{"p1_head_mean_s", p.p1_head_mean_s},
          {"p2_head_mean_s", p.p2_head_mean_s},
          {"p2_hand_mean_s", p.p2_hand_mean_s},
          {"p3_head_mean_s", p.p3_head_mean_s},
          {"between_sd_s", p.between_sd_s},
          {"within_sd_s", p.within_sd_s},
          {"accidental_rate_hz", p.accidental_rate_hz},
          {"fixation_noise_m", p.fixation_noise_m},
          {"pointing_usage", p.pointing_usage},
          {"speech_rate_wps", p.speech_rate_wps},
          {"right_handed_prob", p.right_handed_prob},
          {"gain_sd", p.gain_sd},
          {"bias_sd_rad", p.bias_sd_rad},
          {"eye_jitter_m", p.eye_jitter_m}};
}

namespace {

std::array<double, 2> range_from(const nlohmann::json& v, const std::string& key) {
  auto r = v.get<std::array<double, 2>>();
  if (r[0] > r[1]) throw std::invalid_argument("range '" + key + "' has min > max");
  return r;
}

}  // namespace

PopulationConfig population_from_json(const nlohmann::json& j) {
  PopulationConfig p;
  for (const auto& [key, v] : j.items()) {
    if (key == "p1_head_mean_s") p.p1_head_mean_s = v.get<double>();
    else if (key == "p2_head_mean_s") p.p2_head_mean_s = v.get<double>();
    else if (key == "p2_hand_mean_s") p.p2_hand_mean_s = v.get<double>();
    else if (key == "p3_head_mean_s") p.p3_head_mean_s = v.get<double>();
    else if (key == "between_sd_s") p.between_sd_s = v.get<double>();
    else if (key == "within_sd_s") p.within_sd_s = v.get<double>();
    else if (key == "accidental_rate_hz") p.accidental_rate_hz = range_from(v, key);
    else if (key == "fixation_noise_m") p.fixation_noise_m = range_from(v, key);
    else if (key == "pointing_usage") p.pointing_usage = range_from(v, key);
    else if (key == "speech_rate_wps") p.speech_rate_wps = range_from(v, key);
    else if (key == "right_handed_prob") p.right_handed_prob = v.get<double>();
    else if (key == "gain_sd") p.gain_sd = v.get<double>();
    else if (key == "bias_sd_rad") p.bias_sd_rad = v.get<double>();
    else if (key == "eye_jitter_m") p.eye_jitter_m = v.get<double>();
    else throw std::invalid_argument("unknown population key '" + key + "'");
  }
  return p;
}

void ParticipantProfile::check() const {
  for (const auto& t : pattern_offsets_s) {
    Eigen::LLT<temporal::Mat3> llt(t.cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("pattern covariance is not positive definite");
  }
  if (accidental_rate_hz < 0.0) throw std::invalid_argument("accidental_rate_hz must be >= 0");
  if (fixation_spatial_noise_m < 0.0) throw std::invalid_argument("fixation_spatial_noise_m must be >= 0");
  if (pointing_usage_prob < 0.0 || pointing_usage_prob > 1.0)
    throw std::invalid_argument("pointing_usage_prob must lie in [0, 1]");
  if (!(speech_rate_wps > 0.0)) throw std::invalid_argument("speech_rate_wps must be positive");
}

ParticipantProfile draw_profile(const PopulationConfig& pop, int participant_id, std::uint64_t seed,
                                double timing_shift_s, bool noise_free) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  auto uniform = [&](const std::array<double, 2>& r) { return std::uniform_real_distribution<double>(r[0], r[1])(rng); };

  ParticipantProfile p;
  p.participant_id = participant_id;
  p.seed = seed;
  const double within = pop.within_sd_s * pop.within_sd_s;
  const double means[3][3] = {{pop.p1_head_mean_s, pop.p2_hand_mean_s, pop.p2_hand_mean_s},
                              {pop.p2_head_mean_s, pop.p2_hand_mean_s, pop.p2_hand_mean_s},
                              {pop.p3_head_mean_s, pop.p2_hand_mean_s, pop.p2_hand_mean_s}};
  for (int k = 0; k < 3; ++k) {
    auto& t = p.pattern_offsets_s[k];
    for (int a = 0; a < 3; ++a) t.mean[a] = means[k][a] + pop.between_sd_s * z(rng) + timing_shift_s;
    t.cov = temporal::Mat3::Identity() * within;
  }
  p.accidental_rate_hz = uniform(pop.accidental_rate_hz);
  p.fixation_spatial_noise_m = uniform(pop.fixation_noise_m);
  p.pointing_usage_prob = uniform(pop.pointing_usage);
  p.speech_rate_wps = uniform(pop.speech_rate_wps);
  p.right_handed = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < pop.right_handed_prob;

  p.gaze.eye += Vec3(z(rng), z(rng), z(rng)) * pop.eye_jitter_m;
  p.gaze.yaw_gain += pop.gain_sd * z(rng);
  p.gaze.pitch_gain += pop.gain_sd * z(rng);
  p.gaze.yaw_bias = pop.bias_sd_rad * z(rng);
  p.gaze.pitch_bias = pop.bias_sd_rad * z(rng);
  for (HandModel* h : {&p.left_hand, &p.right_hand}) {
    h->pitch_gain += 0.5 * pop.gain_sd * z(rng);
    h->pitch_bias = pop.bias_sd_rad * z(rng);
    h->yaw_bias = pop.bias_sd_rad * z(rng);
  }
  if (noise_free) {
    p.accidental_rate_hz = 0.0;
    p.fixation_spatial_noise_m = 0.0;
  }
  p.check();
  return p;
}

namespace {

nlohmann::json mat_to_json(const temporal::Mat3& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

temporal::Mat3 mat_from_json(const nlohmann::json& j) {
  temporal::Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

}  // namespace

nlohmann::json profile_to_json(const ParticipantProfile& p) {
  nlohmann::json patterns = nlohmann::json::object();
  for (int k = 0; k < 3; ++k)
    patterns[std::string(to_string(static_cast<Pattern>(k)))] = {
        {"mean", core::to_json(p.pattern_offsets_s[k].mean)}, {"cov", mat_to_json(p.pattern_offsets_s[k].cov)}};
  return {{"participant_id", p.participant_id},
          {"seed", p.seed},
          {"pattern_offsets_s", std::move(patterns)},
          {"accidental_rate_hz", p.accidental_rate_hz},
          {"fixation_spatial_noise_m", p.fixation_spatial_noise_m},
          {"pointing_usage_prob", p.pointing_usage_prob},
          {"speech_rate_wps", p.speech_rate_wps},
          {"right_handed", p.right_handed},
          {"gaze", gaze_to_json(p.gaze)},
          {"left_hand", hand_to_json(p.left_hand)},
          {"right_hand", hand_to_json(p.right_hand)}};
}

ParticipantProfile profile_from_json(const nlohmann::json& j) {
  ParticipantProfile p;
  p.participant_id = j.at("participant_id").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  for (int k = 0; k < 3; ++k) {
    const auto& t = j.at("pattern_offsets_s").at(std::string(to_string(static_cast<Pattern>(k))));
    p.pattern_offsets_s[k].mean = core::vec3_from_json(t.at("mean"));
    p.pattern_offsets_s[k].cov = mat_from_json(t.at("cov"));
  }
  p.accidental_rate_hz = j.at("accidental_rate_hz").get<double>();
  p.fixation_spatial_noise_m = j.at("fixation_spatial_noise_m").get<double>();
  p.pointing_usage_prob = j.at("pointing_usage_prob").get<double>();
  p.speech_rate_wps = j.at("speech_rate_wps").get<double>();
  p.right_handed = j.at("right_handed").get<bool>();
  p.gaze = gaze_from_json(j.at("gaze"));
  p.left_hand = hand_from_json(j.at("left_hand"));
  p.right_hand = hand_from_json(j.at("right_hand"));
  p.check();
  return p;
}

}  // namespace mmref::sim
