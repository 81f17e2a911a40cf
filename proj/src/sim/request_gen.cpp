#include "mmref/sim/request_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace mmref::sim {

using temporal::Modality;

namespace {

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] >= 0.0 && r[0] <= r[1])) throw std::invalid_argument(std::string("invalid range '") + name + "'");
}

}  // namespace

void RequestGenConfig::check() const {
  if (!(frame_rate_hz > 0.0)) throw std::invalid_argument("frame_rate_hz must be positive");
  double sum = 0.0;
  for (double w : pattern_mix) {
    if (w < 0.0) throw std::invalid_argument("pattern_mix weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("pattern_mix weights must sum to 1");
  if (word_revision_rate < 0.0 || word_revision_rate > 1.0)
    throw std::invalid_argument("word_revision_rate must lie in [0, 1]");
  check_range(onset_s, "onset_s");
  check_range(trailing_s, "trailing_s");
  check_range(intentional_fixation_s, "intentional_fixation_s");
  check_range(accidental_fixation_s, "accidental_fixation_s");
  check_range(pointing_s, "pointing_s");
  if (max_clauses < 1) throw std::invalid_argument("max_clauses must be >= 1");
}

nlohmann::json request_gen_to_json(const RequestGenConfig& c) {
  return {{"frame_rate_hz", c.frame_rate_hz},
          {"pattern_mix", c.pattern_mix},
          {"word_revision_rate", c.word_revision_rate},
          {"onset_s", c.onset_s},
          {"trailing_s", c.trailing_s},
          {"intentional_fixation_s", c.intentional_fixation_s},
          {"accidental_fixation_s", c.accidental_fixation_s},
          {"pointing_s", c.pointing_s},
          {"max_clauses", c.max_clauses}};
}

RequestGenConfig request_gen_from_json(const nlohmann::json& j) {
  RequestGenConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "frame_rate_hz") c.frame_rate_hz = v.get<double>();
    else if (key == "pattern_mix") c.pattern_mix = v.get<std::array<double, 3>>();
    else if (key == "word_revision_rate") c.word_revision_rate = v.get<double>();
    else if (key == "onset_s") c.onset_s = v.get<std::array<double, 2>>();
    else if (key == "trailing_s") c.trailing_s = v.get<std::array<double, 2>>();
    else if (key == "intentional_fixation_s") c.intentional_fixation_s = v.get<std::array<double, 2>>();
    else if (key == "accidental_fixation_s") c.accidental_fixation_s = v.get<std::array<double, 2>>();
    else if (key == "pointing_s") c.pointing_s = v.get<std::array<double, 2>>();
    else if (key == "max_clauses") c.max_clauses = v.get<int>();
    else throw std::invalid_argument("unknown scenario key '" + key + "'");
  }
  c.check();
  return c;
}

nlohmann::json ground_truth_event_to_json(const GroundTruthEvent& e) {
  nlohmann::json j = {{"modality", temporal::to_string(e.modality)},
                      {"onset_ms", e.onset_ms},
                      {"intentional", e.intentional}};
  if (e.modality != Modality::speech) j["end_ms"] = e.end_ms;
  if (e.object_id) j["object_id"] = *e.object_id;
  if (e.pattern) j["pattern"] = to_string(*e.pattern);
  if (e.modality == Modality::speech) j["word"] = e.word;
  return j;
}

std::int64_t frame_time_ms(long k, double rate_hz) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(k) * 1000.0 / rate_hz + 1e-9));
}

namespace {

struct Interval {
  double on = 0.0, off = 0.0;
  int object_id = 0;
  Vec2 point = Vec2::Zero();  // where the participant actually looks / points
  bool intentional = false;
  std::optional<Pattern> pattern;
};

struct Word {
  std::string text;
  double arrival = 0.0;
  std::optional<std::string> misheard;  // shown first, then corrected
  double corrected = 0.0;
};

std::string attribute_word(const core::SceneObject& obj, int which) {
  switch (which) {
    case 0: return std::string(core::to_string(obj.color));
    case 1: return std::string(core::to_string(obj.size));
    default: return std::string(core::to_string(obj.shape));
  }
}

// A recognizer slip: same length, last letter replaced, never a keyword.
std::string mishear(const std::string& w) {
  std::string out = w;
  out.back() = out.back() == 'q' ? 'z' : 'q';
  return out;
}

bool overlaps(const std::vector<Interval>& xs, double on, double off, double gap) {
  for (const auto& x : xs)
    if (on < x.off + gap && x.on < off + gap) return true;
  return false;
}

}  // namespace

GeneratedRequest generate_request(const ParticipantProfile& profile, const core::Scene& scene, int target_id,
                                  int request_id, const RequestGenConfig& cfg, std::uint64_t seed) {
  cfg.check();
  const auto target_index = scene.index_of(target_id);
  if (!target_index) throw std::invalid_argument("target " + std::to_string(target_id) + " is not in the scene");
  const core::SceneObject& target = scene.objects[*target_index];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  auto uniform = [&](const std::array<double, 2>& r) { return r[0] + (r[1] - r[0]) * unit(rng); };
  auto noise2 = [&](double sd) { return Vec2(sd * z(rng), sd * z(rng)); };
  auto draw_offset = [&](Pattern p) {
    const auto& t = profile.timing(p);
    Eigen::LLT<temporal::Mat3> llt(t.cov);
    const temporal::Vec3 e(z(rng), z(rng), z(rng));
    return temporal::Vec3(t.mean + llt.matrixL() * e);
  };

  GeneratedRequest out;
  out.request.request_id = request_id;
  out.request.target_id = target_id;

  // Clause patterns; P1 can only open the request.
  const int n_clauses = std::min(cfg.max_clauses, 1 + static_cast<int>(unit(rng) * cfg.max_clauses));
  std::discrete_distribution<int> pick(cfg.pattern_mix.begin(), cfg.pattern_mix.end());
  std::discrete_distribution<int> pick_later({0.0, cfg.pattern_mix[1], cfg.pattern_mix[2]});
  const bool later_possible = cfg.pattern_mix[1] + cfg.pattern_mix[2] > 0.0;
  for (int c = 0; c < n_clauses; ++c) {
    if (c > 0 && !later_possible) break;
    out.patterns.push_back(static_cast<Pattern>(c == 0 ? pick(rng) : pick_later(rng)));
  }

  // Spoken request.
  std::vector<Word> words;
  const double onset = uniform(cfg.onset_s);
  double t = onset;
  auto say = [&](const std::string& w) {
    Word word{w, t, std::nullopt, t};
    if (unit(rng) < cfg.word_revision_rate) {
      word.misheard = mishear(w);
      word.corrected = t + 0.05 + 0.1 * unit(rng);
    }
    words.push_back(word);
    t += (0.8 + 0.4 * unit(rng)) / profile.speech_rate_wps;
    return words.size() - 1;
  };
  for (const char* w : {"please", "give", "me"}) say(w);

  std::vector<Interval> fixations, left, right;
  auto add_intentional_fixation = [&](double at, Pattern p) {
    Interval iv;
    iv.on = std::max(0.05, at);
    iv.off = iv.on + uniform(cfg.intentional_fixation_s);
    iv.object_id = target_id;
    iv.point = target.position + noise2(profile.fixation_spatial_noise_m);
    iv.intentional = true;
    iv.pattern = p;
    // A later clause re-fixating while the previous fixation lasts extends it.
    for (auto& f : fixations)
      if (iv.on < f.off + 0.05 && f.on < iv.off + 0.05) {
        f.off = std::max(f.off, iv.off);
        f.on = std::min(f.on, iv.on);
        return;
      }
    fixations.push_back(iv);
  };

  for (std::size_t c = 0; c < out.patterns.size(); ++c) {
    const Pattern p = out.patterns[c];
    const temporal::Vec3 off = draw_offset(p);
    if (p == Pattern::p1) {
      add_intentional_fixation(onset - off[0], p);
      say("the");
      say("one");
      continue;
    }
    if (c > 0) say("and");
    if (p == Pattern::p2) {
      const std::size_t k = say(unit(rng) < 0.5 ? "this" : "that");
      say("one");
      const double anchor = words[k].corrected;
      add_intentional_fixation(anchor - off[0], p);
      if (unit(rng) < profile.pointing_usage_prob) {
        const bool use_right = profile.right_handed;
        Interval iv;
        iv.on = std::max(0.05, anchor - off[use_right ? 2 : 1]);
        iv.off = iv.on + uniform(cfg.pointing_s);
        iv.object_id = target_id;
        iv.point = target.position + noise2(0.5 * profile.fixation_spatial_noise_m);
        iv.intentional = true;
        iv.pattern = p;
        (use_right ? right : left).push_back(iv);
      }
    } else {
      say("the");
      const std::size_t k = say(attribute_word(target, static_cast<int>(unit(rng) * 3.0)));
      say(unit(rng) < 0.5 ? "one" : "block");
      add_intentional_fixation(words[k].corrected - off[0], p);
    }
  }
  const double speech_end = t;

  double end = speech_end;
  for (const auto& f : fixations) end = std::max(end, f.off);
  for (const auto* hand : {&left, &right})
    for (const auto& pt : *hand) end = std::max(end, pt.off);
  end += uniform(cfg.trailing_s);

  // Accidental fixations: Poisson arrivals on other objects, kept only where
  // the head is free.
  if (profile.accidental_rate_hz > 0.0 && scene.size() > 1) {
    std::exponential_distribution<double> gap(profile.accidental_rate_hz);
    std::uniform_int_distribution<std::size_t> other(0, scene.size() - 2);
    for (double s = gap(rng); s < end; s += gap(rng)) {
      std::size_t idx = other(rng);
      if (idx >= *target_index) ++idx;
      const double d = uniform(cfg.accidental_fixation_s);
      const Vec2 point = scene.objects[idx].position + noise2(profile.fixation_spatial_noise_m);
      if (s + d >= end || overlaps(fixations, s, s + d, 0.15)) continue;
      fixations.push_back({s, s + d, scene.objects[idx].id, point, false, std::nullopt});
    }
  }
  std::sort(fixations.begin(), fixations.end(), [](const Interval& a, const Interval& b) { return a.on < b.on; });

  // Frames.
  const Vec2 rest(0.0, -0.15);
  const long n_frames = static_cast<long>(std::floor(end * cfg.frame_rate_hz)) + 1;
  const double jitter = 0.3 * profile.fixation_spatial_noise_m;
  out.request.frames.reserve(n_frames);
  for (long k = 0; k < n_frames; ++k) {
    core::ObservationFrame f;
    f.timestamp_ms = frame_time_ms(k, cfg.frame_rate_hz);
    const double ts = f.timestamp_ms / 1000.0;

    // Head: on a fixation, or sweeping between the previous and next one.
    const Interval* prev = nullptr;
    const Interval* next = nullptr;
    for (const auto& fx : fixations) {
      if (fx.on <= ts && ts < fx.off) {
        prev = next = &fx;
        break;
      }
      if (fx.off <= ts) prev = &fx;
      else if (!next) next = &fx;
    }
    Vec2 gaze;
    if (prev && prev == next) {
      gaze = prev->point + noise2(jitter);
      f.head_fixation = true;
    } else {
      const Vec2 a = prev ? prev->point : rest;
      const Vec2 b = next ? next->point : rest;
      const double t0 = prev ? prev->off : 0.0;
      const double t1 = next ? next->on : end;
      const double u = t1 > t0 ? std::clamp((ts - t0) / (t1 - t0), 0.0, 1.0) : 1.0;
      gaze = a + u * (b - a);
    }
    f.head = profile.gaze.head_angles_for(gaze);

    for (const auto& pt : left)
      if (pt.on <= ts && ts < pt.off) {
        f.left_pointing = true;
        f.left_dir = profile.left_hand.direction_for(pt.point + noise2(jitter));
      }
    for (const auto& pt : right)
      if (pt.on <= ts && ts < pt.off) {
        f.right_pointing = true;
        f.right_dir = profile.right_hand.direction_for(pt.point + noise2(jitter));
      }

    std::string text;
    for (const auto& w : words) {
      if (w.arrival > ts) break;
      const std::string& shown = (w.misheard && ts < w.corrected) ? *w.misheard : w.text;
      if (!text.empty()) text += ' ';
      text += shown;
    }
    f.speech_text = std::move(text);
    out.request.frames.push_back(std::move(f));
  }

  // Ground truth in onset order, times rounded up to the first frame that
  // shows them.
  auto first_frame_at = [&](double sec) {
    const long k = static_cast<long>(std::ceil(sec * cfg.frame_rate_hz - 1e-9));
    long kk = std::max(0L, k);
    while (kk > 0 && frame_time_ms(kk - 1, cfg.frame_rate_hz) >= sec * 1000.0) --kk;
    while (frame_time_ms(kk, cfg.frame_rate_hz) < sec * 1000.0 - 1e-6) ++kk;
    return frame_time_ms(kk, cfg.frame_rate_hz);
  };
  auto add_spatial = [&](Modality m, const Interval& iv) {
    out.events.push_back({m, first_frame_at(iv.on), first_frame_at(iv.off), iv.object_id, iv.intentional,
                          iv.pattern, ""});
  };
  for (const auto& fx : fixations) add_spatial(Modality::head, fx);
  for (const auto& pt : left) add_spatial(Modality::left, pt);
  for (const auto& pt : right) add_spatial(Modality::right, pt);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    out.events.push_back({Modality::speech, first_frame_at(w.misheard ? w.corrected : w.arrival), 0, std::nullopt,
                          false, std::nullopt, w.text});
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const GroundTruthEvent& a, const GroundTruthEvent& b) { return a.onset_ms < b.onset_ms; });
  return out;
}

}  // namespace mmref::sim
