#include "mmref/temporal/events.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "mmref/core/dataset_io.hpp"
#include "mmref/observation/speech.hpp"

namespace mmref::temporal {

using observation::SpeechKind;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::head: return "head";
    case Modality::left: return "left";
    case Modality::right: return "right";
    case Modality::speech: return "speech";
  }
  return "?";
}

std::string_view to_string(DeltaLabel l) { return l == DeltaLabel::intentional ? "intentional" : "accidental"; }

bool EventRecord::is_anchor() const {
  return modality == Modality::speech && kind &&
         (*kind == SpeechKind::request_onset || *kind == SpeechKind::deictic || *kind == SpeechKind::attribute);
}

std::optional<EventRecord> spatial_onset(Modality m, const core::ObservationFrame& frame,
                                         const core::ObservationFrame* previous, const core::Scene& scene,
                                         const observation::SensorMaps& maps) {
  bool now = false, before = false;
  const core::Vec3* input = nullptr;
  const observation::TableMapping* f = nullptr;
  switch (m) {
    case Modality::head:
      now = frame.head_fixation;
      before = previous && previous->head_fixation;
      input = &frame.head;
      f = &maps.head;
      break;
    case Modality::left:
      now = frame.left_pointing && frame.left_dir.has_value();
      before = previous && previous->left_pointing && previous->left_dir.has_value();
      input = frame.left_dir ? &*frame.left_dir : nullptr;
      f = &maps.left;
      break;
    case Modality::right:
      now = frame.right_pointing && frame.right_dir.has_value();
      before = previous && previous->right_pointing && previous->right_dir.has_value();
      input = frame.right_dir ? &*frame.right_dir : nullptr;
      f = &maps.right;
      break;
    case Modality::speech:
      return std::nullopt;
  }
  if (!now || before) return std::nullopt;
  EventRecord e;
  e.modality = m;
  e.time_ms = frame.timestamp_ms;
  e.focus_point = (*f)(*input);
  e.focus_object = scene.objects[observation::nearest_object(*e.focus_point, scene)].id;
  return e;
}

std::vector<EventRecord> speech_events(std::string_view previous, const core::ObservationFrame& frame,
                                       const observation::KeywordLexicon& lexicon) {
  std::vector<EventRecord> out;
  const auto diff = observation::diff_speech(previous, frame.speech_text);
  if (diff.request_onset) {
    EventRecord e;
    e.modality = Modality::speech;
    e.time_ms = frame.timestamp_ms;
    e.kind = SpeechKind::request_onset;
    out.push_back(std::move(e));
  }
  for (const auto& w : diff.new_words) {
    EventRecord e;
    e.modality = Modality::speech;
    e.time_ms = frame.timestamp_ms;
    e.kind = observation::classify_word(w, lexicon);
    e.word = w;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EventRecord> extract_events(const core::Request& request, const core::Scene& scene,
                                        const observation::SensorMaps& maps,
                                        const observation::KeywordLexicon& lexicon) {
  std::vector<EventRecord> events;
  const core::ObservationFrame* prev = nullptr;
  for (const auto& frame : request.frames) {
    for (Modality m : {Modality::head, Modality::left, Modality::right})
      if (auto e = spatial_onset(m, frame, prev, scene, maps)) events.push_back(std::move(*e));
    auto words = speech_events(prev ? std::string_view(prev->speech_text) : std::string_view(), frame, lexicon);
    events.insert(events.end(), words.begin(), words.end());
    prev = &frame;
  }
  return events;
}

std::vector<EventRecord> label_intentional(std::vector<EventRecord> events, const core::Scene& scene, int target_id) {
  for (auto& e : events) {
    if (!e.is_spatial() || !e.focus_point) continue;
    e.intentional = scene.objects[observation::nearest_object(*e.focus_point, scene)].id == target_id;
  }
  return events;
}

namespace {

// Index of the entry of `times` closest to t; earlier entry wins ties.
std::optional<std::size_t> nearest_index(const std::vector<std::int64_t>& times, std::int64_t t) {
  if (times.empty()) return std::nullopt;
  std::size_t best = 0;
  std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::int64_t d = std::llabs(times[i] - t);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

void set_axis(DeltaSample& s, int axis, double dt) {
  s.present[axis] = true;
  if (axis == 0) s.dt_head_s = dt;
  else if (axis == 1) s.dt_left_s = dt;
  else s.dt_right_s = dt;
}

}  // namespace

DeltaSample delta_for_anchor(std::int64_t anchor_ms, const std::array<std::vector<std::int64_t>, 3>& spatial_times,
                             std::optional<std::pair<Modality, std::int64_t>> forced) {
  DeltaSample s;
  s.anchor_ms = anchor_ms;
  for (int axis = 0; axis < 3; ++axis) {
    if (forced && static_cast<int>(forced->first) == axis) {
      set_axis(s, axis, (anchor_ms - forced->second) / 1000.0);
      continue;
    }
    if (auto i = nearest_index(spatial_times[axis], anchor_ms))
      set_axis(s, axis, (anchor_ms - spatial_times[axis][*i]) / 1000.0);
  }
  return s;
}

std::vector<DeltaSample> compute_deltas(const std::vector<EventRecord>& events) {
  std::array<std::vector<std::int64_t>, 3> times;
  std::array<std::vector<const EventRecord*>, 3> refs;
  for (const auto& e : events) {
    if (!e.is_spatial()) continue;
    times[static_cast<int>(e.modality)].push_back(e.time_ms);
    refs[static_cast<int>(e.modality)].push_back(&e);
  }
  std::vector<DeltaSample> out;
  for (const auto& e : events) {
    if (!e.is_anchor()) continue;
    DeltaSample s;
    s.anchor_ms = e.time_ms;
    int votes_for = 0, votes_against = 0;
    for (int axis = 0; axis < 3; ++axis) {
      auto i = nearest_index(times[axis], e.time_ms);
      if (!i) continue;
      set_axis(s, axis, (e.time_ms - times[axis][*i]) / 1000.0);
      if (refs[axis][*i]->intentional.value_or(false)) ++votes_for;
      else ++votes_against;
    }
    if (s.present_count() == 0) continue;
    s.label = votes_for > votes_against ? DeltaLabel::intentional : DeltaLabel::accidental;
    out.push_back(s);
  }
  return out;
}

std::vector<DeltaSample> compute_event_deltas(const std::vector<EventRecord>& events) {
  std::array<std::vector<std::int64_t>, 3> times;
  std::vector<std::int64_t> anchors;
  for (const auto& e : events) {
    if (e.is_spatial()) times[static_cast<int>(e.modality)].push_back(e.time_ms);
    else if (e.is_anchor()) anchors.push_back(e.time_ms);
  }
  std::vector<DeltaSample> out;
  if (anchors.empty()) return out;
  for (const auto& e : events) {
    if (!e.is_spatial()) continue;
    const std::int64_t anchor = anchors[*nearest_index(anchors, e.time_ms)];
    DeltaSample s = delta_for_anchor(anchor, times, std::make_pair(e.modality, e.time_ms));
    s.label = e.intentional.value_or(false) ? DeltaLabel::intentional : DeltaLabel::accidental;
    out.push_back(s);
  }
  return out;
}

nlohmann::json event_to_json(const EventRecord& e) {
  nlohmann::json j = {{"modality", to_string(e.modality)}, {"time_ms", e.time_ms}};
  if (e.kind) j["kind"] = observation::to_string(*e.kind);
  if (!e.word.empty()) j["word"] = e.word;
  if (e.focus_object) j["focus_object"] = *e.focus_object;
  if (e.focus_point) j["focus_point"] = core::to_json(*e.focus_point);
  if (e.intentional) j["intentional"] = *e.intentional;
  return j;
}

nlohmann::json delta_to_json(const DeltaSample& d) {
  return {{"dt_head_s", d.dt_head_s},   {"dt_left_s", d.dt_left_s},
          {"dt_right_s", d.dt_right_s}, {"present", {d.present[0], d.present[1], d.present[2]}},
          {"label", to_string(d.label)}, {"anchor_ms", d.anchor_ms},
          {"participant_id", d.participant_id}, {"request_id", d.request_id}};
}

}  // namespace mmref::temporal
