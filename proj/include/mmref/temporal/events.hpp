#pragma once

// Modality events (fixation/pointing onsets and speech words) and the
// speech-relative time differences the temporal prior is trained on.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"
#include "mmref/observation/lexicon.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/temporal/gmm.hpp"

namespace mmref::temporal {

enum class Modality { head, left, right, speech };

std::string_view to_string(Modality m);

struct EventRecord {
  Modality modality = Modality::head;
  std::int64_t time_ms = 0;
  std::optional<observation::SpeechKind> kind;  // speech only
  std::string word;                             // speech only, empty for request_onset
  std::optional<int> focus_object;              // spatial only (object id)
  std::optional<core::Vec2> focus_point;        // spatial only
  std::optional<bool> intentional;

  bool is_spatial() const { return modality != Modality::speech; }
  /// Speech events that anchor a time difference: request onset, deictic and
  /// attribute words. Filler words do not.
  bool is_anchor() const;
};

/// Spatial event for a rising flag edge at `frame`, or nullopt. Shared by
/// offline extraction and the online gate so both see identical events.
std::optional<EventRecord> spatial_onset(Modality m, const core::ObservationFrame& frame,
                                         const core::ObservationFrame* previous, const core::Scene& scene,
                                         const observation::SensorMaps& maps);

/// Speech events carried by the transition previous -> current transcript.
std::vector<EventRecord> speech_events(std::string_view previous, const core::ObservationFrame& frame,
                                       const observation::KeywordLexicon& lexicon);

/// All events of a request, ordered by time (stable within a frame: head,
/// left, right, then speech).
std::vector<EventRecord> extract_events(const core::Request& request, const core::Scene& scene,
                                        const observation::SensorMaps& maps,
                                        const observation::KeywordLexicon& lexicon);

/// A spatial event is intentional when the target is the object nearest to
/// its focus point. Speech events are left unlabelled.
std::vector<EventRecord> label_intentional(std::vector<EventRecord> events, const core::Scene& scene, int target_id);

enum class DeltaLabel { intentional, accidental };

std::string_view to_string(DeltaLabel l);

inline constexpr double kMissingAxisSentinelS = 5.0;

struct DeltaSample {
  double dt_head_s = kMissingAxisSentinelS;
  double dt_left_s = kMissingAxisSentinelS;
  double dt_right_s = kMissingAxisSentinelS;
  AxisMask present{false, false, false};
  DeltaLabel label = DeltaLabel::accidental;
  std::int64_t anchor_ms = 0;
  int participant_id = -1;  // provenance
  int request_id = -1;

  Vec3 vec() const { return {dt_head_s, dt_left_s, dt_right_s}; }
  int present_count() const { return int(present[0]) + int(present[1]) + int(present[2]); }
};

/// One sample per anchor speech event: for every spatial modality the
/// nearest-in-time event gives T_s - T_m in seconds; an absent modality gets
/// the sentinel and a cleared mask bit. The label is intentional when a strict
/// majority of the present axes come from intentional events. Anchors with
/// no spatial event at all produce no sample.
std::vector<DeltaSample> compute_deltas(const std::vector<EventRecord>& events);

/// One sample per spatial event, taken against the anchor nearest to it: the
/// event's own axis is pinned to that event, the other axes use the nearest
/// event of their modality, and the label is the event's own. This is what
/// the online gate scores, so the gate's densities are trained on it.
std::vector<DeltaSample> compute_event_deltas(const std::vector<EventRecord>& events);

/// Delta for an anchor at `anchor_ms` given the events seen so far; `forced`
/// pins one modality to a specific event time.
DeltaSample delta_for_anchor(std::int64_t anchor_ms, const std::array<std::vector<std::int64_t>, 3>& spatial_times,
                             std::optional<std::pair<Modality, std::int64_t>> forced = std::nullopt);

nlohmann::json event_to_json(const EventRecord& e);
nlohmann::json delta_to_json(const DeltaSample& d);

}  // namespace mmref::temporal
