#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "mmref/core/validate.hpp"
#include "mmref/sim/dataset_gen.hpp"
#include "mmref/sim/geometry.hpp"
#include "mmref/sim/request_gen.hpp"
#include "mmref/sim/scene_gen.hpp"
#include "mmref/temporal/events.hpp"

using namespace mmref;
using namespace mmref::sim;

TEST_CASE("ray geometry") {
  const Vec3 d = direction_from_angles(0.3, -0.2);
  CHECK(d.norm() == doctest::Approx(1.0));
  CHECK(d.z() < 0.0);
  const Vec2 p = intersect_plane({0, 0, 1}, {0.5, 0.5, -1});
  CHECK(p == Vec2{0.5, 0.5});
  CHECK_THROWS_AS(intersect_plane({0, 0, 1}, {0, 1, 0}), std::domain_error);
  CHECK_THROWS_AS(intersect_plane({0, 0, 1}, {0, 0, 1}), std::domain_error);
}

TEST_CASE("property: sensor models invert their table maps") {
  GazeModel g;
  g.yaw_bias = 0.02;
  g.pitch_bias = -0.01;
  HandModel h;
  h.yaw_bias = 0.01;
  for (double x = -0.35; x <= 0.35; x += 0.07)
    for (double y = -0.25; y <= 0.25; y += 0.05) {
      const Vec2 p{x, y};
      CHECK((g.table_point(g.head_angles_for(p)) - p).norm() < 1e-9);
      CHECK((h.table_point(h.direction_for(p)) - p).norm() < 1e-9);
    }
  // The head under-rotates, so the naive ray lands short of the target.
  const Vec2 far{0.35, 0.25};
  CHECK((naive_projection(g.head_angles_for(far), g.eye) - far).norm() > 0.05);
}

TEST_CASE("scenes respect separation, bounds and ambiguity") {
  SceneConfig cfg;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = generate_scene(cfg, seed);
    REQUIRE(s.size() == 6);
    bool duplicate = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s.objects[i].id == static_cast<int>(i));
      CHECK(s.table_bounds.contains(s.objects[i].position));
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        CHECK((s.objects[i].position - s.objects[j].position).norm() >= cfg.min_separation_m);
        duplicate = duplicate || s.objects[i].same_attributes(s.objects[j]);
      }
    }
    CHECK(duplicate);
  }
  CHECK(generate_scene(cfg, 9) == generate_scene(cfg, 9));
  cfg.n_objects = 1;
  CHECK_THROWS_AS(generate_scene(cfg, 1), std::invalid_argument);
  cfg.n_objects = 200;
  CHECK_THROWS_AS(generate_scene(cfg, 1), std::runtime_error);
}

TEST_CASE("frame times truncate to milliseconds") {
  CHECK(frame_time_ms(0, 60.0) == 0);
  CHECK(frame_time_ms(1, 60.0) == 16);
  CHECK(frame_time_ms(2, 60.0) == 33);
  CHECK(frame_time_ms(60, 60.0) == 1000);
}

TEST_CASE("requests are deterministic and valid") {
  const auto scene = generate_scene({}, 4);
  const auto profile = draw_profile({}, 1, 99);
  RequestGenConfig cfg;
  const auto a = generate_request(profile, scene, 3, 0, cfg, 17);
  const auto b = generate_request(profile, scene, 3, 0, cfg, 17);
  CHECK(a.request == b.request);
  CHECK(a.request.target_id == 3);
  CHECK_FALSE(a.patterns.empty());
  core::Session s{1, scene, {a.request}, {}};
  CHECK(core::validate_session(s).empty());
  CHECK_THROWS_AS(generate_request(profile, scene, 42, 0, cfg, 17), std::invalid_argument);
}

TEST_CASE("noise-free requests have only intentional spatial events") {
  PopulationConfig pop;
  const auto profile = draw_profile(pop, 2, 5, 0.0, true);
  CHECK(profile.accidental_rate_hz == 0.0);
  const auto scene = generate_scene({}, 8);
  RequestGenConfig cfg;
  cfg.word_revision_rate = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = generate_request(profile, scene, static_cast<int>(seed % 6), 0, cfg, seed);
    for (const auto& e : r.events)
      if (e.modality != temporal::Modality::speech) {
        CHECK(e.intentional);
        CHECK(e.object_id == r.request.target_id);
      }
  }
}

TEST_CASE("extracted events agree with the injected ground truth") {
  ScenarioConfig cfg;
  cfg.n_participants = 2;
  cfg.requests_per_participant = 5;
  const auto d = generate_dataset(cfg, 3);
  const auto lex = observation::KeywordLexicon::standard();
  std::size_t t = 0, matched = 0, total = 0;
  for (const auto& s : d.sessions) {
    const auto maps = ground_truth_maps(d.profiles[static_cast<std::size_t>(s.participant_id)]);
    for (const auto& r : s.requests) {
      const auto& truth = d.truth[t++];
      REQUIRE(truth.request_id == r.request_id);
      const auto events = temporal::label_intentional(temporal::extract_events(r, s.scene, maps, lex), s.scene, r.target_id);
      for (const auto& g : truth.events) {
        if (g.modality == temporal::Modality::speech || !g.intentional) continue;
        ++total;
        // The first frame at or after the injected onset carries the rising edge.
        for (const auto& e : events)
          if (e.modality == g.modality && e.time_ms >= g.onset_ms && e.time_ms < g.onset_ms + 17 &&
              e.intentional.value_or(false)) {
            ++matched;
            break;
          }
      }
    }
  }
  REQUIRE(total > 0);
  // Overlapping dwells of one modality merge into a single edge.
  CHECK(static_cast<double>(matched) / static_cast<double>(total) > 0.9);
}

TEST_CASE("timing shift moves every personal offset") {
  PopulationConfig pop;
  const auto a = draw_profile(pop, 3, 11, 0.0);
  const auto b = draw_profile(pop, 3, 11, 0.3);
  for (int p = 0; p < 3; ++p)
    for (int ax = 0; ax < 3; ++ax)
      CHECK(b.pattern_offsets_s[p].mean[ax] - a.pattern_offsets_s[p].mean[ax] == doctest::Approx(0.3));
  CHECK(a.gaze.yaw_gain == b.gaze.yaw_gain);
}

TEST_CASE("seed streams are independent and stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(7, s, i));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
  CHECK(derive_seed(7, 1, 2) != derive_seed(8, 1, 2));
}

TEST_CASE("datasets are reproducible and round-trip through disk") {
  ScenarioConfig cfg;
  cfg.n_participants = 3;
  cfg.requests_per_participant = 2;
  const auto a = generate_dataset(cfg, 21), b = generate_dataset(cfg, 21), c = generate_dataset(cfg, 22);
  CHECK(a.sessions == b.sessions);
  CHECK(a.sessions != c.sessions);
  CHECK(a.calibration.size() == 3);
  for (const auto& s : a.sessions) {
    CHECK(s.requests.size() == 2);
    CHECK(s.profile_meta.has_value());
  }

  const auto dir = std::filesystem::temp_directory_path() / "mmref_test_sim";
  std::filesystem::remove_all(dir);
  const auto manifest = write_dataset(a, dir);
  for (const char* f : {"dataset.jsonl", "ground_truth.jsonl", "calibration.jsonl", "manifest.json"})
    CHECK(std::filesystem::exists(dir / f));
  CHECK(manifest.at("seed") == 21);
  const auto cal = load_calibration(dir / "calibration.jsonl");
  REQUIRE(cal.size() == 3);
  CHECK(cal[1].frames == a.calibration[1].frames);
  std::filesystem::remove_all(dir);
}

TEST_CASE("scenario JSON rejects unknown keys") {
  ScenarioConfig cfg;
  cfg.timing_shift_s = 0.3;
  const auto back = scenario_from_json(scenario_to_json(cfg));
  CHECK(back.timing_shift_s == 0.3);
  CHECK(back.population.accidental_rate_hz == cfg.population.accidental_rate_hz);
  try {
    scenario_from_json({{"n_participant", 3}});
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("n_participant") != std::string::npos);
  }
  CHECK_THROWS_AS(population_from_json({{"rate", 1}}), std::invalid_argument);
}

TEST_CASE("profile JSON round-trip") {
  const auto p = draw_profile({}, 4, 12);
  const auto b = profile_from_json(profile_to_json(p));
  CHECK(b.participant_id == 4);
  CHECK(b.gaze.yaw_gain == p.gaze.yaw_gain);
  CHECK(b.pattern_offsets_s[1].mean == p.pattern_offsets_s[1].mean);
  CHECK(b.right_handed == p.right_handed);
}
