#include <doctest.h>

#include <random>

#include "hmm_oracle.hpp"
#include "mmref/filter/belief_ops.hpp"
#include "mmref/filter/engine.hpp"

using namespace mmref;
using core::Belief;

namespace {

core::Scene line_scene(int n) {
  core::Scene s;
  for (int i = 0; i < n; ++i) s.objects.push_back({i, {-0.3 + 0.15 * i, 0.0}, core::Color::red, core::Size::small, core::Shape::cube});
  return s;
}

// Request whose head fixates `point` on every frame from `from` on.
core::Request fixating(int n_frames, int from, int target) {
  core::Request r;
  r.target_id = target;
  for (int k = 0; k < n_frames; ++k) {
    core::ObservationFrame f;
    f.timestamp_ms = 16 * k;
    f.head_fixation = k >= from;
    f.speech_text = "this";
    r.frames.push_back(f);
  }
  return r;
}

filter::EngineModels constant_head(core::Vec2 point) {
  filter::EngineModels m;
  m.maps.head = [point](const core::Vec3&) { return point; };
  m.maps.left = m.maps.right = m.maps.head;
  return m;
}

}  // namespace

TEST_CASE("time update closed form") {
  const auto b = Belief::from_weights({0.7, 0.2, 0.1});
  const auto t = filter::time_update(b, 0.9);
  // b_i <- c b_i + (1 - c)/(N - 1) (1 - b_i)
  CHECK(t[0] == doctest::Approx(0.9 * 0.7 + 0.05 * 0.3).epsilon(1e-14));
  CHECK(t[1] == doctest::Approx(0.9 * 0.2 + 0.05 * 0.8).epsilon(1e-14));
  CHECK(t[2] == doctest::Approx(0.9 * 0.1 + 0.05 * 0.9).epsilon(1e-14));
  CHECK(filter::time_update(b, 1.0) == b);
  CHECK_THROWS_AS(filter::time_update(b, 0.0), std::invalid_argument);
}

TEST_CASE("time update preserves uniform and skips excluded objects") {
  const auto u = Belief::uniform(5);
  const auto t = filter::time_update(u, 0.8);
  for (std::size_t i = 0; i < 5; ++i) CHECK(t[i] == doctest::Approx(0.2));
  const auto e = Belief::from_weights({0.5, 0.5, 0.0}, {false, false, true}).excluding(2);
  const auto te = filter::time_update(Belief::from_weights({0.8, 0.2, 1.0}, {false, false, true}), 0.9);
  CHECK(te[2] == 0.0);
  CHECK(te[0] == doctest::Approx(0.9 * 0.8 + 0.1 * 0.2));
  CHECK(e.active_count() == 2);
}

TEST_CASE("observation update is Bayes rule") {
  const auto b = Belief::from_weights({0.5, 0.3, 0.2});
  const std::vector<double> l{0.1, 1.0, 2.0};
  const auto p = filter::observation_update(b, l);
  const double z = 0.05 + 0.3 + 0.4;
  CHECK(p[0] == doctest::Approx(0.05 / z));
  CHECK(p[1] == doctest::Approx(0.3 / z));
  CHECK(p[2] == doctest::Approx(0.4 / z));
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(filter::observation_update(b, zero), std::domain_error);
  const std::vector<double> short_l{1.0};
  CHECK_THROWS_AS(filter::observation_update(b, short_l), std::invalid_argument);
}

TEST_CASE("decide applies the threshold and breaks ties by id") {
  core::Scene s = line_scene(3);
  std::swap(s.objects[0].id, s.objects[2].id);  // index 0 now carries id 2
  const auto tie = Belief::from_weights({0.5, 0.0, 0.5}, {false, true, false});
  CHECK(filter::decide(tie, 0.5, s) == 2u);  // index 2 has id 0
  CHECK(filter::decide(tie, 0.5) == 0u);
  CHECK_FALSE(filter::decide(tie, 0.85, s));
  CHECK(filter::decide(Belief::from_weights({0.1, 0.86, 0.04}), 0.85) == 1u);
}

TEST_CASE("init_belief needs two objects") {
  CHECK_THROWS_AS(filter::init_belief(line_scene(1)), std::invalid_argument);
  CHECK(filter::init_belief(line_scene(4))[3] == doctest::Approx(0.25));
}

TEST_CASE("filter matches the independent HMM forward pass") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto k = oracle::random_case(seed);
    CAPTURE(seed);
    CHECK(oracle::max_abs_deviation(k) < 1e-10);
  }
}

TEST_CASE("property: beliefs stay normalized and non-negative") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const auto k = oracle::random_case(seed);
    filter::EngineModels models;
    models.params = k.params;
    filter::FilterConfig cfg;
    cfg.c = k.c;
    filter::FilterSession s(k.scene, models, cfg, {});
    for (std::size_t t = 0; t < k.frames.size(); ++t) {
      const auto& b = s.advance(k.frames[t], k.projections[t]);
      CHECK(core::normalization_error(b) < 1e-12);
      for (double x : b.probs()) CHECK(x >= 0.0);
    }
  }
}

TEST_CASE("voluntary decision on steady fixation") {
  const auto scene = line_scene(4);
  const auto models = constant_head(scene.objects[2].position);
  filter::FilterConfig cfg;
  const auto r = filter::run_request(fixating(60, 5, 2), scene, models, cfg);
  REQUIRE(r.guesses.size() == 1);
  CHECK(r.guesses[0].voluntary);
  CHECK(r.correct);
  CHECK(r.attempts == 1);
  CHECK(r.steps < 60);
  CHECK(r.max_normalization_error < 1e-12);
}

TEST_CASE("forced decision at the end without evidence") {
  const auto scene = line_scene(3);
  const auto models = constant_head({0.0, 0.0});
  filter::FilterConfig cfg;
  const auto r = filter::run_request(fixating(20, 1000, 1), scene, models, cfg);
  REQUIRE(r.guesses.size() == 1);
  CHECK_FALSE(r.guesses[0].voluntary);
  CHECK(r.guesses[0].object_id == 0);  // uniform belief, lowest id
  CHECK(r.steps == 20);
}

TEST_CASE("multi-attempt excludes wrong guesses until the target") {
  const auto scene = line_scene(4);
  auto models = constant_head(scene.objects[0].position);
  filter::FilterConfig cfg;
  cfg.mode = filter::FilterMode::multi_attempt;
  // Fixation stays on object 0 while the target is 3: object 0 is guessed and
  // excluded, then the fixation evidence favours object 1, and so on.
  const auto r = filter::run_request(fixating(600, 2, 3), scene, models, cfg);
  CHECK(r.attempts >= 2);
  CHECK(r.guesses.front().object_id == 0);
  CHECK(r.correct);
  for (std::size_t i = 0; i + 1 < r.guesses.size(); ++i)
    for (std::size_t j = i + 1; j < r.guesses.size(); ++j) CHECK(r.guesses[i].object_id != r.guesses[j].object_id);

  cfg.mode = filter::FilterMode::first_attempt;
  const auto f = filter::run_request(fixating(600, 2, 3), scene, models, cfg);
  CHECK(f.attempts == 1);
  CHECK_FALSE(f.correct);
}

TEST_CASE("run_request rejects empty requests") {
  core::Request r;
  CHECK_THROWS_AS(filter::run_request(r, line_scene(2), constant_head({0, 0}), {}), std::invalid_argument);
}

TEST_CASE("filter config JSON") {
  filter::FilterConfig c;
  c.c = 0.9;
  c.mode = filter::FilterMode::multi_attempt;
  const auto back = filter::filter_config_from_json(filter::filter_config_to_json(c));
  CHECK(back.c == 0.9);
  CHECK(back.mode == filter::FilterMode::multi_attempt);
  CHECK_THROWS_AS(filter::filter_config_from_json({{"cc", 0.9}}), std::invalid_argument);
  CHECK_THROWS_AS(filter::filter_config_from_json({{"threshold", 1.5}}), std::invalid_argument);
}
