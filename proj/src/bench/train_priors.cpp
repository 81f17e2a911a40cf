#include "mmref/bench/train_priors.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "mmref/sim/dataset_gen.hpp"

namespace mmref::bench {

using nlohmann::json;
using temporal::DeltaLabel;
using temporal::DeltaSample;

namespace {

constexpr std::uint64_t kStreamIntentional = 101;
constexpr std::uint64_t kStreamAccidental = 102;

json bic_table_to_json(const std::vector<temporal::BicRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back({{"k", r.k}, {"log_likelihood", r.log_likelihood}, {"bic", r.bic}});
  return out;
}

std::vector<temporal::BicRow> bic_table_from_json(const json& j) {
  std::vector<temporal::BicRow> out;
  for (const auto& r : j) out.push_back({r.at("k").get<int>(), r.at("log_likelihood").get<double>(), r.at("bic").get<double>()});
  return out;
}

struct Selected {
  temporal::Gmm model;
  int k = 0;
  std::vector<temporal::BicRow> table;
};

// BIC sweep over the admissible K. A K whose fit collapses is skipped; the
// sweep fails only when no K can be fitted.
std::optional<Selected> select(std::span<const temporal::Vec3> x, const TrainSettings& settings, std::uint64_t seed) {
  std::optional<Selected> best;
  double best_bic = std::numeric_limits<double>::infinity();
  std::vector<temporal::BicRow> table;
  for (int k : settings.k_range) {
    if (static_cast<std::size_t>(4 * k) > x.size()) continue;
    try {
      auto fit = temporal::fit_gmm_em(x, k, seed, settings.em);
      const double score = temporal::bic(fit.log_likelihood, k, x.size());
      table.push_back({k, fit.log_likelihood, score});
      if (score < best_bic) {
        best_bic = score;
        best = Selected{std::move(fit.model), k, {}};
      }
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  if (best) best->table = std::move(table);
  return best;
}

std::filesystem::path fold_path(const std::filesystem::path& dir, int id) {
  return dir / ("fold_" + std::to_string(id) + ".json");
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<DeltaSample> request_samples(const core::Request& request, const core::Scene& scene,
                                         const observation::SensorMaps& maps,
                                         const observation::KeywordLexicon& lexicon, SampleMode mode,
                                         int participant_id) {
  const auto events = temporal::label_intentional(temporal::extract_events(request, scene, maps, lexicon), scene,
                                                  request.target_id);
  auto samples = mode == SampleMode::event ? temporal::compute_event_deltas(events) : temporal::compute_deltas(events);
  for (auto& s : samples) {
    s.participant_id = participant_id;
    s.request_id = request.request_id;
  }
  return samples;
}

std::map<int, std::vector<DeltaSample>> collect_samples(const std::vector<core::Session>& sessions,
                                                        const std::map<int, observation::SensorMaps>& maps,
                                                        const observation::KeywordLexicon& lexicon, SampleMode mode) {
  std::map<int, std::vector<DeltaSample>> out;
  for (const auto& s : sessions) {
    auto it = maps.find(s.participant_id);
    if (it == maps.end()) throw std::invalid_argument("no sensor maps for participant " + std::to_string(s.participant_id));
    auto& dst = out[s.participant_id];
    for (const auto& r : s.requests) {
      auto samples = request_samples(r, s.scene, it->second, lexicon, mode, s.participant_id);
      dst.insert(dst.end(), samples.begin(), samples.end());
    }
  }
  return out;
}

PriorFit fit_temporal_prior(std::span<const DeltaSample> samples, const TrainSettings& settings,
                            std::uint64_t seed_intentional, std::uint64_t seed_accidental) {
  std::vector<temporal::Vec3> xi, xa;
  for (const auto& s : samples) (s.label == DeltaLabel::intentional ? xi : xa).push_back(s.vec());

  PriorFit fit;
  fit.n_intentional = xi.size();
  fit.n_accidental = xa.size();
  const std::string counts =
      " (" + std::to_string(xi.size()) + " intentional, " + std::to_string(xa.size()) + " accidental samples)";

  auto intentional = select(xi, settings, seed_intentional);
  if (!intentional) throw std::invalid_argument("cannot fit the intentional timing density" + counts);
  fit.prior.intentional = std::move(intentional->model);
  fit.k_intentional = intentional->k;
  fit.bic_intentional = std::move(intentional->table);

  if (auto accidental = select(xa, settings, seed_accidental)) {
    fit.prior.accidental = std::move(accidental->model);
    fit.k_accidental = accidental->k;
    fit.bic_accidental = std::move(accidental->table);
  }
  // Without an accidental density there is nothing to weigh against.
  fit.prior.prior_intentional =
      fit.prior.accidental ? static_cast<double>(xi.size()) / static_cast<double>(xi.size() + xa.size()) : 1.0;
  return fit;
}

const FoldPrior* PriorSet::fold_for(int participant_id) const {
  for (const auto& f : folds)
    if (f.held_out == participant_id) return &f;
  return nullptr;
}

PriorSet train_lopo(const std::map<int, std::vector<DeltaSample>>& samples, const TrainSettings& settings,
                    std::uint64_t seed) {
  if (samples.size() < 2)
    throw std::invalid_argument("leave-one-participant-out training needs at least 2 participants, got " +
                                std::to_string(samples.size()));
  PriorSet set;
  set.seed = seed;
  set.samples = settings.samples;
  for (const auto& [held_out, _] : samples) {
    FoldPrior fold;
    fold.held_out = held_out;
    std::vector<DeltaSample> pool;
    for (const auto& [pid, s] : samples) {
      if (pid == held_out) continue;
      fold.training_participants.push_back(pid);
      pool.insert(pool.end(), s.begin(), s.end());
    }
    for (const auto& s : pool)
      if (s.participant_id == held_out)
        throw std::logic_error("sample of held-out participant " + std::to_string(held_out) + " in its own fold");
    const auto id = static_cast<std::uint64_t>(held_out);
    try {
      fold.fit = fit_temporal_prior(pool, settings, sim::derive_seed(seed, kStreamIntentional, id),
                                    sim::derive_seed(seed, kStreamAccidental, id));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("fold of participant " + std::to_string(held_out) + ": " + e.what());
    }
    set.folds.push_back(std::move(fold));
  }

  std::vector<DeltaSample> all;
  for (const auto& [_, s] : samples) all.insert(all.end(), s.begin(), s.end());
  set.pooled = fit_temporal_prior(all, settings, sim::derive_seed(seed, kStreamIntentional, 0xffff),
                                  sim::derive_seed(seed, kStreamAccidental, 0xffff));
  return set;
}

json prior_fit_to_json(const PriorFit& f) {
  return {{"prior", temporal::temporal_prior_to_json(f.prior)},
          {"n_intentional", f.n_intentional},
          {"n_accidental", f.n_accidental},
          {"k_intentional", f.k_intentional},
          {"k_accidental", f.k_accidental},
          {"bic_intentional", bic_table_to_json(f.bic_intentional)},
          {"bic_accidental", bic_table_to_json(f.bic_accidental)}};
}

PriorFit prior_fit_from_json(const json& j) {
  PriorFit f;
  f.prior = temporal::temporal_prior_from_json(j.at("prior"));
  f.n_intentional = j.at("n_intentional").get<std::size_t>();
  f.n_accidental = j.at("n_accidental").get<std::size_t>();
  f.k_intentional = j.at("k_intentional").get<int>();
  f.k_accidental = j.at("k_accidental").get<int>();
  f.bic_intentional = bic_table_from_json(j.at("bic_intentional"));
  f.bic_accidental = bic_table_from_json(j.at("bic_accidental"));
  return f;
}

json save_priors(const PriorSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json folds = json::array();
  for (const auto& f : set.folds) {
    write_json(fold_path(dir, f.held_out), {{"held_out", f.held_out},
                                            {"training_participants", f.training_participants},
                                            {"fit", prior_fit_to_json(f.fit)}});
    folds.push_back({{"held_out", f.held_out},
                     {"file", fold_path(dir, f.held_out).filename().string()},
                     {"k_intentional", f.fit.k_intentional},
                     {"k_accidental", f.fit.k_accidental},
                     {"n_intentional", f.fit.n_intentional},
                     {"n_accidental", f.fit.n_accidental},
                     {"bic_intentional", bic_table_to_json(f.fit.bic_intentional)},
                     {"bic_accidental", bic_table_to_json(f.fit.bic_accidental)}});
  }
  if (set.pooled) write_json(dir / "pooled.json", prior_fit_to_json(*set.pooled));
  json manifest = {{"seed", set.seed},
                   {"samples", set.samples == SampleMode::event ? "event" : "anchor"},
                   {"folds", std::move(folds)}};
  write_json(dir / "manifest.json", manifest);
  return manifest;
}

PriorSet load_priors(const std::filesystem::path& dir) {
  const json manifest = read_json(dir / "manifest.json");
  PriorSet set;
  set.seed = manifest.at("seed").get<std::uint64_t>();
  set.samples = manifest.at("samples").get<std::string>() == "anchor" ? SampleMode::anchor : SampleMode::event;
  for (const auto& entry : manifest.at("folds")) {
    const json j = read_json(dir / entry.at("file").get<std::string>());
    FoldPrior f;
    f.held_out = j.at("held_out").get<int>();
    f.training_participants = j.at("training_participants").get<std::vector<int>>();
    f.fit = prior_fit_from_json(j.at("fit"));
    set.folds.push_back(std::move(f));
  }
  if (std::filesystem::exists(dir / "pooled.json")) set.pooled = prior_fit_from_json(read_json(dir / "pooled.json"));
  return set;
}

}  // namespace mmref::bench
