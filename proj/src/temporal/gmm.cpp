#include "mmref/temporal/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace mmref::temporal {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)
constexpr double kMinComponentWeight = 1e-8;

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Cholesky factor of one component, cached for a batch of evaluations.
struct ComponentFactor {
  Mat3 L;
  double log_norm = 0.0;  // -0.5 (3 ln 2pi + ln|Sigma|)

  explicit ComponentFactor(const Mat3& cov) {
    Eigen::LLT<Mat3> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("covariance is not positive definite");
    L = llt.matrixL();
    const double log_det = 2.0 * (std::log(L(0, 0)) + std::log(L(1, 1)) + std::log(L(2, 2)));
    log_norm = -0.5 * (3.0 * kLog2Pi + log_det);
  }

  double log_pdf(const Vec3& x, const Vec3& mean) const {
    const Vec3 d = x - mean;
    const double y0 = d[0] / L(0, 0);
    const double y1 = (d[1] - L(1, 0) * y0) / L(1, 1);
    const double y2 = (d[2] - L(2, 0) * y0 - L(2, 1) * y1) / L(2, 2);
    return log_norm - 0.5 * (y0 * y0 + y1 * y1 + y2 * y2);
  }
};

Mat3 sample_covariance(std::span<const Vec3> xs) {
  Vec3 mean = Vec3::Zero();
  for (const auto& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Mat3 c = Mat3::Zero();
  for (const auto& x : xs) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(xs.size());
}

std::vector<Vec3> kmeans_pp_centers(std::span<const Vec3> xs, int k, std::mt19937_64& rng) {
  std::vector<Vec3> centers;
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  centers.push_back(xs[pick(rng)]);
  std::vector<double> d2(xs.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      d2[i] = std::min(d2[i], (xs[i] - centers.back()).squaredNorm());
      total += d2[i];
    }
    if (!(total > 0.0)) {
      centers.push_back(xs[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng), acc = 0.0;
    std::size_t chosen = xs.size() - 1;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      acc += d2[i];
      if (acc >= r) { chosen = i; break; }
    }
    centers.push_back(xs[chosen]);
  }
  return centers;
}

Gmm init_from_centers(std::span<const Vec3> xs, const std::vector<Vec3>& centers, double reg) {
  const int k = static_cast<int>(centers.size());
  const Mat3 global = sample_covariance(xs) + reg * Mat3::Identity();
  std::vector<std::vector<Vec3>> members(k);
  for (const auto& x : xs) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d = (x - centers[c]).squaredNorm();
      if (d < bd) { bd = d; best = c; }
    }
    members[best].push_back(x);
  }
  Gmm g;
  for (int c = 0; c < k; ++c) {
    const auto& m = members[c];
    g.weights.push_back(std::max<double>(static_cast<double>(m.size()), 1.0));
    g.means.push_back(centers[c]);
    g.covariances.push_back(m.size() >= 4 ? Mat3(sample_covariance(m) + reg * Mat3::Identity()) : global);
  }
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  for (auto& w : g.weights) w /= total;
  return g;
}

// E-step: fills per-sample log responsibilities and returns the total
// log-likelihood.
double e_step(const Gmm& g, std::span<const Vec3> xs, std::vector<double>& log_resp) {
  const std::size_t k = g.size();
  std::vector<ComponentFactor> factors;
  factors.reserve(k);
  for (const auto& c : g.covariances) factors.emplace_back(c);
  std::vector<double> lw(k);
  for (std::size_t c = 0; c < k; ++c) lw[c] = std::log(g.weights[c]);

  log_resp.resize(xs.size() * k);
  double total = 0.0;
  std::vector<double> row(k);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t c = 0; c < k; ++c) row[c] = lw[c] + factors[c].log_pdf(xs[i], g.means[c]);
    const double lse = log_sum_exp(row);
    total += lse;
    for (std::size_t c = 0; c < k; ++c) log_resp[i * k + c] = row[c] - lse;
  }
  return total;
}

// M-step. Returns the index of a collapsed component, or -1.
int m_step(Gmm& g, std::span<const Vec3> xs, const std::vector<double>& log_resp, double reg) {
  const std::size_t k = g.size();
  const double n = static_cast<double>(xs.size());
  int collapsed = -1;
  for (std::size_t c = 0; c < k; ++c) {
    double nk = 0.0;
    Vec3 sum = Vec3::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::exp(log_resp[i * k + c]);
      nk += r;
      sum += r * xs[i];
    }
    if (nk / n < kMinComponentWeight) {
      collapsed = static_cast<int>(c);
      continue;
    }
    const Vec3 mean = sum / nk;
    Mat3 cov = Mat3::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = std::exp(log_resp[i * k + c]);
      const Vec3 d = xs[i] - mean;
      cov.noalias() += r * d * d.transpose();
    }
    g.weights[c] = nk / n;
    g.means[c] = mean;
    g.covariances[c] = cov / nk + reg * Mat3::Identity();
  }
  return collapsed;
}

void reseed_component(Gmm& g, int c, std::span<const Vec3> xs, double reg) {
  // The sample worst explained by the current mixture becomes the new mean.
  std::size_t worst = 0;
  double worst_lp = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lp = gmm_log_pdf(g, xs[i]);
    if (lp < worst_lp) { worst_lp = lp; worst = i; }
  }
  g.means[c] = xs[worst];
  g.covariances[c] = sample_covariance(xs) + reg * Mat3::Identity();
  g.weights[c] = 1.0 / static_cast<double>(g.size());
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  for (auto& w : g.weights) w /= total;
}

}  // namespace

void Gmm::check() const {
  if (weights.empty() || means.size() != weights.size() || covariances.size() != weights.size())
    throw std::invalid_argument("GMM component arrays are empty or differ in length");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("GMM weight is negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("GMM weights do not sum to 1");
  for (const auto& c : covariances) {
    if (!c.isApprox(c.transpose(), 1e-12)) throw std::invalid_argument("GMM covariance is not symmetric");
    Eigen::LLT<Mat3> llt(c);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("GMM covariance is not positive definite");
  }
}

double gaussian_log_pdf(const Vec3& x, const Vec3& mean, const Mat3& cov) {
  return ComponentFactor(cov).log_pdf(x, mean);
}

double gmm_log_pdf(const Gmm& model, const Vec3& x) {
  std::vector<double> terms(model.size());
  for (std::size_t c = 0; c < model.size(); ++c)
    terms[c] = std::log(model.weights[c]) + gaussian_log_pdf(x, model.means[c], model.covariances[c]);
  return log_sum_exp(terms);
}

double gmm_pdf(const Gmm& model, const Vec3& x) { return std::exp(gmm_log_pdf(model, x)); }

double gmm_log_pdf_marginal(const Gmm& model, const Vec3& x, const AxisMask& present) {
  std::vector<int> axes;
  for (int a = 0; a < 3; ++a)
    if (present[a]) axes.push_back(a);
  if (axes.empty()) return 0.0;
  if (axes.size() == 3) return gmm_log_pdf(model, x);

  const int m = static_cast<int>(axes.size());
  std::vector<double> terms(model.size());
  for (std::size_t c = 0; c < model.size(); ++c) {
    Eigen::VectorXd d(m);
    Eigen::MatrixXd s(m, m);
    for (int r = 0; r < m; ++r) {
      d[r] = x[axes[r]] - model.means[c][axes[r]];
      for (int q = 0; q < m; ++q) s(r, q) = model.covariances[c](axes[r], axes[q]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    const Eigen::VectorXd y = llt.matrixL().solve(d);
    double log_det = 0.0;
    for (int r = 0; r < m; ++r) log_det += 2.0 * std::log(llt.matrixL()(r, r));
    terms[c] = std::log(model.weights[c]) - 0.5 * (m * kLog2Pi + log_det + y.squaredNorm());
  }
  return log_sum_exp(terms);
}

namespace {

GmmFit fit_once(std::span<const Vec3> samples, int k, std::uint64_t seed, const EmOptions& options) {
  std::mt19937_64 rng(seed);
  GmmFit fit;
  fit.model = init_from_centers(samples, kmeans_pp_centers(samples, k, rng), options.regularization);

  std::vector<double> log_resp;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    const double ll = e_step(fit.model, samples, log_resp);
    fit.log_likelihood_trace.push_back(ll);
    fit.log_likelihood = ll;
    const bool converged = std::isfinite(prev) && (ll - prev) <= options.relative_tolerance * std::abs(prev);
    if (converged || it >= options.max_iterations) break;
    prev = ll;

    Gmm next = fit.model;
    const int collapsed = m_step(next, samples, log_resp, options.regularization);
    if (collapsed >= 0) {
      if (fit.reseeds > 0) throw std::runtime_error("GMM component collapsed again after re-seeding");
      ++fit.reseeds;
      reseed_component(next, collapsed, samples, options.regularization);
      fit.log_likelihood_trace.clear();
      prev = -std::numeric_limits<double>::infinity();
    }
    fit.model = std::move(next);
    ++fit.iterations;
  }
  return fit;
}

}  // namespace

GmmFit fit_gmm_em(std::span<const Vec3> samples, int k, std::uint64_t seed, const EmOptions& options) {
  if (k < 1) throw std::invalid_argument("GMM needs at least one component");
  if (options.restarts < 1) throw std::invalid_argument("EM needs at least one initialization");
  if (samples.size() < static_cast<std::size_t>(4 * k))
    throw std::invalid_argument("too few samples for a " + std::to_string(k) + "-component GMM: " +
                                std::to_string(samples.size()) + " < " + std::to_string(4 * k));

  // Independent k-means++ starts; the first uses `seed` itself.
  std::optional<GmmFit> best;
  std::optional<std::runtime_error> last_error;
  for (int r = 0; r < options.restarts; ++r) {
    try {
      GmmFit fit = fit_once(samples, k, seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r), options);
      if (!best || fit.log_likelihood > best->log_likelihood) best = std::move(fit);
    } catch (const std::runtime_error& e) {
      last_error = e;
    }
  }
  if (!best) throw *last_error;
  return std::move(*best);
}

int gmm_parameter_count(int k) { return (k - 1) + 3 * k + 6 * k; }

double bic(double log_likelihood, int k, std::size_t n) {
  return -2.0 * log_likelihood + gmm_parameter_count(k) * std::log(static_cast<double>(n));
}

BicSelection select_k_bic(std::span<const Vec3> samples, std::span<const int> k_range, std::uint64_t seed,
                          const EmOptions& options) {
  if (k_range.empty()) throw std::invalid_argument("empty K range for BIC selection");
  BicSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int k : k_range) {
    GmmFit fit = fit_gmm_em(samples, k, seed, options);
    const double score = bic(fit.log_likelihood, k, samples.size());
    sel.table.push_back({k, fit.log_likelihood, score});
    if (score < best) {
      best = score;
      sel.best_k = k;
      sel.best_fit = std::move(fit);
    }
  }
  return sel;
}

std::vector<DenseRegion> densest_regions(const Gmm& model, std::size_t top_n) {
  std::vector<std::size_t> order(model.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return model.weights[a] > model.weights[b]; });
  std::vector<DenseRegion> out;
  for (std::size_t i = 0; i < std::min(top_n, order.size()); ++i) {
    const std::size_t c = order[i];
    out.push_back({model.means[c], model.weights[c], model.covariances[c].diagonal().cwiseSqrt()});
  }
  return out;
}

nlohmann::json gmm_to_json(const Gmm& model) {
  nlohmann::json means = nlohmann::json::array(), covs = nlohmann::json::array();
  for (const auto& m : model.means) means.push_back({m[0], m[1], m[2]});
  for (const auto& c : model.covariances) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({c(r, 0), c(r, 1), c(r, 2)});
    covs.push_back(std::move(rows));
  }
  return {{"weights", model.weights}, {"means", std::move(means)}, {"covariances", std::move(covs)}};
}

Gmm gmm_from_json(const nlohmann::json& j) {
  Gmm g;
  g.weights = j.at("weights").get<std::vector<double>>();
  for (const auto& m : j.at("means")) g.means.emplace_back(m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>());
  for (const auto& c : j.at("covariances")) {
    Mat3 cov;
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q) cov(r, q) = c.at(r).at(q).get<double>();
    g.covariances.push_back(cov);
  }
  g.check();
  return g;
}

}  // namespace mmref::temporal
