#pragma once

// Full-covariance trivariate Gaussian mixtures over inter-modality time
// differences, fitted by EM with k-means++ seeding and BIC order selection.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace mmref::temporal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using AxisMask = std::array<bool, 3>;

inline constexpr AxisMask kAllAxes{true, true, true};

struct Gmm {
  std::vector<double> weights;
  std::vector<Vec3> means;
  std::vector<Mat3> covariances;

  std::size_t size() const { return weights.size(); }
  /// Throws std::invalid_argument when weights leave the simplex or a
  /// covariance is not symmetric positive definite.
  void check() const;
};

double gmm_log_pdf(const Gmm& model, const Vec3& x);
double gmm_pdf(const Gmm& model, const Vec3& x);
/// Density of the marginal over the axes flagged in `present`. With no axis
/// present the marginal is the empty product and the log density is 0.
double gmm_log_pdf_marginal(const Gmm& model, const Vec3& x, const AxisMask& present);

/// Log density of a single Gaussian, exposed for oracle tests.
double gaussian_log_pdf(const Vec3& x, const Vec3& mean, const Mat3& cov);

struct EmOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-6;
  double regularization = 1e-6;  // added to every covariance diagonal
  int restarts = 5;              // k-means++ initializations, best likelihood kept
};

struct GmmFit {
  Gmm model;
  double log_likelihood = 0.0;              // total over samples
  std::vector<double> log_likelihood_trace; // after every EM iteration
  int iterations = 0;
  int reseeds = 0;
};

/// Throws std::invalid_argument when |samples| < 4K, std::runtime_error when
/// a component collapses twice in every initialization.
GmmFit fit_gmm_em(std::span<const Vec3> samples, int k, std::uint64_t seed, const EmOptions& options = {});

/// Free parameters of a K-component trivariate full-covariance mixture.
int gmm_parameter_count(int k);
double bic(double log_likelihood, int k, std::size_t n);

struct BicRow {
  int k = 0;
  double log_likelihood = 0.0;
  double bic = 0.0;
};

struct BicSelection {
  int best_k = 0;
  std::vector<BicRow> table;
  GmmFit best_fit;
};

BicSelection select_k_bic(std::span<const Vec3> samples, std::span<const int> k_range, std::uint64_t seed,
                          const EmOptions& options = {});

struct DenseRegion {
  Vec3 mean;
  double weight = 0.0;
  Vec3 marginal_std;
};

/// Components ordered by decreasing weight, at most `top_n` of them.
std::vector<DenseRegion> densest_regions(const Gmm& model, std::size_t top_n);

nlohmann::json gmm_to_json(const Gmm& model);
Gmm gmm_from_json(const nlohmann::json& j);

}  // namespace mmref::temporal
