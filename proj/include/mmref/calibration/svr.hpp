#pragma once

// Epsilon-insensitive support vector regression with an RBF kernel, solved
// in the dual by sequential minimal optimization (second-order working set
// selection). A 2D table point is regressed with one scalar model per axis.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"

namespace mmref::calibration {

using core::Vec2;
using core::Vec3;

struct SvrHyper {
  double C = 10.0;
  double gamma = 5.0;
  double epsilon = 0.01;    // meters
  double tolerance = 1e-4;  // maximal KKT violation at convergence
  int max_sweeps = 10000;   // one sweep = 2n pair updates
};

struct CalibrationSample {
  Vec3 input = Vec3::Zero();
  Vec2 target = Vec2::Zero();
};

struct AxisModel {
  std::vector<Vec3> support_inputs;
  std::vector<double> dual_coefs;
  double bias = 0.0;
};

struct RbfSvrModel {
  std::array<AxisModel, 2> axes;
  double gamma = 5.0;
  double C = 10.0;
  double epsilon = 0.01;

  Vec2 predict(const Vec3& input) const;
};

/// Diagnostics of one scalar SMO solve.
struct SolverTrace {
  long iterations = 0;
  double final_violation = 0.0;
  double objective = 0.0;
  std::vector<double> sweep_objectives;  // dual objective at the end of each sweep
};

class SvrConvergenceError : public std::runtime_error {
 public:
  SvrConvergenceError(const std::string& what, SolverTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolverTrace& trace() const { return trace_; }

 private:
  SolverTrace trace_;
};

double rbf_kernel(const Vec3& a, const Vec3& b, double gamma);

/// Fits one output axis. `traces` (optional) receives solver diagnostics.
AxisModel train_axis(std::span<const Vec3> inputs, std::span<const double> targets,
                     const SvrHyper& hyper, SolverTrace* trace = nullptr);

/// Throws std::invalid_argument for fewer than 2 samples, non-positive
/// hyperparameters or identical inputs; SvrConvergenceError when the KKT
/// tolerance is not met within the sweep budget.
RbfSvrModel train_svr(std::span<const CalibrationSample> samples, const SvrHyper& hyper,
                      std::array<SolverTrace, 2>* traces = nullptr);

Vec2 predict(const RbfSvrModel& model, const Vec3& input);

nlohmann::json model_to_json(const RbfSvrModel& model);
RbfSvrModel model_from_json(const nlohmann::json& j);

}  // namespace mmref::calibration
