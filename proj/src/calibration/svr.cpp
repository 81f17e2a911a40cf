#include "mmref/calibration/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmref/core/dataset_io.hpp"

namespace mmref::calibration {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual variables beta in R^{2n}: beta[i] = alpha_i, beta[i + n] = alpha*_i,
// with labels y = +1 / -1 and Q_st = y_s y_t K(s mod n, t mod n).
class EpsilonSvrSolver {
 public:
  EpsilonSvrSolver(std::span<const Vec3> x, std::span<const double> z, const SvrHyper& h)
      : n_(x.size()), l_(2 * x.size()), C_(h.C), kernel_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      kernel_[i * n_ + i] = 1.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double k = rbf_kernel(x[i], x[j], h.gamma);
        kernel_[i * n_ + j] = k;
        kernel_[j * n_ + i] = k;
      }
    }
    beta_.assign(l_, 0.0);
    y_.resize(l_);
    p_.resize(l_);
    for (std::size_t i = 0; i < n_; ++i) {
      y_[i] = 1.0;
      y_[i + n_] = -1.0;
      p_[i] = h.epsilon - z[i];
      p_[i + n_] = h.epsilon + z[i];
    }
    grad_ = p_;
  }

  SolverTrace solve(double tolerance, int max_sweeps) {
    SolverTrace trace;
    const long sweep_len = static_cast<long>(l_);
    const long max_iter = static_cast<long>(max_sweeps) * sweep_len;
    double violation = kInf;
    while (true) {
      std::size_t i = 0, j = 0;
      violation = select_working_set(i, j);
      if (violation < tolerance) break;
      if (trace.iterations >= max_iter) {
        trace.final_violation = violation;
        trace.objective = objective();
        throw SvrConvergenceError("SVR did not reach KKT tolerance within " + std::to_string(max_sweeps) +
                                      " sweeps (violation " + std::to_string(violation) + ")",
                                  std::move(trace));
      }
      update_pair(i, j);
      ++trace.iterations;
      if (trace.iterations % sweep_len == 0) trace.sweep_objectives.push_back(objective());
    }
    trace.final_violation = violation;
    trace.objective = objective();
    trace.sweep_objectives.push_back(trace.objective);
    return trace;
  }

  std::vector<double> coefficients() const {
    std::vector<double> c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = beta_[i] - beta_[i + n_];
    return c;
  }

  double bias() const {
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < l_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (at_upper(t)) {
        if (y_[t] < 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y_[t] > 0) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    return -rho;
  }

 private:
  double K(std::size_t s, std::size_t t) const { return kernel_[(s % n_) * n_ + (t % n_)]; }
  double Q(std::size_t s, std::size_t t) const { return y_[s] * y_[t] * K(s, t); }
  bool at_upper(std::size_t t) const { return beta_[t] >= C_; }
  bool at_lower(std::size_t t) const { return beta_[t] <= 0.0; }

  double objective() const {
    double f = 0.0;
    for (std::size_t t = 0; t < l_; ++t) f += beta_[t] * (grad_[t] + p_[t]);
    return 0.5 * f;
  }

  // Returns the maximal KKT violation m(beta) - M(beta).
  double select_working_set(std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -kInf, gmax2 = -kInf;
    long gmax_idx = -1, gmin_idx = -1;
    for (std::size_t t = 0; t < l_; ++t) {
      if (y_[t] > 0) {
        if (!at_upper(t) && -grad_[t] >= gmax) { gmax = -grad_[t]; gmax_idx = static_cast<long>(t); }
      } else {
        if (!at_lower(t) && grad_[t] >= gmax) { gmax = grad_[t]; gmax_idx = static_cast<long>(t); }
      }
    }
    if (gmax_idx < 0) return 0.0;
    const std::size_t i = static_cast<std::size_t>(gmax_idx);
    const double* krow = &kernel_[(i % n_) * n_];
    double best = kInf;
    for (std::size_t t = 0; t < l_; ++t) {
      double grad_diff;
      if (y_[t] > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, grad_[t]);
        grad_diff = gmax + grad_[t];
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -grad_[t]);
        grad_diff = gmax - grad_[t];
      }
      if (grad_diff > 0) {
        const double quad = 2.0 - 2.0 * krow[t % n_];
        const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
        if (obj <= best) { best = obj; gmin_idx = static_cast<long>(t); }
      }
    }
    out_i = i;
    out_j = gmin_idx < 0 ? i : static_cast<std::size_t>(gmin_idx);
    if (gmin_idx < 0) return 0.0;
    return gmax + gmax2;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double old_i = beta_[i], old_j = beta_[j];
    const double Qij = Q(i, j);
    if (y_[i] != y_[j]) {
      double quad = 2.0 + 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = beta_[i] - beta_[j];
      beta_[i] += delta;
      beta_[j] += delta;
      if (diff > 0) {
        if (beta_[j] < 0) { beta_[j] = 0; beta_[i] = diff; }
      } else {
        if (beta_[i] < 0) { beta_[i] = 0; beta_[j] = -diff; }
      }
      if (diff > 0) {
        if (beta_[i] > C_) { beta_[i] = C_; beta_[j] = C_ - diff; }
      } else {
        if (beta_[j] > C_) { beta_[j] = C_; beta_[i] = C_ + diff; }
      }
    } else {
      double quad = 2.0 - 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = beta_[i] + beta_[j];
      beta_[i] -= delta;
      beta_[j] += delta;
      if (sum > C_) {
        if (beta_[i] > C_) { beta_[i] = C_; beta_[j] = sum - C_; }
      } else {
        if (beta_[j] < 0) { beta_[j] = 0; beta_[i] = sum; }
      }
      if (sum > C_) {
        if (beta_[j] > C_) { beta_[j] = C_; beta_[i] = sum - C_; }
      } else {
        if (beta_[i] < 0) { beta_[i] = 0; beta_[j] = sum; }
      }
    }
    const double di = beta_[i] - old_i, dj = beta_[j] - old_j;
    if (di == 0.0 && dj == 0.0) return;
    const double* ki = &kernel_[(i % n_) * n_];
    const double* kj = &kernel_[(j % n_) * n_];
    const double si = y_[i] * di, sj = y_[j] * dj;
    for (std::size_t s = 0; s < n_; ++s) {
      const double v = ki[s] * si + kj[s] * sj;
      grad_[s] += v;
      grad_[s + n_] -= v;
    }
  }

  std::size_t n_, l_;
  double C_;
  std::vector<double> kernel_;
  std::vector<double> beta_, y_, p_, grad_;
};

void check_hyper(const SvrHyper& h) {
  if (!(h.C > 0)) throw std::invalid_argument("SVR hyperparameter C must be > 0");
  if (!(h.gamma > 0)) throw std::invalid_argument("SVR hyperparameter gamma must be > 0");
  if (!(h.epsilon > 0)) throw std::invalid_argument("SVR hyperparameter epsilon must be > 0");
  if (!(h.tolerance > 0) || h.max_sweeps <= 0) throw std::invalid_argument("invalid SVR stopping criteria");
}

}  // namespace

double rbf_kernel(const Vec3& a, const Vec3& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

AxisModel train_axis(std::span<const Vec3> inputs, std::span<const double> targets, const SvrHyper& hyper,
                     SolverTrace* trace) {
  check_hyper(hyper);
  if (inputs.size() != targets.size()) throw std::invalid_argument("inputs and targets differ in length");
  if (inputs.size() < 2) throw std::invalid_argument("SVR needs at least 2 samples");
  const bool degenerate = std::all_of(inputs.begin(), inputs.end(), [&](const Vec3& v) { return v == inputs[0]; });
  if (degenerate) throw std::invalid_argument("degenerate SVR input: all samples share one input vector");

  EpsilonSvrSolver solver(inputs, targets, hyper);
  SolverTrace t = solver.solve(hyper.tolerance, hyper.max_sweeps);
  const auto coefs = solver.coefficients();

  AxisModel model;
  model.bias = solver.bias();
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    if (coefs[i] == 0.0) continue;
    model.support_inputs.push_back(inputs[i]);
    model.dual_coefs.push_back(coefs[i]);
  }
  if (trace) *trace = std::move(t);
  return model;
}

RbfSvrModel train_svr(std::span<const CalibrationSample> samples, const SvrHyper& hyper,
                      std::array<SolverTrace, 2>* traces) {
  check_hyper(hyper);
  std::vector<Vec3> inputs;
  std::vector<double> tx, ty;
  inputs.reserve(samples.size());
  for (const auto& s : samples) {
    inputs.push_back(s.input);
    tx.push_back(s.target.x());
    ty.push_back(s.target.y());
  }
  RbfSvrModel model;
  model.gamma = hyper.gamma;
  model.C = hyper.C;
  model.epsilon = hyper.epsilon;
  model.axes[0] = train_axis(inputs, tx, hyper, traces ? &(*traces)[0] : nullptr);
  model.axes[1] = train_axis(inputs, ty, hyper, traces ? &(*traces)[1] : nullptr);
  return model;
}

Vec2 RbfSvrModel::predict(const Vec3& input) const {
  Vec2 out;
  for (int a = 0; a < 2; ++a) {
    const AxisModel& m = axes[a];
    double sum = m.bias;
    for (std::size_t j = 0; j < m.support_inputs.size(); ++j)
      sum += m.dual_coefs[j] * rbf_kernel(input, m.support_inputs[j], gamma);
    out[a] = sum;
  }
  return out;
}

Vec2 predict(const RbfSvrModel& model, const Vec3& input) { return model.predict(input); }

nlohmann::json model_to_json(const RbfSvrModel& model) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : model.axes) {
    nlohmann::json sv = nlohmann::json::array();
    for (const auto& v : a.support_inputs) sv.push_back(core::to_json(v));
    axes.push_back({{"support_inputs", std::move(sv)}, {"dual_coefs", a.dual_coefs}, {"bias", a.bias}});
  }
  return {{"gamma", model.gamma}, {"C", model.C}, {"epsilon", model.epsilon}, {"axes", std::move(axes)}};
}

RbfSvrModel model_from_json(const nlohmann::json& j) {
  RbfSvrModel m;
  m.gamma = j.at("gamma").get<double>();
  m.C = j.at("C").get<double>();
  m.epsilon = j.at("epsilon").get<double>();
  const auto& axes = j.at("axes");
  if (!axes.is_array() || axes.size() != 2) throw std::invalid_argument("SVR model needs exactly 2 axes");
  for (int a = 0; a < 2; ++a) {
    AxisModel& am = m.axes[a];
    for (const auto& v : axes[a].at("support_inputs")) am.support_inputs.push_back(core::vec3_from_json(v));
    am.dual_coefs = axes[a].at("dual_coefs").get<std::vector<double>>();
    am.bias = axes[a].at("bias").get<double>();
    if (am.dual_coefs.size() != am.support_inputs.size())
      throw std::invalid_argument("SVR axis has mismatched support inputs and coefficients");
  }
  return m;
}

}  // namespace mmref::calibration
