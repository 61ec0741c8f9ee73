#include "plot/controller.hpp"

#include <algorithm>
#include <cmath>

#include "plot/errors.hpp"

namespace plot {

namespace {
constexpr double kGammaFloor = 0.01;
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kPlot: return "plot";
    case ControllerKind::kNaiveRls: return "naive_rls";
    case ControllerKind::kNaiveLqr: return "naive_lqr";
    case ControllerKind::kOptimalNoncausal: return "optimal";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "plot") return ControllerKind::kPlot;
  if (name == "naive_rls") return ControllerKind::kNaiveRls;
  if (name == "naive_lqr") return ControllerKind::kNaiveLqr;
  if (name == "optimal") return ControllerKind::kOptimalNoncausal;
  throw ConfigError("unknown controller kind '" + name + "'");
}

void ControllerConfig::validate() const {
  if (W < 1) throw DomainError("W must be at least 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
  if (!(M > 0.0)) throw DomainError("M must be positive");
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  lift.validate();
}

TrackingController::TrackingController(ControllerConfig cfg, const LqtSolution& lqt, int T,
                                       int n_r, int p, bool affine)
    : cfg_(std::move(cfg)), lqt_(lqt), T_(T), n_r_(n_r), p_(p), affine_(affine),
      buffer_(n_r, p, affine) {
  cfg_.validate();
  if (cfg_.kind == ControllerKind::kOptimalNoncausal) {
    throw ConfigError("the non-causal optimum is not a causal controller");
  }
  if (cfg_.lift.E.rows() != lqt_.n() || cfg_.lift.E.cols() != n_r) {
    throw DimensionMismatch("reference lift does not match plant and target dimensions");
  }
  if (cfg_.kind != ControllerKind::kNaiveLqr && lqt_.horizon() < cfg_.W) {
    throw DimensionMismatch("fewer feedforward gains than the prediction horizon");
  }
  if (cfg_.kind == ControllerKind::kNaiveLqr) return;
  BankConfig bc;
  bc.W = cfg_.kind == ControllerKind::kPlot ? cfg_.W : 1;
  bc.n_r = n_r;
  bc.d = n_r * p + (affine ? 1 : 0);
  bc.gamma = cfg_.gamma;
  bc.eps = cfg_.eps;
  bc.M = cfg_.M;
  bc.projection = cfg_.projection;
  bc.init = cfg_.init;
  bank_.emplace(bc);
}

std::vector<VectorXd> TrackingController::predict_raw(const VectorXd& r_raw) {
  const VectorXd& z = buffer_.z();
  std::vector<VectorXd> preds = bank_->observe(r_raw, z);
  if (cfg_.kind == ControllerKind::kPlot) return preds;

  // Naive-RLS: roll the one-step model forward on predicted regressors.
  const MatrixXd& S = bank_->learner(1, 0).S_hat;
  RegressorBuffer rolled = buffer_;
  std::vector<VectorXd> out;
  out.reserve(cfg_.W);
  for (int k = 1; k <= cfg_.W; ++k) {
    VectorXd next = S * rolled.z();
    rolled.push(next);
    out.push_back(std::move(next));
  }
  return out;
}

ControlStep TrackingController::step(const VectorXd& x_t, const VectorXd& r_raw) {
  if (t_ >= T_) throw DomainError("controller stepped past the horizon");
  if (r_raw.size() != n_r_) throw DimensionMismatch("target has wrong dimension");
  if (t_ == 0) buffer_.reset(r_raw);
  else buffer_.push(r_raw);

  const VectorXd r_t = cfg_.lift.lift(r_raw);
  ControlStep out;
  if (cfg_.kind == ControllerKind::kNaiveLqr) {
    out.u = naive_lqr_input(lqt_.K, x_t, r_t);
    out.feedforward = VectorXd::Zero(lqt_.m());
    ++t_;
    return out;
  }

  std::vector<VectorXd> raw = predict_raw(r_raw);
  out.predictions.reserve(cfg_.W);
  for (int k = 1; k <= cfg_.W; ++k) {
    if (t_ + k > T_) {
      out.predictions.push_back(VectorXd::Zero(lqt_.n()));
      continue;
    }
    max_prediction_norm_ = std::max(max_prediction_norm_, raw[k - 1].norm());
    out.predictions.push_back(cfg_.lift.lift(raw[k - 1]));
  }
  const int terms = std::min(cfg_.W, T_ - t_);
  out.feedforward = receding_horizon_feedforward(lqt_, r_t, out.predictions, terms);
  out.u = -lqt_.K * (x_t - r_t) - out.feedforward;
  ++t_;
  return out;
}

VectorXd naive_lqr_input(const MatrixXd& K, const VectorXd& x_t, const VectorXd& r_t) {
  if (x_t.size() != r_t.size() || K.cols() != x_t.size()) {
    throw DimensionMismatch("naive LQR: state, target and gain disagree");
  }
  return -K * (x_t - r_t);
}

int tune_horizon(int T, double rho) {
  if (T < 2) throw DomainError("horizon tuning needs T >= 2");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0,1)");
  const double w = -std::log(static_cast<double>(T)) / (2.0 * std::log(rho));
  return std::max(1, static_cast<int>(std::ceil(w)));
}

double tune_gamma(int T, double V_T, double M) {
  if (T < 2) throw DomainError("forgetting-factor tuning needs T >= 2");
  if (!(M > 0.0) || V_T < 0.0) throw DomainError("need M > 0 and V_T >= 0");
  const double logT = std::log(static_cast<double>(T));
  const double v = std::max(V_T, logT * logT / T);
  return std::max(kGammaFloor, 1.0 - std::sqrt(v / (4.0 * M * T)));
}

double tune_gamma_power(int T, double c, double a) {
  if (T < 1 || !(c > 0.0) || !(a > 0.0)) throw DomainError("need T >= 1, c > 0, a > 0");
  return std::clamp(1.0 - c * std::pow(static_cast<double>(T), -a), kGammaFloor, 1.0);
}

}  // namespace plot
