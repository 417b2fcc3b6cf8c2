#include "strtd/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "strtd/error.hpp"

namespace strtd {

namespace {

struct CoreStep {
  DenseTensor core;
  double lipschitz = 0.0;
};

struct FactorStep {
  Matrix factor;
  double lipschitz = 0.0;
};

DenseTensor extrapolate(const DenseTensor& cur, const DenseTensor& prev, double omega) {
  if (omega == 0.0) return cur;
  DenseTensor out = cur;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += omega * (cur[i] - prev[i]);
  return out;
}

Matrix extrapolate(const Matrix& cur, const Matrix& prev, double omega) {
  if (omega == 0.0) return cur;
  return cur + omega * (cur - prev);
}

CoreStep core_step(const DenseTensor& x, const DenseTensor& core, const DenseTensor& previous,
                   std::span<const Matrix> factors, double alpha, double omega, std::vector<Vector>* warm) {
  CoreStep step;
  step.lipschitz = lipschitz_core(factors, warm);
  if (!(step.lipschitz > 0.0)) {
    step.core = core;
    return step;
  }
  const DenseTensor tilde = extrapolate(core, previous, omega);
  step.core = core_prox_step(tilde, grad_core(x, tilde, factors), alpha, step.lipschitz);
  return step;
}

// Gradient pieces that do not depend on U_n: G_V G_V^T and X_(n) G_V^T.
struct FactorGram {
  Matrix gram;
  Matrix cross;
};

FactorGram factor_gram(const DenseTensor& x, const DenseTensor& core, std::span<const Matrix> factors,
                       std::size_t mode) {
  const Matrix gv = multi_mode_product_skip(core, factors, mode);
  FactorGram g;
  g.gram.noalias() = gv * gv.transpose();
  g.cross.noalias() = unfold(x, mode) * gv.transpose();
  return g;
}

Matrix factor_gradient(const Matrix& u, const FactorGram& g, const ModeRegularizer& reg) {
  Matrix grad = u * g.gram - g.cross;
  if (reg.active()) grad.noalias() += reg.beta * (reg.penalty * u);
  return grad;
}

double factor_lipschitz(const FactorGram& g, const ModeRegularizer& reg, Vector* warm) {
  const auto dominant = dominant_eigenvalue_psd(g.gram, warm);
  if (warm != nullptr) *warm = dominant.vector;
  double l = dominant.value;
  if (reg.active()) l += std::abs(reg.beta) * reg.penalty_norm;
  return l;
}

FactorStep factor_step(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, const Matrix& previous,
                       std::size_t mode, double omega, Vector* warm) {
  const FactorGram g = factor_gram(x, core, f.factors, mode);
  const auto& reg = f.regularizers[mode];
  FactorStep step;
  step.lipschitz = factor_lipschitz(g, reg, warm);
  if (!(step.lipschitz > 0.0)) {
    step.factor = f.factors[mode];
    return step;
  }
  const Matrix tilde = extrapolate(f.factors[mode], previous, omega);
  step.factor = factor_prox_step(tilde, factor_gradient(tilde, g, reg), step.lipschitz);
  return step;
}

void check_regularizers(const std::vector<ModeRegularizer>& regs, const Extents& dims) {
  if (regs.size() != dims.size()) throw DimensionError("one regularizer per mode is required");
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const auto& r = regs[n];
    if (!r.active()) continue;
    const auto extent = static_cast<Eigen::Index>(dims[n]);
    if (r.penalty.rows() != extent || r.penalty.cols() != extent) {
      throw DimensionError("penalty matrix for mode " + std::to_string(n) + " must be " + std::to_string(extent) + "x" +
                           std::to_string(extent));
    }
  }
}

bool all_finite(const DenseTensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

ModeRegularizer ModeRegularizer::from_prior(const PriorMatrix& prior, std::optional<double> beta) {
  ModeRegularizer r;
  if (prior.kind == PriorKind::none) return r;
  const auto weight = beta ? beta : beta_from_prior(prior);
  if (!weight) return r;
  r.kind = prior.kind;
  r.penalty = prior.penalty;
  r.penalty_norm = prior.spectral_norm;
  r.beta = *weight;
  return r;
}

std::string_view to_string(MissingFill fill) { return fill == MissingFill::zero ? "zero" : "observed-mean"; }

MissingFill missing_fill_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "zero") return MissingFill::zero;
  if (lower == "observed-mean" || lower == "mean" || lower == "observed_mean") return MissingFill::observed_mean;
  throw std::invalid_argument("unknown missing fill '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  for (auto r : core_dims) {
    if (r == 0) throw std::invalid_argument("core extents must be positive");
  }
}

std::pair<double, ExtrapolationState> advance_extrapolation(ExtrapolationState e) {
  const double next = (e.p + std::sqrt(e.r * e.t_cur * e.t_cur + e.q)) / 2.0;
  const double omega = (e.t_cur - 1.0) / next;
  e.t_prev = e.t_cur;
  e.t_cur = next;
  return {omega, e};
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::none:
      return "none";
    case StopReason::converged_rse:
      return "converged-rse";
    case StopReason::converged_objective:
      return "converged-objective";
    case StopReason::max_iterations:
      return "max-iterations";
  }
  return "none";
}

DenseTensor reconstruct(const DenseTensor& core, std::span<const Matrix> factors) {
  return multi_mode_product(core, factors);
}

double regularization(const FactorSet& f) {
  double acc = 0.0;
  for (std::size_t n = 0; n < f.order(); ++n) {
    const auto& reg = f.regularizers[n];
    if (!reg.active()) continue;
    const Matrix& u = f.factors[n];
    // tr(U^T P U) = sum of entrywise products of U and P U.
    acc += 0.5 * reg.beta * u.cwiseProduct(reg.penalty * u).sum();
  }
  return acc;
}

double objective(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, double alpha) {
  const DenseTensor z = reconstruct(core, f.factors);
  double fit = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - z[i];
    fit += d * d;
  }
  return 0.5 * fit + alpha * l1_norm(core) + regularization(f);
}

double objective(const SolverState& state, double alpha) {
  return objective(state.x, state.core, state.factors, alpha);
}

double observed_objective(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, double alpha,
                          const ObservationMask& mask) {
  const DenseTensor z = reconstruct(core, f.factors);
  double fit = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!mask.observed(i)) continue;
    const double d = x[i] - z[i];
    fit += d * d;
  }
  return 0.5 * fit + alpha * l1_norm(core) + regularization(f);
}

DenseTensor grad_core(const DenseTensor& x, const DenseTensor& core, std::span<const Matrix> factors) {
  if (factors.size() != core.order()) throw DimensionError("one factor per mode is required");
  std::vector<Matrix> grams;
  grams.reserve(factors.size());
  for (const auto& u : factors) grams.emplace_back(u.transpose() * u);
  DenseTensor grad = multi_mode_product(core, grams);
  grad -= multi_mode_product_transposed(x, factors);
  return grad;
}

double lipschitz_core(std::span<const Matrix> factors, std::vector<Vector>* warm) {
  if (warm != nullptr && warm->size() != factors.size()) warm->assign(factors.size(), Vector());
  double l = 1.0;
  for (std::size_t n = 0; n < factors.size(); ++n) {
    const Matrix gram = factors[n].transpose() * factors[n];
    const Vector* start = warm != nullptr ? &(*warm)[n] : nullptr;
    auto dominant = dominant_eigenvalue_psd(gram, start);
    if (warm != nullptr) (*warm)[n] = std::move(dominant.vector);
    l *= dominant.value;
  }
  return l;
}

double shrink(double value, double threshold) {
  const double mag = std::abs(value) - threshold;
  if (mag <= 0.0) return 0.0;
  return value > 0.0 ? mag : -mag;
}

DenseTensor shrink(const DenseTensor& t, double threshold) {
  DenseTensor out = t;
  for (auto& v : out.data()) v = shrink(v, threshold);
  return out;
}

DenseTensor core_prox_step(const DenseTensor& extrapolated, const DenseTensor& gradient, double alpha,
                           double lipschitz) {
  if (!(lipschitz > 0.0)) throw DegenerateError("core Lipschitz constant is zero");
  if (gradient.dims() != extrapolated.dims()) throw DimensionError("gradient extents differ from the core");
  DenseTensor out(extrapolated.dims());
  const double mu = alpha / lipschitz;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = shrink(extrapolated[i] - gradient[i] / lipschitz, mu);
  }
  return out;
}

DenseTensor update_core(const SolverState& state, double alpha, double omega) {
  auto step = core_step(state.x, state.core, state.previous_core, state.factors.factors, alpha, omega, nullptr);
  if (!(step.lipschitz > 0.0)) throw DegenerateError("core Lipschitz constant is zero");
  return std::move(step.core);
}

Matrix grad_factor(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, std::size_t mode) {
  if (mode >= f.order()) throw DimensionError("mode out of range");
  return factor_gradient(f.factors[mode], factor_gram(x, core, f.factors, mode), f.regularizers[mode]);
}

double lipschitz_factor(const DenseTensor& core, const FactorSet& f, std::size_t mode, Vector* warm) {
  if (mode >= f.order()) throw DimensionError("mode out of range");
  const Matrix gv = multi_mode_product_skip(core, f.factors, mode);
  const Matrix gram = gv * gv.transpose();
  const auto dominant = dominant_eigenvalue_psd(gram, warm);
  if (warm != nullptr) *warm = dominant.vector;
  double l = dominant.value;
  const auto& reg = f.regularizers[mode];
  if (reg.active()) l += std::abs(reg.beta) * reg.penalty_norm;
  return l;
}

Matrix project_nonnegative(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix factor_prox_step(const Matrix& extrapolated, const Matrix& gradient, double lipschitz) {
  if (!(lipschitz > 0.0)) throw DegenerateError("factor Lipschitz constant is zero");
  return project_nonnegative(extrapolated - gradient / lipschitz);
}

Matrix update_factor(const SolverState& state, std::size_t mode, double omega) {
  if (mode >= state.factors.order()) throw DimensionError("mode out of range");
  auto step = factor_step(state.x, state.core, state.factors, state.previous_factors.at(mode), mode, omega, nullptr);
  if (!(step.lipschitz > 0.0)) throw DegenerateError("factor Lipschitz constant is zero");
  return std::move(step.factor);
}

DenseTensor feedback_update(const DenseTensor& x, const DenseTensor& z, const DenseTensor& x0,
                            const ObservationMask& mask, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (x.dims() != z.dims() || x.dims() != x0.dims() || x.dims() != mask.dims()) {
    throw DimensionError("feedback operands have different extents");
  }
  DenseTensor out = z;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask.observed(i)) out[i] = x0[i] + gamma * (x[i] - z[i]);
  }
  return out;
}

std::optional<double> observed_rse(const DenseTensor& z, const DenseTensor& x0, const ObservationMask& mask) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!mask.observed(i)) continue;
    const double d = z[i] - x0[i];
    num += d * d;
    den += x0[i] * x0[i];
  }
  if (den == 0.0) return std::nullopt;
  return std::sqrt(num) / std::sqrt(den);
}

StopReason check_stop(std::optional<double> rse, std::span<const double> trace, double tol) {
  if (rse && *rse < tol) return StopReason::converged_rse;
  if (trace.size() < 4) return StopReason::none;
  for (std::size_t i = trace.size() - 4; i + 1 < trace.size(); ++i) {
    if (std::abs(trace[i] - trace[i + 1]) / (1.0 + trace[i]) > tol) return StopReason::none;
  }
  return StopReason::converged_objective;
}

StopReason check_stop(const SolverState& state, const DenseTensor& x0, const ObservationMask& mask, double tol) {
  const DenseTensor z = reconstruct(state.core, state.factors.factors);
  return check_stop(observed_rse(z, x0, mask), state.observed_objective_trace, tol);
}

SolverState initialize(const DenseTensor& x0, const ObservationMask& mask, std::vector<ModeRegularizer> regularizers,
                       const SolverConfig& cfg) {
  cfg.validate();
  const Extents& dims = x0.dims();
  if (mask.dims() != dims) throw DimensionError("mask extents do not match the data tensor");
  if (regularizers.empty()) regularizers.resize(dims.size());
  check_regularizers(regularizers, dims);
  const Extents core_dims = cfg.core_dims.empty() ? dims : cfg.core_dims;
  if (core_dims.size() != dims.size()) throw DimensionError("core order differs from the tensor order");

  const auto observed = mask.observed_count();
  if (observed == 0) throw std::invalid_argument("observation mask is empty");
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (mask.observed(i) && !std::isfinite(x0[i])) {
      throw NumericalError("observed entry " + std::to_string(i) + " is not finite");
    }
  }

  double fill = 0.0;
  if (cfg.missing_fill == MissingFill::observed_mean) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      if (mask.observed(i)) sum += x0[i];
    }
    fill = sum / static_cast<double>(observed);
  }

  SolverState s;
  s.x = x0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!mask.observed(i)) s.x[i] = fill;
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  s.factors.regularizers = std::move(regularizers);
  for (std::size_t n = 0; n < dims.size(); ++n) {
    Matrix u(static_cast<Eigen::Index>(dims[n]), static_cast<Eigen::Index>(core_dims[n]));
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, j) = unit(rng);
    }
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      const double norm = u.col(j).norm();
      if (norm > 0.0) u.col(j) /= norm;
    }
    s.factors.factors.push_back(std::move(u));
  }
  s.core = multi_mode_product_transposed(s.x, s.factors.factors);
  s.previous_core = s.core;
  s.previous_factors = s.factors.factors;
  s.observed_objective_trace.push_back(observed_objective(s.x, s.core, s.factors, cfg.alpha, mask));
  return s;
}

IterationRecord iterate(SolverState& state, const DenseTensor& x0, const ObservationMask& mask,
                        const SolverConfig& cfg) {
  const auto [omega, next] = advance_extrapolation(state.extrapolation);
  state.extrapolation = next;
  ++state.iteration;

  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.omega = omega;
  rec.objective_before = objective(state.x, state.core, state.factors, cfg.alpha);

  const std::size_t order = state.factors.order();
  if (state.factor_warm.size() != order) state.factor_warm.assign(order, Vector());

  struct Sweep {
    DenseTensor core;
    FactorSet factors;
    double lipschitz_core = 0.0;
    std::vector<double> lipschitz_factors;
    int skipped = 0;
  };

  auto sweep = [&](double w) {
    Sweep out;
    auto cs =
        core_step(state.x, state.core, state.previous_core, state.factors.factors, cfg.alpha, w, &state.core_warm);
    out.lipschitz_core = cs.lipschitz;
    if (!(cs.lipschitz > 0.0)) ++out.skipped;
    out.core = std::move(cs.core);
    out.factors = state.factors;
    for (std::size_t n = 0; n < order; ++n) {
      auto fs = factor_step(state.x, out.core, out.factors, state.previous_factors[n], n, w, &state.factor_warm[n]);
      out.lipschitz_factors.push_back(fs.lipschitz);
      if (!(fs.lipschitz > 0.0)) ++out.skipped;
      out.factors.factors[n] = std::move(fs.factor);
    }
    return out;
  };

  Sweep accepted = sweep(omega);
  rec.objective = objective(state.x, accepted.core, accepted.factors, cfg.alpha);
  if (omega != 0.0 && rec.objective > rec.objective_before) {
    accepted = sweep(0.0);
    rec.objective = objective(state.x, accepted.core, accepted.factors, cfg.alpha);
    rec.restarted = true;
  }
  rec.lipschitz_core = accepted.lipschitz_core;
  rec.lipschitz_factors = accepted.lipschitz_factors;
  rec.skipped_blocks = accepted.skipped;

  rec.step_norm = frobenius_norm(accepted.core - state.core);
  for (std::size_t n = 0; n < order; ++n) {
    rec.step_norm += (accepted.factors.factors[n] - state.factors.factors[n]).norm();
  }

  state.previous_core = std::move(state.core);
  state.core = std::move(accepted.core);
  for (std::size_t n = 0; n < order; ++n) {
    state.previous_factors[n] = std::move(state.factors.factors[n]);
    state.factors.factors[n] = std::move(accepted.factors.factors[n]);
  }

  const DenseTensor z = reconstruct(state.core, state.factors.factors);
  if (!all_finite(z) || !std::isfinite(rec.objective)) {
    throw NumericalError("non-finite values at iteration " + std::to_string(state.iteration));
  }
  rec.objective_observed = observed_objective(state.x, state.core, state.factors, cfg.alpha, mask);
  rec.rse = observed_rse(z, x0, mask).value_or(0.0);
  state.x = feedback_update(state.x, z, x0, mask, cfg.gamma);

  state.objective_trace.push_back(rec.objective);
  state.rse_trace.push_back(rec.rse);
  state.observed_objective_trace.push_back(rec.objective_observed);
  state.trace.push_back(rec);
  return rec;
}

SolveResult solve(const DenseTensor& x0, const ObservationMask& mask, std::vector<ModeRegularizer> regularizers,
                  const SolverConfig& cfg, const IterationObserver& observer) {
  SolveResult result;
  result.state = initialize(x0, mask, std::move(regularizers), cfg);
  SolverState& state = result.state;
  const bool rse_defined = observed_rse(DenseTensor(x0.dims()), x0, mask).has_value();

  while (state.iteration < cfg.max_iters) {
    const IterationRecord rec = iterate(state, x0, mask, cfg);
    if (observer) observer(rec);
    const std::optional<double> rse = rse_defined ? std::optional<double>(rec.rse) : std::nullopt;
    state.stop_reason = check_stop(rse, state.observed_objective_trace, cfg.tol);
    if (state.stop_reason != StopReason::none) break;
  }
  if (state.stop_reason == StopReason::none) state.stop_reason = StopReason::max_iterations;

  result.imputed = reconstruct(state.core, state.factors.factors);
  for (std::size_t i = 0; i < x0.size(); ++i) {
    if (mask.observed(i)) result.imputed[i] = x0[i];
  }
  return result;
}

}  // namespace strtd
