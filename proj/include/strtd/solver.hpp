#pragma once

// Alternating proximal gradient solver for sparse-core, nonnegative-factor
// Tucker completion with graph-Laplacian and temporal-difference penalties:
//
//   F(X, G, {U_n}) = 1/2 ||X - G x_1 U_1 ... x_N U_N||_F^2 + alpha ||G||_1
//                  + sum_{laplacian n} beta_n/2 tr(U_n^T L_n U_n)
//                  + sum_{temporal n}  beta_n/2 ||T_n U_n||_F^2,   U_n >= 0.
//
// One iteration updates G (soft-thresholded gradient step), then U_1..U_N
// (projected gradient steps), each from an extrapolated point; falls back to
// the plain step when the extrapolated sweep raises F; then blends the
// observed entries back into X with feedback gain gamma.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "strtd/mask.hpp"
#include "strtd/priors.hpp"
#include "strtd/tensor.hpp"

namespace strtd {

/// Penalty attached to one factor: beta/2 tr(U^T P U) with P = L or T^T T.
struct ModeRegularizer {
  PriorKind kind = PriorKind::none;
  Matrix penalty;
  double penalty_norm = 0.0;
  double beta = 0.0;

  /// Uses beta_from_prior unless `beta` is given. A prior with zero norm
  /// yields an inactive (kind none) regularizer.
  static ModeRegularizer from_prior(const PriorMatrix& prior, std::optional<double> beta = std::nullopt);

  bool active() const { return kind != PriorKind::none && beta != 0.0; }
};

struct FactorSet {
  std::vector<Matrix> factors;
  std::vector<ModeRegularizer> regularizers;

  std::size_t order() const { return factors.size(); }
};

enum class MissingFill { zero, observed_mean };

std::string_view to_string(MissingFill fill);
MissingFill missing_fill_from_string(std::string_view name);

struct SolverConfig {
  double alpha = 1.0;
  double gamma = 0.2;
  double tol = 1e-4;
  int max_iters = 300;
  /// Core extents; empty means the tensor extents.
  Extents core_dims;
  std::uint64_t seed = 0;
  MissingFill missing_fill = MissingFill::observed_mean;

  void validate() const;
};

/// t^k = (p + sqrt(r (t^{k-1})^2 + q)) / 2,  omega_k = (t^{k-1} - 1) / t^k,  t^0 = 1.
struct ExtrapolationState {
  double t_prev = 1.0;
  double t_cur = 1.0;
  double p = 0.8;
  double q = 0.8;
  double r = 4.0;
};

/// Applies the recurrence once and returns omega_k with the advanced state.
std::pair<double, ExtrapolationState> advance_extrapolation(ExtrapolationState e);

enum class StopReason { none, converged_rse, converged_objective, max_iterations };

std::string_view to_string(StopReason r);

struct IterationRecord {
  int iteration = 0;
  /// F at the accepted iterate, against the data tensor the sweep was fit to.
  double objective = 0.0;
  /// F at the previous accepted iterate against the same data tensor.
  double objective_before = 0.0;
  /// F with the fidelity term restricted to the observed entries.
  double objective_observed = 0.0;
  /// ||Omega (Z - X0)||_F / ||Omega X0||_F.
  double rse = 0.0;
  double omega = 0.0;
  double lipschitz_core = 0.0;
  std::vector<double> lipschitz_factors;
  /// sum over blocks of ||Theta^k - Theta^{k-1}||_F.
  double step_norm = 0.0;
  bool restarted = false;
  int skipped_blocks = 0;
};

struct SolverState {
  DenseTensor x;
  DenseTensor core;
  FactorSet factors;
  DenseTensor previous_core;
  std::vector<Matrix> previous_factors;
  ExtrapolationState extrapolation;
  std::vector<double> objective_trace;
  std::vector<double> rse_trace;
  /// Starts with the value at initialization.
  std::vector<double> observed_objective_trace;
  std::vector<IterationRecord> trace;
  int iteration = 0;
  StopReason stop_reason = StopReason::none;

  // Power-iteration warm starts, recomputed constants reuse them.
  std::vector<Vector> core_warm;
  std::vector<Vector> factor_warm;
};

/// Z = core x_1 U_1 ... x_N U_N.
DenseTensor reconstruct(const DenseTensor& core, std::span<const Matrix> factors);

double regularization(const FactorSet& f);

double objective(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, double alpha);
double objective(const SolverState& state, double alpha);

/// Objective with the fidelity term summed over the observed entries only.
double observed_objective(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, double alpha,
                          const ObservationMask& mask);

/// core x_n U_n^T U_n - x x_n U_n^T.
DenseTensor grad_core(const DenseTensor& x, const DenseTensor& core, std::span<const Matrix> factors);

/// prod_n ||U_n^T U_n||_2. `warm` (one vector per mode) is read and updated when given.
double lipschitz_core(std::span<const Matrix> factors, std::vector<Vector>* warm = nullptr);

double shrink(double value, double threshold);
DenseTensor shrink(const DenseTensor& t, double threshold);

/// S_{alpha/L}(G~ - grad/L) for a precomputed gradient at the extrapolated core.
DenseTensor core_prox_step(const DenseTensor& extrapolated, const DenseTensor& gradient, double alpha,
                           double lipschitz);

/// Core update from the extrapolated point G^k + omega (G^k - G^{k-1}).
/// Throws DegenerateError when the Lipschitz constant vanishes.
DenseTensor update_core(const SolverState& state, double alpha, double omega);

/// U_n G_V G_V^T - X_(n) G_V^T + beta_n P_n U_n, with G_V = G_(n) V_n^T.
Matrix grad_factor(const DenseTensor& x, const DenseTensor& core, const FactorSet& f, std::size_t mode);

/// ||G_V G_V^T||_2 + beta_n ||P_n||_2.
double lipschitz_factor(const DenseTensor& core, const FactorSet& f, std::size_t mode, Vector* warm = nullptr);

Matrix project_nonnegative(const Matrix& m);

/// P_+(U~ - grad/L).
Matrix factor_prox_step(const Matrix& extrapolated, const Matrix& gradient, double lipschitz);

/// Factor update from U_n^k + omega (U_n^k - U_n^{k-1}), against the current core.
/// Throws DegenerateError when the Lipschitz constant vanishes.
Matrix update_factor(const SolverState& state, std::size_t mode, double omega);

/// X0 + gamma (X - Z) on the observed entries, Z elsewhere.
DenseTensor feedback_update(const DenseTensor& x, const DenseTensor& z, const DenseTensor& x0,
                            const ObservationMask& mask, double gamma);

/// ||Omega (Z - X0)||_F / ||Omega X0||_F; empty when the denominator is zero.
std::optional<double> observed_rse(const DenseTensor& z, const DenseTensor& x0, const ObservationMask& mask);

/// converged_rse when the observed RSE drops below tol; converged_objective when
/// the relative change of the observed objective stays within tol for the last
/// three consecutive steps; none otherwise.
StopReason check_stop(std::optional<double> rse, std::span<const double> observed_objective_trace, double tol);
/// Same rule on the state's latest reconstruction and observed-objective trace.
StopReason check_stop(const SolverState& state, const DenseTensor& x0, const ObservationMask& mask, double tol);

/// Random nonnegative factors with unit columns, core from projecting the filled data.
SolverState initialize(const DenseTensor& x0, const ObservationMask& mask, std::vector<ModeRegularizer> regularizers,
                       const SolverConfig& cfg);

struct SolveResult {
  DenseTensor imputed;
  SolverState state;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

/// Runs the solver to convergence or cfg.max_iters. The result equals x0
/// bit-for-bit on the observed entries and the reconstruction elsewhere.
SolveResult solve(const DenseTensor& x0, const ObservationMask& mask, std::vector<ModeRegularizer> regularizers,
                  const SolverConfig& cfg, const IterationObserver& observer = {});

/// One APG sweep (core, then factors in ascending order), restart check,
/// feedback. Exposed for step-level inspection; solve() loops over it.
IterationRecord iterate(SolverState& state, const DenseTensor& x0, const ObservationMask& mask,
                        const SolverConfig& cfg);

}  // namespace strtd
