#pragma once

#include <span>
#include <vector>

#include "codedblur/optics.hpp"
#include "codedblur/reconstruction.hpp"

namespace codedblur::codeopt {

/// Kernel-confusability objective: penalizes effective kernels that look alike
/// across opposite directions (direction term) and across speeds (speed term).
struct CodeObjective {
  std::vector<recon::MotionHypothesis> velocity_set;  // closed under negation
  double direction_weight = 1.0;
  double speed_weight = 0.25;

  /// Horizontal |v| in {8, 16, 24} px, both signs.
  static CodeObjective horizontal_default();
  void validate() const;
};

struct OptimizerConfig {
  int max_iters = 200;
  double step = 0.05;
  double momentum = 0.9;
  double backtrack_factor = 0.5;
  double min_step = 1e-5;

  void validate() const;
};

/// Mean-subtracted normalized cross-correlation of flattened 3-channel
/// kernels, in [-1, 1]. Throws on zero-variance input.
double ncc(std::span<const double> a, std::span<const double> b);

struct ObjectiveValue {
  double total = 0.0;
  double direction_term = 0.0;
  double speed_term = 0.0;
};

/// J = direction_weight * mean_v ncc(K_v, K_-v)^2
///   + speed_weight * mean over unordered pairs {v, v'}, v' != +-v,
///     of ncc(K_v, K_v')^2.
ObjectiveValue objective(const optics::DefocusSchedule& schedule,
                         const optics::PhaseMask& mask,
                         const optics::OpticalConfig& config,
                         const CodeObjective& obj);

/// Exact gradient of J with respect to each psi[n] (chain rule through the
/// analytic PSF derivative).
std::vector<double> objective_grad(const optics::DefocusSchedule& schedule,
                                   const optics::PhaseMask& mask,
                                   const optics::OpticalConfig& config,
                                   const CodeObjective& obj);

struct HistoryRow {
  int iteration = 0;
  double objective = 0.0;
  double direction_term = 0.0;
  double speed_term = 0.0;
  double step = 0.0;
};

struct OptimizeResult {
  optics::DefocusSchedule schedule;
  std::vector<HistoryRow> history;  // row 0 is the initial point
  bool reached_min_step = false;
};

/// Projected gradient descent with momentum. A step is accepted only if J
/// strictly decreases; otherwise the step size is backtracked until accepted
/// or min_step is reached (a normal early stop). Iterates stay inside the
/// schedule bounds.
OptimizeResult optimize_schedule(const optics::DefocusSchedule& init,
                                 const optics::PhaseMask& mask,
                                 const optics::OpticalConfig& config,
                                 const CodeObjective& obj,
                                 const OptimizerConfig& opt);

/// History serialized as "iter,J,direction_term,speed_term,step" CSV.
std::string history_csv(std::span<const HistoryRow> rows);

}  // namespace codedblur::codeopt
