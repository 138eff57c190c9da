#include "codedblur/codeopt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "codedblur/fft.hpp"
#include "codedblur/parallel.hpp"

namespace codedblur::codeopt {

CodeObjective CodeObjective::horizontal_default() {
  CodeObjective o;
  for (double s : {8.0, 16.0, 24.0}) {
    o.velocity_set.push_back({s, 0.0});
    o.velocity_set.push_back({-s, 0.0});
  }
  return o;
}

void CodeObjective::validate() const {
  if (direction_weight < 0.0 || speed_weight < 0.0)
    throw std::invalid_argument("objective weights must be >= 0");
  if (velocity_set.empty()) throw std::invalid_argument("velocity set is empty");
  for (const auto& v : velocity_set) {
    const bool has_neg =
        std::any_of(velocity_set.begin(), velocity_set.end(),
                    [&](const recon::MotionHypothesis& u) {
                      return u.vx == -v.vx && u.vy == -v.vy;
                    });
    if (!has_neg)
      throw std::invalid_argument("velocity set must be closed under negation");
  }
}

void OptimizerConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("momentum must be in [0, 1)");
  if (backtrack_factor <= 0.0 || backtrack_factor >= 1.0)
    throw std::invalid_argument("backtrack_factor must be in (0, 1)");
  if (step <= 0.0 || min_step <= 0.0)
    throw std::invalid_argument("step sizes must be positive");
}

double ncc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("ncc: shape mismatch");
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - ma, y = b[i] - mb;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("ncc: zero-variance input");
  return dot / std::sqrt(na * nb);
}

namespace {

/// Kernels and machinery for one schedule evaluation. All kernels live in
/// origin-centered (unshifted) coordinates; NCC and its gradient are invariant
/// to that global pixel permutation.
struct EvalContext {
  int side = 0;
  int count = 0;
  std::vector<cvec> spectra;             // F{h_n,c}, [n*3+c]
  std::vector<std::vector<double>> K;    // per velocity: 3*side^2
  std::vector<double> t;                 // normalized times

  std::vector<double> assemble(const recon::MotionHypothesis& v) const {
    std::vector<double> out(static_cast<size_t>(3) * side * side);
    for (int c = 0; c < 3; ++c) {
      cvec acc(static_cast<size_t>(side) * side, 0.0);
      for (int n = 0; n < count; ++n) {
        cvec s = spectra[static_cast<size_t>(n) * 3 + c];
        apply_shift_phase(s, side, side, v.vy / 2.0 * t[n], v.vx / 2.0 * t[n]);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
      }
      const double inv = 1.0 / count;
      for (auto& x : acc) x *= inv;
      const std::vector<double> res = ifft2_real(acc, side, side);
      std::copy(res.begin(), res.end(),
                out.begin() + static_cast<size_t>(c) * side * side);
    }
    return out;
  }
};

int support_for(const CodeObjective& obj, int kernel_size) {
  double v_max = 0.0;
  for (const auto& v : obj.velocity_set) v_max = std::max(v_max, v.norm());
  return kernel_size + static_cast<int>(std::ceil(v_max)) + 8;
}

std::vector<cvec> embed_spectra(const optics::PSFStack& stack,
                                const std::vector<double>& kernels, int side) {
  const size_t k2 = static_cast<size_t>(stack.kernel_size) * stack.kernel_size;
  std::vector<cvec> spectra(static_cast<size_t>(stack.count) * 3);
  parallel_for(stack.count * 3, [&](int idx) {
    std::vector<double> embed(static_cast<size_t>(side) * side, 0.0);
    embed_centered_at_origin(kernels.data() + static_cast<size_t>(idx) * k2,
                             stack.kernel_size, embed, side, side);
    spectra[idx] = fft2_real(embed, side, side);
  });
  return spectra;
}

EvalContext build_context(const optics::PSFStack& stack, const CodeObjective& obj) {
  EvalContext ctx;
  ctx.side = support_for(obj, stack.kernel_size);
  ctx.count = stack.count;
  ctx.t.resize(stack.count);
  for (int n = 0; n < stack.count; ++n)
    ctx.t[n] = optics::normalized_time(n, stack.count);
  ctx.spectra = embed_spectra(stack, stack.kernels, ctx.side);
  ctx.K.resize(obj.velocity_set.size());
  parallel_for(static_cast<int>(obj.velocity_set.size()),
               [&](int i) { ctx.K[i] = ctx.assemble(obj.velocity_set[i]); });
  return ctx;
}

int negated_index(const CodeObjective& obj, int i) {
  const auto& v = obj.velocity_set[i];
  for (size_t j = 0; j < obj.velocity_set.size(); ++j)
    if (obj.velocity_set[j].vx == -v.vx && obj.velocity_set[j].vy == -v.vy)
      return static_cast<int>(j);
  throw std::invalid_argument("velocity set must be closed under negation");
}

struct Centered {
  std::vector<double> v;  // mean-subtracted
  double norm2 = 0.0;
};

Centered center(const std::vector<double>& k) {
  Centered c;
  c.v = k;
  double m = 0.0;
  for (double x : c.v) m += x;
  m /= static_cast<double>(c.v.size());
  for (double& x : c.v) {
    x -= m;
    c.norm2 += x * x;
  }
  return c;
}

struct TermAccumulator {
  const CodeObjective& obj;
  std::vector<Centered> centered;
  std::vector<std::vector<double>>* weight;  // optional dJ/dK accumulators

  double direction = 0.0;
  double speed = 0.0;

  double pair_ncc(int i, int j) const {
    const auto& a = centered[i];
    const auto& b = centered[j];
    double dot = 0.0;
    for (size_t p = 0; p < a.v.size(); ++p) dot += a.v[p] * b.v[p];
    if (a.norm2 == 0.0 || b.norm2 == 0.0)
      throw std::invalid_argument("ncc: zero-variance kernel");
    return dot / std::sqrt(a.norm2 * b.norm2);
  }

  /// Adds w * rho^2 for the pair (i, j) and, if weights are requested, the
  /// corresponding dJ/dK contributions (centered inputs make the mean
  /// projection a no-op).
  double add_pair(int i, int j, double w) {
    const double rho = pair_ncc(i, j);
    if (weight) {
      const auto& a = centered[i];
      const auto& b = centered[j];
      const double inv_ab = 1.0 / std::sqrt(a.norm2 * b.norm2);
      const double coeff = 2.0 * w * rho;
      auto& wi = (*weight)[i];
      auto& wj = (*weight)[j];
      for (size_t p = 0; p < a.v.size(); ++p) {
        wi[p] += coeff * (b.v[p] * inv_ab - rho * a.v[p] / a.norm2);
        wj[p] += coeff * (a.v[p] * inv_ab - rho * b.v[p] / b.norm2);
      }
    }
    return rho * rho;
  }

  void run() {
    const int m = static_cast<int>(obj.velocity_set.size());
    // Direction: mean over every v in the set of ncc(K_v, K_-v)^2.
    const double wd = obj.direction_weight / m;
    for (int i = 0; i < m; ++i) direction += add_pair(i, negated_index(obj, i), wd) / m;
    // Speed: mean over unordered distinct pairs excluding negations.
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        if (j != negated_index(obj, i)) pairs.emplace_back(i, j);
    if (!pairs.empty()) {
      const double ws = obj.speed_weight / static_cast<double>(pairs.size());
      for (auto [i, j] : pairs)
        speed += add_pair(i, j, ws) / static_cast<double>(pairs.size());
    }
  }
};

ObjectiveValue evaluate(const EvalContext& ctx, const CodeObjective& obj,
                        std::vector<std::vector<double>>* weight) {
  TermAccumulator acc{obj, {}, weight};
  acc.centered.reserve(ctx.K.size());
  for (const auto& k : ctx.K) acc.centered.push_back(center(k));
  acc.run();
  ObjectiveValue v;
  v.direction_term = acc.direction;
  v.speed_term = acc.speed;
  v.total = obj.direction_weight * acc.direction + obj.speed_weight * acc.speed;
  return v;
}

}  // namespace

ObjectiveValue objective(const optics::DefocusSchedule& schedule,
                         const optics::PhaseMask& mask,
                         const optics::OpticalConfig& config,
                         const CodeObjective& obj) {
  obj.validate();
  const optics::PSFStack stack = optics::psf_stack(mask, config, schedule);
  const EvalContext ctx = build_context(stack, obj);
  return evaluate(ctx, obj, nullptr);
}

std::vector<double> objective_grad(const optics::DefocusSchedule& schedule,
                                   const optics::PhaseMask& mask,
                                   const optics::OpticalConfig& config,
                                   const CodeObjective& obj) {
  obj.validate();
  auto [stack, kernel_grads] = optics::psf_stack_with_grad(mask, config, schedule);
  const EvalContext ctx = build_context(stack, obj);

  std::vector<std::vector<double>> weight(
      ctx.K.size(), std::vector<double>(static_cast<size_t>(3) * ctx.side * ctx.side, 0.0));
  evaluate(ctx, obj, &weight);

  // dK_v/dpsi_n = (1/N) shift(dh_n/dpsi_n, d_n(v)); correlate the dJ/dK weight
  // images against these shifted derivatives via Parseval.
  const std::vector<cvec> grad_spectra = embed_spectra(stack, kernel_grads, ctx.side);
  const int side = ctx.side, count = ctx.count;
  const size_t s2 = static_cast<size_t>(side) * side;

  std::vector<cvec> weight_spectra(ctx.K.size() * 3);
  parallel_for(static_cast<int>(weight_spectra.size()), [&](int idx) {
    const int vi = idx / 3, c = idx % 3;
    std::vector<double> plane(weight[vi].begin() + static_cast<size_t>(c) * s2,
                              weight[vi].begin() + static_cast<size_t>(c + 1) * s2);
    weight_spectra[idx] = fft2_real(plane, side, side);
  });

  const double tau = 2.0 * std::numbers::pi;
  std::vector<double> grad(count, 0.0);
  parallel_for(count, [&](int n) {
    double gsum = 0.0;
    for (size_t vi = 0; vi < ctx.K.size(); ++vi) {
      const auto& v = obj.velocity_set[vi];
      const double dy = v.vy / 2.0 * ctx.t[n];
      const double dx = v.vx / 2.0 * ctx.t[n];
      for (int c = 0; c < 3; ++c) {
        const cvec& w = weight_spectra[vi * 3 + c];
        const cvec& g = grad_spectra[static_cast<size_t>(n) * 3 + c];
        double s = 0.0;
        for (int y = 0; y < side; ++y) {
          const double fy = (y <= side / 2 ? y : y - side) / static_cast<double>(side);
          for (int x = 0; x < side; ++x) {
            const double fx = (x <= side / 2 ? x : x - side) / static_cast<double>(side);
            const std::complex<double> ph = std::polar(1.0, -tau * (fy * dy + fx * dx));
            const size_t i = static_cast<size_t>(y) * side + x;
            s += (std::conj(w[i]) * g[i] * ph).real();
          }
        }
        gsum += s / static_cast<double>(s2);
      }
    }
    grad[n] = gsum / count;
  });
  return grad;
}

OptimizeResult optimize_schedule(const optics::DefocusSchedule& init,
                                 const optics::PhaseMask& mask,
                                 const optics::OpticalConfig& config,
                                 const CodeObjective& obj,
                                 const OptimizerConfig& opt) {
  obj.validate();
  opt.validate();
  init.validate();

  auto clip = [&](std::vector<double>& psi) {
    for (double& v : psi) v = std::clamp(v, init.psi_min, init.psi_max);
  };

  OptimizeResult out;
  out.schedule = init;
  const int n = init.count();
  std::vector<double> momentum(n, 0.0);
  double step = opt.step;

  ObjectiveValue cur = objective(out.schedule, mask, config, obj);
  out.history.push_back({0, cur.total, cur.direction_term, cur.speed_term, step});

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    const std::vector<double> g = objective_grad(out.schedule, mask, config, obj);
    bool accepted = false;
    while (step >= opt.min_step) {
      optics::DefocusSchedule trial = out.schedule;
      for (int i = 0; i < n; ++i)
        trial.psi[i] += opt.momentum * momentum[i] - step * g[i];
      clip(trial.psi);
      const ObjectiveValue val = objective(trial, mask, config, obj);
      if (val.total < cur.total) {
        for (int i = 0; i < n; ++i) momentum[i] = trial.psi[i] - out.schedule.psi[i];
        out.schedule = std::move(trial);
        cur = val;
        out.history.push_back({iter, cur.total, cur.direction_term, cur.speed_term, step});
        accepted = true;
        // Adaptive growth: the backtracking loop is the only brake, so probe
        // larger steps whenever one is accepted.
        step /= opt.backtrack_factor;
        break;
      }
      step *= opt.backtrack_factor;
    }
    if (!accepted) {
      out.reached_min_step = true;
      break;
    }
  }
  return out;
}

std::string history_csv(std::span<const HistoryRow> rows) {
  std::ostringstream os;
  os << "iter,J,direction_term,speed_term,step\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", r.iteration,
                  r.objective, r.direction_term, r.speed_term, r.step);
    os << buf;
  }
  return os.str();
}

}  // namespace codedblur::codeopt
