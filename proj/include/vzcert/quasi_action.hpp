#pragma once

#include <array>
#include <vector>

#include "vzcert/qi.hpp"

namespace vzcert {

// Constants derived from the embedding constants. All later thresholds are
// stated in terms of these; they are computed once per context with the
// effective epsilon (see quasi_action_ctx).
struct derived_constants {
  double lambda = 1.0;
  double epsilon = 0.0;
  double l = 0.0;            // lambda^2 + lambda*eps + eps
  double n_threshold = 0.0;  // lambda^2*l + lambda*eps + lambda^2*eps
  double lg = 0.0;           // lg_of(d0) for the d0 passed at derivation

  // Distance past which an element acts with a constant end sign, as a
  // function of d0 = |g*0|.
  double lg_of(double d0) const {
    return lambda * lambda *
           (lambda * lambda + lambda * epsilon + 3.0 * epsilon + d0 + 1.0);
  }
};

derived_constants derive_constants(double lambda, double epsilon, double d0 = 0.0);

// Everything needed to evaluate g*x = phi(g . snap(x)) over a budgeted range:
// points |x| <= x_max on the half-integer grid, elements in B(w_max).
// Construction scans that budget and throws ball_too_small if any snap or
// translate would leave the ball, so star never fails inside the budget.
struct quasi_action_ctx {
  const group_model* model = nullptr;
  const ball* b = nullptr;
  qi_map qi;
  double lambda = 1.0;   // verified constants of the embedding
  double epsilon = 0.0;
  double density_k = 0.0;
  double eps_eff = 0.0;  // max(epsilon, density_k), used in every checked bound
  derived_constants derived;
  snap_index snap;
  double x_max = 0.0;
  int w_max = 0;
  std::vector<elem> range_elements;  // B(w_max) in ball (BFS/key) order
};

quasi_action_ctx make_ctx(const ball& b, const qi_map& q, double x_max, int w_max);

// The quasi-action of g on the line.
double star(const quasi_action_ctx& ctx, const elem& g, double x);

// Inclusive grid lo, lo+step, ..., hi (count-based, no drift).
std::vector<double> point_grid(double lo, double hi, double step = 0.5);

struct property_violation {
  int property = 0;  // 1..4
  elem g, h;         // h only used by property 1
  double x = 0.0, y = 0.0;
  double observed = 0.0;
  double bound = 0.0;
};

struct property_witness {
  elem g, h;
  double x = 0.0, y = 0.0;
  double slack = 0.0;
};

struct property_report {
  bool passed = false;
  double lambda = 0.0, epsilon = 0.0, eps_eff = 0.0;
  // Worst (minimal) slack per property; properties 1-3 pass at slack >= 0,
  // property 4 is a strict inequality and needs slack > 0.
  std::array<double, 4> worst_slack{};
  std::array<property_witness, 4> worst{};
  std::uint64_t checks = 0;
  std::uint64_t violation_count = 0;
  std::vector<property_violation> violations;

  std::string json() const;
};

// Checks, over all sampled elements and grid points:
//   (1) |(gh)*x - g*(h*x)|            <= eps_eff + lambda*eps_eff
//   (2) |e*x - x|                     <= eps_eff
//   (3) |x-y|/lambda^2 - eps_eff/lambda - eps_eff <= |g*x - g*y|
//                                     <= lambda^2 |x-y| + lambda*eps_eff + eps_eff
//   (4) d_Gamma(g, snap(g*0))         <  lambda
property_report check_four_properties(const quasi_action_ctx& ctx,
                                      const std::vector<elem>& elements,
                                      const std::vector<double>& points,
                                      exec policy = exec::serial);

// Worst gap left by the image of [a,b] (sampled at the given step) inside
// [min(g*a,g*b), max(g*a,g*b)]: every point of that interval should sit
// within derived.l of some sampled g*t.
double pass_close_gap(const quasi_action_ctx& ctx, const elem& g, double a,
                      double b, double step = 0.25);

}  // namespace vzcert
