#include "vzcert/quasi_action.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vzcert/errors.hpp"

namespace vzcert {

derived_constants derive_constants(double lambda, double epsilon, double d0) {
  if (lambda < 1.0 || epsilon < 0.0 || d0 < 0.0) fail(errc::precondition, "derive_constants: need lambda >= 1, epsilon >= 0, d0 >= 0");
  derived_constants d;
  d.lambda = lambda;
  d.epsilon = epsilon;
  d.l = lambda * lambda + lambda * epsilon + epsilon;
  d.n_threshold = lambda * lambda * d.l + lambda * epsilon + lambda * lambda * epsilon;
  d.lg = d.lg_of(d0);
  return d;
}

std::vector<double> point_grid(double lo, double hi, double step) {
  if (step <= 0.0 || hi < lo) fail(errc::precondition, "point_grid: bad range");
  std::vector<double> pts;
  auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  pts.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) pts.push_back(lo + static_cast<double>(i) * step);
  return pts;
}

quasi_action_ctx make_ctx(const ball& b, const qi_map& q, double x_max, int w_max) {
  if (q.lambda < 1.0 || q.epsilon < 0.0) fail(errc::invalid_spec, "ctx: lambda >= 1 and epsilon >= 0 required");
  if (x_max < 0.0 || w_max < 0 || w_max > b.radius) fail(errc::precondition, "ctx: bad evaluation budget");

  quasi_action_ctx ctx;
  ctx.model = b.model;
  ctx.b = &b;
  ctx.qi = q;
  ctx.lambda = q.lambda;
  ctx.epsilon = q.epsilon;
  ctx.x_max = x_max;
  ctx.w_max = w_max;

  snap_index probe = make_snap_index(b, q, 0.0);
  ctx.density_k = density_roundtrip(b, probe, q);
  ctx.eps_eff = std::max(ctx.epsilon, ctx.density_k);
  ctx.derived = derive_constants(ctx.lambda, ctx.eps_eff);
  ctx.snap = make_snap_index(b, q, ctx.density_k + ctx.epsilon);

  for (int v = 0; v < static_cast<int>(b.verts.size()); ++v)
    if (b.dist[v] <= w_max) ctx.range_elements.push_back(b.verts[v]);

  // Budget scan: every single-star evaluation over the advertised ranges
  // must stay inside the ball. Nested evaluations can still escape; they
  // throw at use and the caller regrows.
  for (double x : point_grid(-x_max, x_max, 0.5)) {
    int id;
    try {
      id = snap_id(ctx.snap, x);
    } catch (const error& e) {
      if (e.code() == errc::out_of_range) fail(errc::ball_too_small, "ctx: image does not cover the requested point range");
      throw;
    }
    const elem& v = b.verts[static_cast<std::size_t>(id)];
    for (const elem& w : ctx.range_elements) {
      if (!b.contains(ctx.model->multiply(w, v)))
        fail(errc::ball_too_small, "ctx: translate of a snapped point leaves the ball");
    }
  }
  return ctx;
}

double star(const quasi_action_ctx& ctx, const elem& g, double x) {
  int id = snap_id(ctx.snap, x);
  elem gv = ctx.model->multiply(g, ctx.b->verts[static_cast<std::size_t>(id)]);
  auto it = ctx.b->index.find(gv);
  if (it == ctx.b->index.end()) fail(errc::ball_too_small, "star: translate outside the ball");
  return ctx.qi(gv);
}

namespace {

// Per-element partial result of the property scan; merged in element order
// so parallel runs reproduce the serial report bit for bit.
struct prop_partial {
  std::array<double, 4> slack{};
  std::array<property_witness, 4> wit{};
  std::array<bool, 4> seen{};
  std::uint64_t checks = 0;
  std::uint64_t violation_count = 0;
  std::vector<property_violation> violations;

  void record(int prop, const elem& g, const elem& h, double x, double y,
              double observed, double bound, bool strict) {
    ++checks;
    double s = bound - observed;
    int i = prop - 1;
    if (!seen[static_cast<std::size_t>(i)] || s < slack[static_cast<std::size_t>(i)]) {
      seen[static_cast<std::size_t>(i)] = true;
      slack[static_cast<std::size_t>(i)] = s;
      wit[static_cast<std::size_t>(i)] = property_witness{g, h, x, y, s};
    }
    bool bad = strict ? s <= 0.0 : s < 0.0;
    if (bad) {
      ++violation_count;
      if (violations.size() < violation_keep)
        violations.push_back(property_violation{prop, g, h, x, y, observed, bound});
    }
  }
};

void merge_into(prop_partial& acc, const prop_partial& part) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (part.seen[i] && (!acc.seen[i] || part.slack[i] < acc.slack[i])) {
      acc.seen[i] = true;
      acc.slack[i] = part.slack[i];
      acc.wit[i] = part.wit[i];
    }
  }
  acc.checks += part.checks;
  acc.violation_count += part.violation_count;
  for (const property_violation& v : part.violations) {
    if (acc.violations.size() >= violation_keep) break;
    acc.violations.push_back(v);
  }
}

// Properties (1), (3), (4) for one fixed g; (2) is g-independent and runs
// once, serially, in the driver.
prop_partial scan_element(const quasi_action_ctx& ctx, const elem& g,
                          const std::vector<elem>& elements,
                          const std::vector<double>& points,
                          const std::vector<double>& star_g) {
  prop_partial p;
  const double le = ctx.lambda * ctx.eps_eff;
  const double l2 = ctx.lambda * ctx.lambda;
  const elem none = ctx.model->identity();

  for (const elem& h : elements) {
    elem gh = ctx.model->multiply(g, h);
    for (double x : points) {
      double lhs = star(ctx, gh, x);
      double rhs = star(ctx, g, star(ctx, h, x));
      p.record(1, g, h, x, 0.0, std::fabs(lhs - rhs), ctx.eps_eff + le, false);
    }
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d = points[j] - points[i];
      double gap = std::fabs(star_g[j] - star_g[i]);
      p.record(3, g, none, points[i], points[j], gap, l2 * d + le + ctx.eps_eff, false);
      // lower side, rearranged so "observed <= bound" still reads left to right
      p.record(3, g, none, points[i], points[j], d / l2 - ctx.eps_eff / ctx.lambda - ctx.eps_eff, gap, false);
    }
  }

  int sid = snap_id(ctx.snap, star(ctx, g, 0.0));
  auto d4 = word_distance(*ctx.b, g, ctx.b->verts[static_cast<std::size_t>(sid)]);
  if (!d4) fail(errc::ball_too_small, "four properties: uncertified distance for property (4)");
  p.record(4, g, none, 0.0, 0.0, static_cast<double>(*d4), ctx.lambda, true);
  return p;
}

}  // namespace

property_report check_four_properties(const quasi_action_ctx& ctx,
                                      const std::vector<elem>& elements,
                                      const std::vector<double>& points,
                                      exec policy) {
  if (elements.empty() || points.empty()) fail(errc::precondition, "four properties: empty sample");

  property_report r;
  r.lambda = ctx.lambda;
  r.epsilon = ctx.epsilon;
  r.eps_eff = ctx.eps_eff;

  prop_partial acc;
  const elem e = ctx.model->identity();
  for (double x : points)
    acc.record(2, e, e, x, 0.0, std::fabs(star(ctx, e, x) - x), ctx.eps_eff, false);

  // star(g, x) over the grid, reused by property (3).
  auto star_row = [&](const elem& g) {
    std::vector<double> row(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) row[i] = star(ctx, g, points[i]);
    return row;
  };

  const int ng = static_cast<int>(elements.size());
  std::vector<prop_partial> parts(elements.size());
  if (policy == exec::parallel) {
#ifdef _OPENMP
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (int gi = 0; gi < ng; ++gi) {
      try {
        const elem& g = elements[static_cast<std::size_t>(gi)];
        parts[static_cast<std::size_t>(gi)] = scan_element(ctx, g, elements, points, star_row(g));
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
#else
    policy = exec::serial;
#endif
  }
  if (policy == exec::serial) {
    for (int gi = 0; gi < ng; ++gi) {
      const elem& g = elements[static_cast<std::size_t>(gi)];
      parts[static_cast<std::size_t>(gi)] = scan_element(ctx, g, elements, points, star_row(g));
    }
  }
  for (const prop_partial& p : parts) merge_into(acc, p);

  r.worst_slack = acc.slack;
  r.worst = acc.wit;
  r.checks = acc.checks;
  r.violation_count = acc.violation_count;
  r.violations = std::move(acc.violations);
  r.passed = r.violation_count == 0;
  return r;
}

double pass_close_gap(const quasi_action_ctx& ctx, const elem& g, double a,
                      double b, double step) {
  if (b < a || step <= 0.0) fail(errc::precondition, "pass_close_gap: bad interval");
  std::vector<double> image;
  for (double t : point_grid(a, b, step)) image.push_back(star(ctx, g, t));
  double lo = *std::min_element(image.begin(), image.end());
  double hi = *std::max_element(image.begin(), image.end());
  double worst = 0.0;
  for (double p : point_grid(lo, hi, step)) {
    double best = std::fabs(image[0] - p);
    for (double v : image) best = std::min(best, std::fabs(v - p));
    worst = std::max(worst, best);
  }
  return worst;
}

namespace {

nlohmann::ordered_json witness_json(const property_witness& w, bool with_h) {
  nlohmann::ordered_json j;
  j["g"] = key_string(w.g);
  if (with_h) j["h"] = key_string(w.h);
  j["x"] = w.x;
  j["y"] = w.y;
  j["slack"] = w.slack;
  return j;
}

}  // namespace

std::string property_report::json() const {
  nlohmann::ordered_json j;
  j["passed"] = passed;
  j["lambda"] = lambda;
  j["epsilon"] = epsilon;
  j["eps_eff"] = eps_eff;
  j["checks"] = checks;
  j["violation_count"] = violation_count;
  for (int i = 0; i < 4; ++i) {
    nlohmann::ordered_json p = witness_json(worst[static_cast<std::size_t>(i)], i == 0);
    p["worst_slack"] = worst_slack[static_cast<std::size_t>(i)];
    j["property_" + std::to_string(i + 1)] = std::move(p);
  }
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const property_violation& v : violations) {
    nlohmann::ordered_json e;
    e["property"] = v.property;
    e["g"] = key_string(v.g);
    if (v.property == 1) e["h"] = key_string(v.h);
    e["x"] = v.x;
    e["y"] = v.y;
    e["observed"] = v.observed;
    e["bound"] = v.bound;
    vs.push_back(std::move(e));
  }
  j["violations"] = std::move(vs);
  return j.dump(2);
}

}  // namespace vzcert
