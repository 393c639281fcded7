#include "vzcert/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include <json.hpp>

namespace vzcert {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_px(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double translation_threshold(const quasi_action_ctx& ctx) {
  const double lam = ctx.lambda, eps = ctx.eps_eff;
  const double n = ctx.derived.n_threshold + 1.0;
  return lam * (eps + lam * lam * (eps / lam + lam * eps + 2.0 * eps + n));
}

elem find_translation_element(const quasi_action_ctx& ctx) {
  const ball& b = *ctx.b;
  const double threshold = translation_threshold(ctx);
  for (int d = 0; d <= b.radius; ++d) {
    if (static_cast<double>(d) <= threshold) continue;
    std::vector<int> ids = b.sphere(d);
    std::sort(ids.begin(), ids.end(), [&](int x, int y) { return b.verts[static_cast<std::size_t>(x)] < b.verts[static_cast<std::size_t>(y)]; });
    for (int id : ids) {
      const elem& g = b.verts[static_cast<std::size_t>(id)];
      if (!(star(ctx, g, 0.0) > 0.0)) continue;
      if (!kernel_member(ctx, g)) continue;
      return g;
    }
  }
  fail(errc::not_found, "find_translation_element: no candidate beyond threshold " + fmt(threshold));
}

orbit_report make_orbit_report(const quasi_action_ctx& ctx, const elem& g, int z_max) {
  if (z_max < 1) fail(errc::precondition, "orbit: z_max must be positive");
  orbit_report r;
  r.g = g;
  r.z_max = z_max;
  r.positions.assign(2 * static_cast<std::size_t>(z_max) + 1, 0.0);
  const std::size_t mid = static_cast<std::size_t>(z_max);
  for (std::size_t i = mid; i + 1 < r.positions.size(); ++i)
    r.positions[i + 1] = star(ctx, g, r.positions[i]);
  elem ginv = ctx.model->inverse(g);
  for (std::size_t i = mid; i > 0; --i)
    r.positions[i - 1] = star(ctx, ginv, r.positions[i]);

  r.monotone = true;
  r.min_gap = r.positions[1] - r.positions[0];
  r.max_gap = r.min_gap;
  for (std::size_t i = 0; i + 1 < r.positions.size(); ++i) {
    double gap = r.positions[i + 1] - r.positions[i];
    r.min_gap = std::min(r.min_gap, gap);
    r.max_gap = std::max(r.max_gap, gap);
    if (!(gap > 0.0)) r.monotone = false;
  }
  return r;
}

bool infinite_order_check(const quasi_action_ctx& ctx, const orbit_report& orbit) {
  const double n = ctx.derived.n_threshold + 1.0;
  const std::size_t mid = static_cast<std::size_t>(orbit.z_max);
  elem p = ctx.model->identity();
  const elem e = ctx.model->identity();
  for (int z = 1; z <= orbit.z_max; ++z) {
    double need = static_cast<double>(z) * n;
    if (std::fabs(orbit.positions[mid + static_cast<std::size_t>(z)]) < need) return false;
    if (std::fabs(orbit.positions[mid - static_cast<std::size_t>(z)]) < need) return false;
    p = ctx.model->multiply(p, orbit.g);
    if (p == e) return false;
  }
  return true;
}

namespace {

// Orbit elements g^z, |z| <= z_max, as ball ids; ball_too_small if any power
// leaves the ball.
std::vector<int> orbit_ids(const group_model& m, const ball& b, const elem& g, int z_max) {
  std::vector<int> ids;
  ids.push_back(b.id_of(b.center));
  elem pos = g, neg = m.inverse(g);
  for (int z = 1; z <= z_max; ++z) {
    for (const elem* e : {&pos, &neg}) {
      auto it = b.index.find(*e);
      if (it == b.index.end()) fail(errc::ball_too_small, "orbit power leaves the ball at |z|=" + std::to_string(z));
      ids.push_back(it->second);
    }
    if (z < z_max) {
      pos = m.multiply(pos, g);
      neg = m.multiply(neg, m.inverse(g));
    }
  }
  return ids;
}

}  // namespace

double quasi_density_constant(const group_model& m, const ball& b, const elem& g, int z_max) {
  std::vector<int> sources = orbit_ids(m, b, g, z_max);
  int maxlen = 0;
  for (int id : sources) maxlen = std::max(maxlen, b.dist[static_cast<std::size_t>(id)]);
  const int restrict_r = b.radius - maxlen;
  if (restrict_r < 0) fail(errc::ball_too_small, "quasi-density: orbit span exceeds the ball radius");

  std::vector<int> d(b.verts.size(), -1);
  std::deque<int> q;
  for (int id : sources) {
    if (d[static_cast<std::size_t>(id)] == -1) {
      d[static_cast<std::size_t>(id)] = 0;
      q.push_back(id);
    }
  }
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (auto [gen, w] : b.adj[static_cast<std::size_t>(v)]) {
      if (d[static_cast<std::size_t>(w)] == -1) {
        d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1;
        q.push_back(w);
      }
    }
  }
  int k = 0;
  for (std::size_t v = 0; v < b.verts.size(); ++v) {
    if (b.dist[v] > restrict_r) continue;
    if (d[v] < 0) fail(errc::precondition, "quasi-density: vertex unreachable from the orbit");
    k = std::max(k, d[v]);
  }
  return static_cast<double>(k);
}

namespace {

struct union_find {
  std::vector<int> parent;
  explicit union_find(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

long long coset_count(const group_model& m, const ball& b, const elem& g, double k) {
  if (k < 0.0) fail(errc::precondition, "coset_count: negative density constant");
  const int ck = static_cast<int>(std::ceil(k));
  if (ck > b.radius) fail(errc::ball_too_small, "coset_count: B(ceil(k)) exceeds the ball");
  if (b.radius < 3 * ck) fail(errc::indeterminate, "coset_count: radius below 3*ceil(k), membership undecidable");
  const int cap = b.radius - ck;

  // nonzero powers of g with word length within the enumeration cap
  std::vector<elem> powers;
  for (int dir = 0; dir < 2; ++dir) {
    elem step = dir == 0 ? g : m.inverse(g);
    elem p = step;
    while (true) {
      auto it = b.index.find(p);
      if (it == b.index.end()) break;
      if (b.dist[static_cast<std::size_t>(it->second)] > cap) break;
      powers.push_back(p);
      p = m.multiply(p, step);
    }
  }

  std::vector<int> region;  // ball ids with dist <= ceil(k), in id order
  std::vector<int> local(b.verts.size(), -1);
  for (std::size_t v = 0; v < b.verts.size(); ++v) {
    if (b.dist[v] <= ck) {
      local[v] = static_cast<int>(region.size());
      region.push_back(static_cast<int>(v));
    }
  }

  union_find uf(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) {
    const elem& v = b.verts[static_cast<std::size_t>(region[i])];
    for (const elem& p : powers) {
      elem w = m.multiply(p, v);
      auto it = b.index.find(w);
      if (it == b.index.end()) continue;
      int lw = local[static_cast<std::size_t>(it->second)];
      if (lw >= 0) uf.unite(static_cast<int>(i), lw);
    }
  }
  long long count = 0;
  for (std::size_t i = 0; i < region.size(); ++i)
    if (uf.find(static_cast<int>(i)) == static_cast<int>(i)) ++count;
  return count;
}

double quasi_density_constant(const quasi_action_ctx& ctx, const elem& g, int z_max) {
  return quasi_density_constant(*ctx.model, *ctx.b, g, z_max);
}

long long coset_count(const quasi_action_ctx& ctx, const elem& g, double k) {
  return coset_count(*ctx.model, *ctx.b, g, k);
}

std::string orbit_report::csv() const {
  std::string out = "z,position\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out += std::to_string(static_cast<int>(i) - z_max);
    out += ',';
    out += fmt(positions[i]);
    out += '\n';
  }
  return out;
}

std::string orbit_report::svg() const {
  const double width = 800.0, height = 120.0, margin = 40.0, axis_y = 70.0;
  double lo = positions.empty() ? 0.0 : *std::min_element(positions.begin(), positions.end());
  double hi = positions.empty() ? 0.0 : *std::max_element(positions.begin(), positions.end());
  if (hi <= lo) hi = lo + 1.0;
  auto px = [&](double x) { return margin + (x - lo) / (hi - lo) * (width - 2.0 * margin); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"120\" viewBox=\"0 0 800 120\">\n";
  s += "  <line x1=\"" + fmt_px(margin) + "\" y1=\"" + fmt_px(axis_y) + "\" x2=\"" + fmt_px(width - margin) + "\" y2=\"" + fmt_px(axis_y) + "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    double x = px(positions[i]);
    s += "  <circle cx=\"" + fmt_px(x) + "\" cy=\"" + fmt_px(axis_y) + "\" r=\"4\" fill=\"steelblue\"/>\n";
    if (static_cast<int>(i) - z_max == 0)
      s += "  <circle cx=\"" + fmt_px(x) + "\" cy=\"" + fmt_px(axis_y) + "\" r=\"7\" fill=\"none\" stroke=\"firebrick\"/>\n";
  }
  s += "  <text x=\"" + fmt_px(margin) + "\" y=\"" + fmt_px(height - 10.0) + "\" font-size=\"12\">" + fmt(lo) + "</text>\n";
  s += "  <text x=\"" + fmt_px(width - margin) + "\" y=\"" + fmt_px(height - 10.0) + "\" font-size=\"12\" text-anchor=\"end\">" + fmt(hi) + "</text>\n";
  s += "  <text x=\"" + fmt_px(width / 2.0) + "\" y=\"20\" font-size=\"12\" text-anchor=\"middle\">orbit of " + key_string(g) + " on the line</text>\n";
  s += "</svg>\n";
  return s;
}

std::string certificate::json() const {
  nlohmann::ordered_json j;
  j["schema"] = "vzcert.certificate.v1";
  j["group"] = nlohmann::ordered_json::parse(spec.json());
  j["verdict"] = verdict;
  nlohmann::ordered_json c;
  c["lambda"] = lambda;
  c["epsilon"] = epsilon;
  c["density_k"] = density_k;
  c["eps_eff"] = eps_eff;
  c["l"] = derived.l;
  c["n_threshold"] = derived.n_threshold;
  c["n"] = derived.n_threshold + 1.0;
  c["n_prime"] = n_prime;
  j["constants"] = std::move(c);
  j["g"] = key_string(g);
  j["g_length"] = g_length;
  j["z_max"] = z_max;
  j["quasi_density_k"] = quasi_density_k;
  j["coset_count"] = cosets;
  j["radius"] = radius;
  j["verify_radius"] = verify_radius;
  nlohmann::ordered_json cs = nlohmann::ordered_json::array();
  for (const check_result& r : checks) {
    nlohmann::ordered_json e;
    e["name"] = r.name;
    e["passed"] = r.passed;
    e["detail"] = r.detail;
    cs.push_back(std::move(e));
  }
  j["checks"] = std::move(cs);
  return j.dump(2);
}

certificate certify_virtually_z(const group_spec& spec, certify_params params) {
  certificate cert;
  cert.spec = spec;
  cert.verdict = "Inconclusive";
  cert.z_max = params.z_max;

  std::unique_ptr<group_model> model;
  qi_map q;
  try {
    model = make_model(spec);
    auto [cl, ce] = model->claimed_constants();
    double lam = params.lambda_override > 0.0 ? params.lambda_override : cl;
    double eps = params.epsilon_override >= 0.0 ? params.epsilon_override : ce;
    q = builtin_qi(*model, lam, eps);
  } catch (const error& e) {
    cert.checks.push_back({"group_spec", false, e.what()});
    return cert;
  }
  cert.lambda = q.lambda;
  cert.epsilon = q.epsilon;

  // Stage 1: exhaustive pair scan on a ball small enough to afford it.
  int vr = std::max(params.verify_radius, 4);
  qi_report ver;
  while (true) {
    try {
      ball vb = build_ball(*model, model->identity(), vr, params.vertex_cap);
      ver = verify_qi(vb, q, params.policy);
      break;
    } catch (const error& e) {
      if (e.code() == errc::resource_limit && vr > 4) {
        vr /= 2;
        continue;
      }
      cert.checks.push_back({"verify_qi", false, e.what()});
      return cert;
    }
  }
  cert.verify_radius = vr;
  cert.checks.push_back({"verify_qi", ver.verified,
                         "radius=" + std::to_string(vr) + " tight_epsilon=" + fmt(ver.tight_epsilon) +
                             " violations=" + std::to_string(ver.violation_count)});
  if (!ver.verified) return cert;

  // Stage 2: evaluation ball, regrown by doubling whenever a stage certifies
  // it cannot answer at the current radius.
  int radius = std::max(params.initial_radius, 4);
  std::vector<check_result> attempt;
  while (true) {
    ball b;
    try {
      b = build_ball(*model, model->identity(), radius, params.vertex_cap);
    } catch (const error& e) {
      cert.radius = radius;
      cert.checks.push_back({"evaluation_ball", false, e.what()});
      return cert;
    }
    cert.radius = b.radius;
    const bool saturated = b.spheres[static_cast<std::size_t>(b.radius)].empty();
    attempt.clear();
    std::string stage = "quasi_action_ctx";
    try {
      quasi_action_ctx ctx = make_ctx(b, q, params.x_max, params.w_max);
      cert.density_k = ctx.density_k;
      cert.eps_eff = ctx.eps_eff;
      cert.derived = ctx.derived;

      stage = "four_properties";
      property_report pr = check_four_properties(ctx, ctx.range_elements,
                                                 point_grid(-params.x_max, params.x_max, params.grid_step),
                                                 params.policy);
      attempt.push_back({"four_properties", pr.passed,
                         "checks=" + std::to_string(pr.checks) + " violations=" + std::to_string(pr.violation_count)});
      if (!pr.passed) break;

      stage = "end_homomorphism";
      end_report er = end_homomorphism_check(ctx, params.w_max);
      bool hom_ok = er.homomorphism_violations.empty();
      attempt.push_back({"end_homomorphism", hom_ok, "kernel_index=" + std::to_string(er.kernel_index())});
      if (!hom_ok) break;

      stage = "find_translation_element";
      elem g = find_translation_element(ctx);
      int glen = b.dist[static_cast<std::size_t>(b.id_of(g))];
      attempt.push_back({"find_translation_element", true,
                         "g=" + key_string(g) + " length=" + std::to_string(glen) +
                             " threshold=" + fmt(translation_threshold(ctx))});

      stage = "orbit_monotone";
      orbit_report orb = make_orbit_report(ctx, g, params.z_max);
      const double n = ctx.derived.n_threshold + 1.0;
      bool mono = orb.monotone && orb.min_gap >= n;
      attempt.push_back({"orbit_monotone", mono,
                         "min_gap=" + fmt(orb.min_gap) + " max_gap=" + fmt(orb.max_gap) + " n=" + fmt(n)});
      if (!mono) break;

      stage = "infinite_order";
      bool inf_ok = infinite_order_check(ctx, orb);
      attempt.push_back({"infinite_order", inf_ok, "z_max=" + std::to_string(params.z_max)});
      if (!inf_ok) break;

      stage = "quasi_density";
      double k = quasi_density_constant(ctx, g, params.z_max);
      attempt.push_back({"quasi_density", true, "k=" + fmt(k)});

      stage = "coset_count";
      long long cosets = coset_count(ctx, g, k);
      attempt.push_back({"coset_count", cosets >= 1, "cosets=" + std::to_string(cosets)});
      if (cosets < 1) break;

      cert.g = g;
      cert.g_length = glen;
      cert.n_prime = orb.max_gap;
      cert.orbit = std::move(orb);
      cert.quasi_density_k = k;
      cert.cosets = cosets;
      cert.verdict = "VirtuallyZ";
      for (check_result& r : attempt) cert.checks.push_back(std::move(r));
      return cert;
    } catch (const error& e) {
      bool retryable = e.code() == errc::ball_too_small || e.code() == errc::out_of_range ||
                       e.code() == errc::not_found || e.code() == errc::indeterminate;
      if (retryable && !saturated) {
        radius *= 2;
        continue;
      }
      attempt.push_back({stage, false, e.what()});
      break;
    }
  }
  // a named check failed or a stage threw: commit the final attempt's results
  for (check_result& r : attempt) cert.checks.push_back(std::move(r));
  return cert;
}

}  // namespace vzcert
