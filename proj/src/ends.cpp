#include "vzcert/ends.hpp"

#include <cmath>

#include <json.hpp>

#include "vzcert/errors.hpp"

namespace vzcert {

const char* end_sign_name(end_sign s) {
  return s == end_sign::preserves ? "preserves" : "flips";
}

end_sign end_action(const quasi_action_ctx& ctx, const elem& g) {
  double d0 = std::fabs(star(ctx, g, 0.0));
  double x0 = ctx.derived.lg_of(d0) + 1.0;
  int pos = 0, neg = 0;
  for (int i = 0; i <= 10; ++i) {
    double v = star(ctx, g, x0 + static_cast<double>(i));
    // the stability argument needs images safely away from the origin
    if (std::fabs(v) <= ctx.derived.l)
      fail(errc::inconclusive, "end_action: image too close to the origin at " + key_string(g));
    (v > 0.0 ? pos : neg) += 1;
  }
  if (pos == 11) return end_sign::preserves;
  if (neg == 11) return end_sign::flips;
  fail(errc::inconclusive, "end_action: mixed probe signs at " + key_string(g));
}

end_report end_homomorphism_check(const quasi_action_ctx& ctx, int radius) {
  if (radius < 0 || radius > ctx.b->radius) fail(errc::precondition, "end_homomorphism_check: bad radius");
  end_report r;
  for (std::size_t v = 0; v < ctx.b->verts.size(); ++v) {
    if (ctx.b->dist[v] > radius) continue;
    const elem& g = ctx.b->verts[v];
    end_sign s = end_action(ctx, g);
    r.signs.emplace_back(g, s);
    if (s == end_sign::preserves) r.kernel.push_back(g);
  }
  for (const auto& [g, sg] : r.signs) {
    for (const auto& [h, sh] : r.signs) {
      if (end_action(ctx, ctx.model->multiply(g, h)) != sg * sh)
        r.homomorphism_violations.emplace_back(g, h);
    }
  }
  return r;
}

bool kernel_member(const quasi_action_ctx& ctx, const elem& g) {
  return end_action(ctx, g) == end_sign::preserves;
}

bool no_flip_check(const quasi_action_ctx& ctx, const elem& g, double x, double n) {
  if (!(n > ctx.derived.n_threshold))
    fail(errc::precondition, "no_flip_check: n must exceed the threshold");
  return star(ctx, g, x) < star(ctx, g, x + n);
}

std::string end_report::json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json ss = nlohmann::ordered_json::array();
  for (const auto& [g, s] : signs) {
    nlohmann::ordered_json e;
    e["element"] = key_string(g);
    e["sign"] = end_sign_name(s);
    ss.push_back(std::move(e));
  }
  j["signs"] = std::move(ss);
  nlohmann::ordered_json vs = nlohmann::ordered_json::array();
  for (const auto& [g, h] : homomorphism_violations)
    vs.push_back({{"g", key_string(g)}, {"h", key_string(h)}});
  j["homomorphism_violations"] = std::move(vs);
  nlohmann::ordered_json ks = nlohmann::ordered_json::array();
  for (const elem& g : kernel) ks.push_back(key_string(g));
  j["kernel"] = std::move(ks);
  j["kernel_index"] = kernel_index();
  return j.dump(2);
}

}  // namespace vzcert
