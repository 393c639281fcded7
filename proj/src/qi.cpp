#include "vzcert/qi.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "json.hpp"

namespace vzcert {

qi_map builtin_qi(const group_model& m) {
  auto [lambda, epsilon] = m.claimed_constants();
  return qi_map{&m, lambda, epsilon};
}

qi_map builtin_qi(const group_model& m, double lambda, double epsilon) {
  if (lambda < 1.0 || epsilon < 0.0) {
    fail(errc::precondition, "claimed constants want lambda >= 1 and epsilon >= 0");
  }
  return qi_map{&m, lambda, epsilon};
}

namespace {

// Full restricted BFS from one source; dists[j] < 0 marks unreachable.
void bfs_all(const ball& b, int src, std::vector<int>& dists) {
  dists.assign(b.verts.size(), -1);
  dists[static_cast<std::size_t>(src)] = 0;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (auto [gi, w] : b.adj[static_cast<std::size_t>(v)]) {
      (void)gi;
      if (dists[static_cast<std::size_t>(w)] >= 0) continue;
      dists[static_cast<std::size_t>(w)] = dists[static_cast<std::size_t>(v)] + 1;
      queue.push_back(w);
    }
  }
}

struct scan_partial {
  double need_eps = 0.0;  // max over pairs of the epsilon both inequalities require
  std::uint64_t pairs = 0;
  std::uint64_t violations = 0;
  std::vector<qi_violation> kept;
};

// Pair scan rooted at one source; pairs (src, j) with j > src keep each
// unordered pair exactly once.
scan_partial scan_source(const ball& b, const std::vector<double>& phis, double lambda,
                         double epsilon, int src, std::vector<int>& dists) {
  scan_partial part;
  bfs_all(b, src, dists);
  auto si = static_cast<std::size_t>(src);
  for (std::size_t j = si + 1; j < b.verts.size(); ++j) {
    int dij = dists[j];
    if (dij < 0) continue;
    if (std::min(b.dist[si], b.dist[j]) + dij > b.radius) continue;  // not certified exact
    ++part.pairs;
    double gap = std::fabs(phis[si] - phis[j]);
    double d = static_cast<double>(dij);
    // lower: gap >= d/lambda - eps, upper: gap <= lambda d + eps
    part.need_eps = std::max(part.need_eps, d / lambda - gap);
    part.need_eps = std::max(part.need_eps, gap - lambda * d);
    bool lower_bad = gap < d / lambda - epsilon;
    bool upper_bad = gap > lambda * d + epsilon;
    if (lower_bad || upper_bad) {
      ++part.violations;
      if (part.kept.size() < violation_keep) {
        qi_violation v;
        v.a = b.verts[si];
        v.b = b.verts[j];
        v.dist = dij;
        v.image_gap = gap;
        v.lower = lower_bad;
        v.slack = lower_bad ? gap - (d / lambda - epsilon) : (lambda * d + epsilon) - gap;
        part.kept.push_back(v);
      }
    }
  }
  return part;
}

}  // namespace

qi_report verify_qi(const ball& b, const qi_map& q, exec policy) {
  if (b.verts.size() > verify_vertex_cap) {
    fail(errc::resource_limit,
         "pair scan over " + std::to_string(b.verts.size()) + " vertices exceeds the cap");
  }
  const int n = static_cast<int>(b.verts.size());

  qi_report r;
  r.claimed_lambda = q.lambda;
  r.claimed_epsilon = q.epsilon;
  r.tight_lambda = q.lambda;
  r.radius = b.radius;

  std::vector<double> phis(b.verts.size());
  for (std::size_t i = 0; i < b.verts.size(); ++i) phis[i] = q(b.verts[i]);
  r.min_phi = *std::min_element(phis.begin(), phis.end());
  r.max_phi = *std::max_element(phis.begin(), phis.end());

  // image density: half the largest gap between consecutive image values
  {
    std::vector<double> sorted = phis;
    std::sort(sorted.begin(), sorted.end());
    double maxgap = 0.0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      maxgap = std::max(maxgap, sorted[i] - sorted[i - 1]);
    }
    r.image_density = maxgap / 2.0;
  }

  snap_index snap = make_snap_index(b, q, 0.0);
  r.density_k = density_roundtrip(b, snap, q);

  std::vector<scan_partial> parts(static_cast<std::size_t>(n));
  if (policy == exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      std::vector<int> dists;
#pragma omp for schedule(dynamic, 8)
      for (int i = 0; i < n; ++i) {
        parts[static_cast<std::size_t>(i)] = scan_source(b, phis, q.lambda, q.epsilon, i, dists);
      }
    }
#else
    policy = exec::serial;
#endif
  }
  if (policy == exec::serial) {
    std::vector<int> dists;
    for (int i = 0; i < n; ++i) {
      parts[static_cast<std::size_t>(i)] = scan_source(b, phis, q.lambda, q.epsilon, i, dists);
    }
  }

  // deterministic merge in source id order
  for (const scan_partial& p : parts) {
    r.tight_epsilon = std::max(r.tight_epsilon, p.need_eps);
    r.pairs_checked += p.pairs;
    r.violation_count += p.violations;
    for (const qi_violation& v : p.kept) {
      if (r.violations.size() < violation_keep) r.violations.push_back(v);
    }
  }
  r.tight_epsilon = std::max(0.0, r.tight_epsilon);
  r.verified = r.violation_count == 0;
  return r;
}

snap_index make_snap_index(const ball& b, const qi_map& q, double margin) {
  snap_index s;
  s.b = &b;
  s.margin = margin;
  s.entries.reserve(b.verts.size());
  for (std::size_t i = 0; i < b.verts.size(); ++i) {
    s.entries.push_back(snap_entry{q(b.verts[i]), b.dist[i], static_cast<int>(i)});
  }
  std::sort(s.entries.begin(), s.entries.end(), [&](const snap_entry& x, const snap_entry& y) {
    if (x.phi != y.phi) return x.phi < y.phi;
    if (x.len != y.len) return x.len < y.len;
    return b.verts[static_cast<std::size_t>(x.id)] < b.verts[static_cast<std::size_t>(y.id)];
  });
  s.group_first.resize(s.entries.size());
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    s.group_first[i] = (i > 0 && s.entries[i - 1].phi == s.entries[i].phi) ? s.group_first[i - 1] : i;
  }
  s.min_phi = s.entries.front().phi;
  s.max_phi = s.entries.back().phi;
  return s;
}

int snap_id(const snap_index& s, double x) {
  if (x < s.min_phi - s.margin || x > s.max_phi + s.margin) {
    fail(errc::out_of_range, "snap target " + std::to_string(x) + " is outside the image range");
  }
  auto it = std::lower_bound(s.entries.begin(), s.entries.end(), x,
                             [](const snap_entry& e, double v) { return e.phi < v; });
  std::size_t hi = static_cast<std::size_t>(it - s.entries.begin());
  if (hi == s.entries.size()) return s.entries[s.group_first[hi - 1]].id;
  if (hi == 0) return s.entries[0].id;
  std::size_t lo = s.group_first[hi - 1];
  double dlo = x - s.entries[lo].phi, dhi = s.entries[hi].phi - x;
  if (dlo < dhi) return s.entries[lo].id;
  if (dhi < dlo) return s.entries[hi].id;
  // image tie: shorter word, then smaller key
  const snap_entry &a = s.entries[lo], &c = s.entries[hi];
  if (a.len != c.len) return a.len < c.len ? a.id : c.id;
  return s.b->verts[static_cast<std::size_t>(a.id)] < s.b->verts[static_cast<std::size_t>(c.id)]
             ? a.id
             : c.id;
}

namespace {

// Early-exit restricted BFS distance; the ball is connected so this always
// terminates with a value.
int bfs_distance(const ball& b, int src, int dst) {
  if (src == dst) return 0;
  std::vector<int> d(b.verts.size(), -1);
  d[static_cast<std::size_t>(src)] = 0;
  std::deque<int> queue{src};
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (auto [gi, w] : b.adj[static_cast<std::size_t>(v)]) {
      (void)gi;
      if (d[static_cast<std::size_t>(w)] >= 0) continue;
      d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1;
      if (w == dst) return d[static_cast<std::size_t>(w)];
      queue.push_back(w);
    }
  }
  fail(errc::precondition, "ball is not connected");
}

}  // namespace

double density_roundtrip(const ball& b, const snap_index& s, const qi_map& q) {
  double k = 0.0;
  for (std::size_t i = 0; i < b.verts.size(); ++i) {
    int target = snap_id(s, q(b.verts[i]));
    if (target == static_cast<int>(i)) continue;
    k = std::max(k, static_cast<double>(bfs_distance(b, static_cast<int>(i), target)));
  }
  return k;
}

elem quasi_inverse_eval(const ball& b, const qi_map& q, double x) {
  snap_index s = make_snap_index(b, q, 0.0);
  s.margin = density_roundtrip(b, s, q) + q.epsilon;
  return b.verts[static_cast<std::size_t>(snap_id(s, x))];
}

namespace {

nlohmann::ordered_json violation_json(const qi_violation& v) {
  nlohmann::ordered_json j;
  j["a"] = key_string(v.a);
  j["b"] = key_string(v.b);
  j["dist"] = v.dist;
  j["image_gap"] = v.image_gap;
  j["side"] = v.lower ? "lower" : "upper";
  j["slack"] = v.slack;
  return j;
}

}  // namespace

std::string qi_report::json() const {
  nlohmann::ordered_json j;
  j["verified"] = verified;
  j["claimed_lambda"] = claimed_lambda;
  j["claimed_epsilon"] = claimed_epsilon;
  j["tight_lambda"] = tight_lambda;
  j["tight_epsilon"] = tight_epsilon;
  j["density_k"] = density_k;
  j["image_density"] = image_density;
  j["min_phi"] = min_phi;
  j["max_phi"] = max_phi;
  j["radius"] = radius;
  j["pairs_checked"] = pairs_checked;
  j["violation_count"] = violation_count;
  j["violations"] = nlohmann::ordered_json::array();
  for (const qi_violation& v : violations) j["violations"].push_back(violation_json(v));
  return j.dump(2) + "\n";
}

}  // namespace vzcert
