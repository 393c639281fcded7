#include "vzcert/ball.hpp"

#include <algorithm>
#include <deque>

#include "json.hpp"

namespace vzcert {

int ball::id_of(const elem& e) const {
  auto it = index.find(e);
  if (it == index.end()) fail(errc::foreign_element, "key " + key_string(e) + " is not a ball vertex");
  return it->second;
}

const std::vector<int>& ball::sphere(int k) const {
  if (k < 0 || k > radius) fail(errc::precondition, "sphere radius out of range");
  return spheres[static_cast<std::size_t>(k)];
}

std::vector<std::int64_t> ball::cumulative_sizes() const {
  std::vector<std::int64_t> sizes;
  std::int64_t acc = 0;
  for (const auto& s : spheres) {
    acc += static_cast<std::int64_t>(s.size());
    sizes.push_back(acc);
  }
  return sizes;
}

std::vector<std::int64_t> ball::sphere_sizes() const {
  std::vector<std::int64_t> out;
  for (const auto& s : spheres) out.push_back(static_cast<std::int64_t>(s.size()));
  return out;
}

ball build_ball(const group_model& m, const elem& center, int radius, std::size_t vertex_cap) {
  if (radius < 0) fail(errc::precondition, "ball radius must be >= 0");
  m.validate(center);

  ball b;
  b.model = &m;
  b.center = center;
  b.radius = radius;
  b.spheres.assign(static_cast<std::size_t>(radius) + 1, {});

  b.verts.push_back(center);
  b.dist.push_back(0);
  b.index.emplace(center, 0);
  b.spheres[0].push_back(0);

  // BFS in (radius, generator order); ids are discovery order.
  for (std::size_t head = 0; head < b.verts.size(); ++head) {
    if (b.dist[head] == radius) break;
    const elem v = b.verts[head];
    for (const elem& s : m.generators()) {
      elem w = m.multiply(v, s);
      if (b.index.find(w) != b.index.end()) continue;
      if (b.verts.size() >= vertex_cap) {
        fail(errc::resource_limit, "ball exceeds vertex cap of " + std::to_string(vertex_cap));
      }
      int id = static_cast<int>(b.verts.size());
      b.index.emplace(w, id);
      b.verts.push_back(w);
      b.dist.push_back(b.dist[head] + 1);
      b.spheres[static_cast<std::size_t>(b.dist[id])].push_back(id);
    }
  }

  // Full adjacency restricted to the ball.
  b.adj.resize(b.verts.size());
  const auto& gens = m.generators();
  for (std::size_t i = 0; i < b.verts.size(); ++i) {
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
      elem w = m.multiply(b.verts[i], gens[gi]);
      auto it = b.index.find(w);
      if (it != b.index.end()) b.adj[i].emplace_back(static_cast<int>(gi), it->second);
    }
  }
  return b;
}

std::optional<int> word_distance(const ball& b, const elem& a, const elem& c) {
  int src = b.id_of(a), dst = b.id_of(c);
  if (src == dst) return 0;

  std::vector<int> d(b.verts.size(), -1);
  d[static_cast<std::size_t>(src)] = 0;
  std::deque<int> queue{src};
  int found = -1;
  while (!queue.empty() && found < 0) {
    int v = queue.front();
    queue.pop_front();
    for (auto [gi, w] : b.adj[static_cast<std::size_t>(v)]) {
      (void)gi;
      if (d[static_cast<std::size_t>(w)] >= 0) continue;
      d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1;
      if (w == dst) {
        found = d[static_cast<std::size_t>(w)];
        break;
      }
      queue.push_back(w);
    }
  }
  if (found < 0) return std::nullopt;
  // A geodesic from the endpoint nearer the center stays inside the ball
  // when min(dist) + found <= radius, certifying the restricted distance.
  if (std::min(b.dist[static_cast<std::size_t>(src)], b.dist[static_cast<std::size_t>(dst)]) + found >
      b.radius) {
    return std::nullopt;
  }
  return found;
}

const char* growth_class_name(growth_class g) {
  switch (g) {
    case growth_class::bounded: return "bounded";
    case growth_class::linear: return "linear";
    case growth_class::superlinear: return "superlinear";
  }
  return "?";
}

growth_report classify_growth(const ball& b) {
  if (b.radius < 4) fail(errc::precondition, "growth classification wants radius >= 4");
  growth_report r;
  r.sizes = b.cumulative_sizes();
  r.sphere_sizes = b.sphere_sizes();
  r.window_lo = (b.radius + 1) / 2;

  std::int64_t sph_min = -1, sph_max = -1;
  double rat_min = 0, rat_max = 0;
  r.liminf_radius = r.window_lo;
  r.liminf_size = r.sphere_sizes[static_cast<std::size_t>(r.window_lo)];
  for (int k = r.window_lo; k <= b.radius; ++k) {
    std::int64_t sph = r.sphere_sizes[static_cast<std::size_t>(k)];
    double rat = static_cast<double>(r.sizes[static_cast<std::size_t>(k)]) / k;
    if (sph_min < 0 || sph < sph_min) sph_min = sph;
    if (sph > sph_max) sph_max = sph;
    if (rat_min == 0 || rat < rat_min) rat_min = rat;
    if (rat > rat_max) rat_max = rat;
    if (sph < r.liminf_size) {
      r.liminf_size = sph;
      r.liminf_radius = k;
    }
  }

  if (r.sphere_sizes[static_cast<std::size_t>(b.radius)] == 0) {
    r.cls = growth_class::bounded;
  } else if (rat_max / rat_min <= 3.0 &&
             static_cast<double>(sph_max) <= 1.5 * static_cast<double>(sph_min)) {
    r.cls = growth_class::linear;
  } else {
    r.cls = growth_class::superlinear;
  }
  return r;
}

int count_ends(const ball& b, int inner) {
  if (inner < 0 || inner >= b.radius) fail(errc::precondition, "ends want 0 <= inner < radius");

  // BFS components of the induced subgraph on {dist > inner}; count those
  // reaching the outer sphere.
  std::vector<int> comp(b.verts.size(), -1);
  int count = 0;
  for (std::size_t seed = 0; seed < b.verts.size(); ++seed) {
    if (b.dist[seed] <= inner || comp[seed] >= 0) continue;
    bool touches_outer = false;
    std::deque<std::size_t> queue{seed};
    comp[seed] = static_cast<int>(seed);
    while (!queue.empty()) {
      std::size_t v = queue.front();
      queue.pop_front();
      if (b.dist[v] == b.radius) touches_outer = true;
      for (auto [gi, w] : b.adj[v]) {
        (void)gi;
        auto wi = static_cast<std::size_t>(w);
        if (b.dist[wi] <= inner || comp[wi] >= 0) continue;
        comp[wi] = static_cast<int>(seed);
        queue.push_back(wi);
      }
    }
    if (touches_outer) ++count;
  }
  return count;
}

std::string ball_csv(const ball& b) {
  std::string out = "src_key,gen_index,dst_key\n";
  for (std::size_t i = 0; i < b.verts.size(); ++i) {
    for (auto [gi, w] : b.adj[i]) {
      out += key_string(b.verts[i]);
      out += ',';
      out += std::to_string(gi);
      out += ',';
      out += key_string(b.verts[static_cast<std::size_t>(w)]);
      out += '\n';
    }
  }
  return out;
}

std::string growth_report::json(const group_spec& spec) const {
  nlohmann::ordered_json j;
  j["group"] = nlohmann::ordered_json::parse(spec.json());
  j["radius"] = sizes.empty() ? 0 : static_cast<int>(sizes.size()) - 1;
  j["sizes"] = sizes;
  j["sphere_sizes"] = sphere_sizes;
  j["classification"] = growth_class_name(cls);
  j["window_lo"] = window_lo;
  j["liminf_sphere"] = {{"radius", liminf_radius}, {"size", liminf_size}};
  return j.dump(2) + "\n";
}

}  // namespace vzcert
