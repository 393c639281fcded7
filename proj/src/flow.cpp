#include "vzcert/flow.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vzcert/rigidity.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vzcert {

// ---------------------------------------------------------------------------
// network plumbing

int flow_network::add_vertex(const elem& v) {
  auto it = index.find(v);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(verts.size());
  verts.push_back(v);
  index.emplace(v, id);
  out_edges.emplace_back();
  in_edges.emplace_back();
  return id;
}

int flow_network::id_of(const elem& v) const {
  auto it = index.find(v);
  if (it == index.end()) fail(errc::not_found, "network has no vertex " + key_string(v));
  return it->second;
}

int flow_network::add_edge_ids(int a, int b, int w, bool allow_loop) {
  if (a < 0 || b < 0 || a >= static_cast<int>(verts.size()) || b >= static_cast<int>(verts.size()))
    fail(errc::precondition, "edge endpoint out of range");
  if (a == b && !allow_loop) fail(errc::precondition, "self-loops are not allowed");
  if (w != 0 && w != 1) fail(errc::precondition, "edge weight must be 0 or 1");
  int id = static_cast<int>(edges.size());
  edges.push_back({a, b, w});
  out_edges[static_cast<std::size_t>(a)].push_back(id);
  in_edges[static_cast<std::size_t>(b)].push_back(id);
  return id;
}

int flow_network::add_edge(const elem& a, const elem& b, int w) {
  int ia = add_vertex(a);
  int ib = add_vertex(b);
  return add_edge_ids(ia, ib, w);
}

std::string flow_network::csv() const {
  std::string out;
  for (const edge& e : edges) {
    out += key_string(verts[static_cast<std::size_t>(e.src)]);
    out += ',';
    out += key_string(verts[static_cast<std::size_t>(e.dst)]);
    out += ',';
    out += std::to_string(e.weight);
    out += '\n';
  }
  return out;
}

flow_network parse_network_csv(const std::string& text, const elem& source, const elem& sink) {
  flow_network net;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      fail(errc::invalid_spec, "network csv line " + std::to_string(lineno) + ": want src,dst,weight");
    elem a = parse_key(line.substr(0, c1));
    elem b = parse_key(line.substr(c1 + 1, c2 - c1 - 1));
    int w = 0;
    try {
      w = std::stoi(line.substr(c2 + 1));
    } catch (const std::exception&) {
      fail(errc::invalid_spec, "network csv line " + std::to_string(lineno) + ": bad weight");
    }
    net.add_edge(a, b, w);
  }
  net.source = net.id_of(source);
  net.sink = net.id_of(sink);
  return net;
}

flow_network ball_network(const ball& b, const elem& source, const elem& sink) {
  flow_network net;
  for (const elem& v : b.verts) net.add_vertex(v);
  for (std::size_t a = 0; a < b.verts.size(); ++a)
    for (auto [gen, nb] : b.adj[a]) net.add_edge_ids(static_cast<int>(a), nb, 1);
  net.source = net.id_of(source);
  net.sink = net.id_of(sink);
  return net;
}

// ---------------------------------------------------------------------------
// flows and cuts

flow max_flow(const flow_network& net) {
  if (net.source < 0 || net.sink < 0) fail(errc::precondition, "max_flow wants a source and a sink");
  if (net.source == net.sink) fail(errc::precondition, "max_flow wants distinct source and sink");
  const std::size_t n = net.verts.size();
  flow fl;
  fl.f.assign(net.edges.size(), 0);
  std::vector<int> par_edge(n), par_dir(n);
  std::vector<char> seen(n);
  for (;;) {
    std::fill(seen.begin(), seen.end(), 0);
    seen[static_cast<std::size_t>(net.source)] = 1;
    std::deque<int> q{net.source};
    while (!q.empty() && !seen[static_cast<std::size_t>(net.sink)]) {
      int v = q.front();
      q.pop_front();
      for (int eid : net.out_edges[static_cast<std::size_t>(v)]) {
        const auto& e = net.edges[static_cast<std::size_t>(eid)];
        if (!seen[static_cast<std::size_t>(e.dst)] && fl.f[static_cast<std::size_t>(eid)] < e.weight) {
          seen[static_cast<std::size_t>(e.dst)] = 1;
          par_edge[static_cast<std::size_t>(e.dst)] = eid;
          par_dir[static_cast<std::size_t>(e.dst)] = 1;
          q.push_back(e.dst);
        }
      }
      for (int eid : net.in_edges[static_cast<std::size_t>(v)]) {
        const auto& e = net.edges[static_cast<std::size_t>(eid)];
        if (!seen[static_cast<std::size_t>(e.src)] && fl.f[static_cast<std::size_t>(eid)] > 0) {
          seen[static_cast<std::size_t>(e.src)] = 1;
          par_edge[static_cast<std::size_t>(e.src)] = eid;
          par_dir[static_cast<std::size_t>(e.src)] = -1;
          q.push_back(e.src);
        }
      }
    }
    if (!seen[static_cast<std::size_t>(net.sink)]) break;
    for (int v = net.sink; v != net.source;) {
      int eid = par_edge[static_cast<std::size_t>(v)];
      if (par_dir[static_cast<std::size_t>(v)] > 0) {
        fl.f[static_cast<std::size_t>(eid)] = 1;
        v = net.edges[static_cast<std::size_t>(eid)].src;
      } else {
        fl.f[static_cast<std::size_t>(eid)] = 0;
        v = net.edges[static_cast<std::size_t>(eid)].dst;
      }
    }
  }
  return fl;
}

namespace {

bool flow_axioms(const flow_network& net, const flow& fl, bool everywhere) {
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    int f = fl.f[i];
    if (f != 0 && f != 1) return false;
    if (f > net.edges[i].weight) return false;
  }
  for (std::size_t v = 0; v < net.verts.size(); ++v) {
    if (!everywhere &&
        (static_cast<int>(v) == net.source || static_cast<int>(v) == net.sink))
      continue;
    long long net_in = 0;
    for (int eid : net.in_edges[v]) net_in += fl.f[static_cast<std::size_t>(eid)];
    for (int eid : net.out_edges[v]) net_in -= fl.f[static_cast<std::size_t>(eid)];
    if (net_in != 0) return false;
  }
  return true;
}

}  // namespace

bool verify_flow(const flow_network& net, const flow& fl) {
  if (fl.f.size() != net.edges.size()) fail(errc::precondition, "flow is not defined on every edge");
  return flow_axioms(net, fl, false);
}

bool verify_circulation(const flow_network& net, const flow& fl) {
  if (fl.f.size() != net.edges.size()) fail(errc::precondition, "flow is not defined on every edge");
  return flow_axioms(net, fl, true);
}

long long flow_magnitude(const flow_network& net, const flow& fl) {
  if (!verify_flow(net, fl)) fail(errc::invalid_flow, "capacity or conservation violated");
  long long mag = 0;
  for (int eid : net.out_edges[static_cast<std::size_t>(net.source)])
    mag += fl.f[static_cast<std::size_t>(eid)];
  return mag;
}

long long brute_force_min_cut(const flow_network& net, exec policy) {
  if (net.source < 0 || net.sink < 0 || net.source == net.sink)
    fail(errc::precondition, "min cut wants distinct source and sink");
  const int n = static_cast<int>(net.verts.size());
  if (n > 14) fail(errc::too_large, "brute-force cut handles at most 14 vertices, got " + std::to_string(n));
  std::vector<int> free_ids;
  for (int v = 0; v < n; ++v)
    if (v != net.source && v != net.sink) free_ids.push_back(v);
  const int m = static_cast<int>(free_ids.size());
  const std::uint32_t masks = 1u << m;

  auto cut_value = [&](std::uint32_t mask) {
    std::uint32_t in_a = 1u << net.source;
    for (int j = 0; j < m; ++j)
      if (mask >> j & 1u) in_a |= 1u << free_ids[static_cast<std::size_t>(j)];
    long long val = 0;
    for (const auto& e : net.edges)
      if ((in_a >> e.src & 1u) && !(in_a >> e.dst & 1u)) val += e.weight;
    return val;
  };

  long long best = LLONG_MAX;
  if (policy == exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(min : best)
    for (long long mask = 0; mask < static_cast<long long>(masks); ++mask) {
      long long val = cut_value(static_cast<std::uint32_t>(mask));
      if (val < best) best = val;
    }
    return best;
#else
    policy = exec::serial;
#endif
  }
  if (policy == exec::serial) {
    for (std::uint32_t mask = 0; mask < masks; ++mask) best = std::min(best, cut_value(mask));
  }
  return best;
}

std::pair<int, std::int64_t> liminf_sphere_bound(const ball& b) {
  growth_report r = classify_growth(b);
  return {r.liminf_radius, r.liminf_size};
}

// ---------------------------------------------------------------------------
// cross-sections

namespace {

std::vector<int> source_layers(const flow_network& net) {
  if (net.source < 0) fail(errc::precondition, "network has no source");
  std::vector<int> d(net.verts.size(), -1);
  d[static_cast<std::size_t>(net.source)] = 0;
  std::deque<int> q{net.source};
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int eid : net.out_edges[static_cast<std::size_t>(v)]) {
      int w = net.edges[static_cast<std::size_t>(eid)].dst;
      if (d[static_cast<std::size_t>(w)] < 0) {
        d[static_cast<std::size_t>(w)] = d[static_cast<std::size_t>(v)] + 1;
        q.push_back(w);
      }
    }
  }
  return d;
}

void sort_by_key(const flow_network& net, std::vector<int>& ids) {
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    return net.verts[static_cast<std::size_t>(a)] < net.verts[static_cast<std::size_t>(b)];
  });
}

}  // namespace

cross_section sphere_cross_section(const flow_network& net, const flow& fl, int k, int section_cap) {
  if (fl.f.size() != net.edges.size()) fail(errc::precondition, "flow is not defined on every edge");
  if (k < 1) fail(errc::precondition, "cross-section radius must be at least 1");
  std::vector<int> d = source_layers(net);

  cross_section cs;
  cs.radius = k;
  for (std::size_t v = 0; v < net.verts.size(); ++v)
    if (d[v] == k) cs.sphere_verts.push_back(static_cast<int>(v));
  if (cs.sphere_verts.empty()) fail(errc::precondition, "no vertices at radius " + std::to_string(k));
  if (static_cast<int>(cs.sphere_verts.size()) > section_cap)
    fail(errc::too_large, "sphere at radius " + std::to_string(k) + " has " +
                              std::to_string(cs.sphere_verts.size()) + " vertices, cap " +
                              std::to_string(section_cap));
  sort_by_key(net, cs.sphere_verts);

  std::set<int> outs;
  for (int s : cs.sphere_verts)
    for (int eid : net.out_edges[static_cast<std::size_t>(s)]) {
      int w = net.edges[static_cast<std::size_t>(eid)].dst;
      if (d[static_cast<std::size_t>(w)] == k + 1) outs.insert(w);
    }
  cs.out_verts.assign(outs.begin(), outs.end());
  sort_by_key(net, cs.out_verts);

  // layer: 0 sphere, 1 out, -1 elsewhere
  std::vector<int> layer(net.verts.size(), -1);
  for (int s : cs.sphere_verts) layer[static_cast<std::size_t>(s)] = 0;
  for (int o : cs.out_verts) layer[static_cast<std::size_t>(o)] = 1;
  for (std::size_t eid = 0; eid < net.edges.size(); ++eid) {
    const auto& e = net.edges[eid];
    int la = layer[static_cast<std::size_t>(e.src)], lb = layer[static_cast<std::size_t>(e.dst)];
    if (la < 0 || lb < 0) continue;
    if (la == 1 && lb == 1) continue;  // out-layer internal: outside the scope
    cs.edge_ids.push_back(static_cast<int>(eid));
  }
  return cs;
}

section_fingerprint fingerprint_of(const flow_network& net, const flow& fl, const cross_section& cs,
                                   std::size_t perm_budget) {
  const std::size_t s = cs.sphere_verts.size();
  std::vector<int> locals = cs.sphere_verts;
  locals.insert(locals.end(), cs.out_verts.begin(), cs.out_verts.end());
  const std::size_t m = locals.size();
  std::map<int, int> local_of;
  for (std::size_t i = 0; i < m; ++i) local_of[locals[i]] = static_cast<int>(i);

  struct ledge {
    int a, b, w, f;
  };
  std::vector<ledge> ledges;
  for (int eid : cs.edge_ids) {
    const auto& e = net.edges[static_cast<std::size_t>(eid)];
    ledges.push_back({local_of.at(e.src), local_of.at(e.dst), e.weight,
                      fl.f[static_cast<std::size_t>(eid)]});
  }

  // neighborhood refinement: ranks start as the layer and are re-derived from
  // sorted signature strings until the class count stabilizes
  std::vector<int> rank(m);
  for (std::size_t i = 0; i < m; ++i) rank[i] = i < s ? 0 : 1;
  std::size_t classes = 2;
  for (std::size_t round = 0; round < m; ++round) {
    std::vector<std::vector<std::string>> parts(m);
    for (const ledge& e : ledges) {
      parts[static_cast<std::size_t>(e.a)].push_back(
          "o" + std::to_string(rank[static_cast<std::size_t>(e.b)]) + ":" + std::to_string(e.w) +
          ":" + std::to_string(e.f));
      parts[static_cast<std::size_t>(e.b)].push_back(
          "i" + std::to_string(rank[static_cast<std::size_t>(e.a)]) + ":" + std::to_string(e.w) +
          ":" + std::to_string(e.f));
    }
    std::vector<std::string> sig(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::sort(parts[i].begin(), parts[i].end());
      sig[i] = std::to_string(rank[i]) + "|";
      for (const std::string& p : parts[i]) sig[i] += p + "#";
    }
    std::vector<std::string> uniq = sig;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t i = 0; i < m; ++i)
      rank[i] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), sig[i]) - uniq.begin());
    if (uniq.size() == classes) break;
    classes = uniq.size();
  }

  // classes ordered by (layer, rank); canonical positions are assigned block
  // by block, so sphere vertices always come first
  std::map<std::pair<int, int>, std::vector<int>> class_map;
  for (std::size_t i = 0; i < m; ++i)
    class_map[{i < s ? 0 : 1, rank[i]}].push_back(static_cast<int>(i));

  std::size_t budget = 1;
  for (const auto& [key, members] : class_map)
    for (std::size_t i = 2; i <= members.size(); ++i) {
      budget *= i;
      if (budget > perm_budget)
        fail(errc::too_large, "canonicalization budget exceeds " + std::to_string(perm_budget) +
                                  " relabelings");
    }

  std::vector<std::vector<int>> arr;
  for (const auto& [key, members] : class_map) arr.push_back(members);

  std::string best;
  std::vector<int> best_pos;
  std::vector<int> pos(m);
  for (;;) {
    int p = 0;
    for (const auto& cls : arr)
      for (int v : cls) pos[static_cast<std::size_t>(v)] = p++;

    std::vector<std::array<int, 4>> enc;
    enc.reserve(ledges.size());
    for (const ledge& e : ledges)
      enc.push_back({pos[static_cast<std::size_t>(e.a)], pos[static_cast<std::size_t>(e.b)], e.w, e.f});
    std::sort(enc.begin(), enc.end());
    std::string code = "s" + std::to_string(s) + "o" + std::to_string(m - s) + ";";
    for (const auto& t : enc)
      code += std::to_string(t[0]) + ">" + std::to_string(t[1]) + ":" + std::to_string(t[2]) + ":" +
              std::to_string(t[3]) + ";";

    if (best.empty() || code < best) {
      best = code;
      best_pos = pos;
    }

    // odometer over per-class permutations
    std::size_t c = arr.size();
    while (c > 0 && !std::next_permutation(arr[c - 1].begin(), arr[c - 1].end())) --c;
    if (c == 0) break;
  }

  section_fingerprint fp;
  fp.canon = std::move(best);
  fp.sphere_count = s;
  fp.order.assign(m, -1);
  for (std::size_t i = 0; i < m; ++i)
    fp.order[static_cast<std::size_t>(best_pos[i])] = locals[i];
  return fp;
}

repeat_result find_repeat(const flow_network& net, const flow& fl, int section_cap) {
  std::vector<int> d = source_layers(net);
  if (net.sink < 0 || d[static_cast<std::size_t>(net.sink)] < 0)
    fail(errc::precondition, "sink unreachable from source");
  const int depth = d[static_cast<std::size_t>(net.sink)];
  if (depth < 3) fail(errc::precondition, "source and sink too close for interior spheres");

  std::map<std::string, std::pair<int, section_fingerprint>> seen;
  std::string scanned;
  for (int k = 1; k <= depth - 2; ++k) {
    section_fingerprint fp;
    try {
      cross_section cs = sphere_cross_section(net, fl, k, section_cap);
      fp = fingerprint_of(net, fl, cs);
    } catch (const error& e) {
      if (e.code() == errc::too_large) {
        scanned += std::to_string(k) + ":too_large ";
        continue;
      }
      throw;
    }
    auto it = seen.find(fp.canon);
    if (it != seen.end()) {
      repeat_result r;
      r.k1 = it->second.first;
      r.k2 = k;
      const section_fingerprint& fp1 = it->second.second;
      for (std::size_t p = 0; p < fp.sphere_count; ++p)
        r.iso.emplace_back(net.verts[static_cast<std::size_t>(fp.order[p])],
                           net.verts[static_cast<std::size_t>(fp1.order[p])]);
      std::sort(r.iso.begin(), r.iso.end());
      return r;
    }
    seen.emplace(fp.canon, std::make_pair(k, fp));
    scanned += std::to_string(k) + " ";
  }
  fail(errc::no_repeat, "no repeating cross-section; radii scanned: " + scanned);
}

// ---------------------------------------------------------------------------
// quotient, cycle, lift

quotient_result quotient_segment(const flow_network& net, const flow& fl, int k1, int k2,
                                 const std::vector<std::pair<elem, elem>>& iso) {
  if (fl.f.size() != net.edges.size()) fail(errc::precondition, "flow is not defined on every edge");
  if (k1 < 1 || k2 <= k1) fail(errc::precondition, "quotient wants 1 <= k1 < k2");
  std::vector<int> d = source_layers(net);

  std::set<elem> s1, s2;
  for (std::size_t v = 0; v < net.verts.size(); ++v) {
    if (d[v] == k1) s1.insert(net.verts[v]);
    if (d[v] == k2) s2.insert(net.verts[v]);
  }
  std::map<elem, elem> fwd;
  std::set<elem> images;
  for (const auto& [y, x] : iso) {
    if (!s2.count(y)) fail(errc::precondition, "iso domain vertex " + key_string(y) + " is not on sphere k2");
    if (!s1.count(x)) fail(errc::precondition, "iso image vertex " + key_string(x) + " is not on sphere k1");
    if (!fwd.emplace(y, x).second) fail(errc::precondition, "iso maps " + key_string(y) + " twice");
    if (!images.insert(x).second) fail(errc::precondition, "iso hits " + key_string(x) + " twice");
  }
  if (fwd.size() != s2.size() || images.size() != s1.size())
    fail(errc::precondition, "iso is not a sphere(k2) -> sphere(k1) bijection");

  quotient_result q;
  q.k1 = k1;
  q.k2 = k2;
  q.iso = iso;

  auto rep = [&](int vid) -> const elem& {
    const elem& v = net.verts[static_cast<std::size_t>(vid)];
    if (d[static_cast<std::size_t>(vid)] == k2) return fwd.at(v);
    return v;
  };
  for (std::size_t v = 0; v < net.verts.size(); ++v)
    if (d[v] >= k1 && d[v] <= k2) q.net.add_vertex(rep(static_cast<int>(v)));
  for (std::size_t eid = 0; eid < net.edges.size(); ++eid) {
    const auto& e = net.edges[eid];
    int da = d[static_cast<std::size_t>(e.src)], db = d[static_cast<std::size_t>(e.dst)];
    if (da < k1 || da > k2 || db < k1 || db > k2) continue;
    int qa = q.net.id_of(rep(e.src));
    int qb = q.net.id_of(rep(e.dst));
    q.net.add_edge_ids(qa, qb, e.weight, /*allow_loop=*/true);
    q.f.f.push_back(fl.f[eid]);
    q.origin.push_back(static_cast<int>(eid));
  }
  q.net.source = q.net.sink = q.net.id_of(*s1.begin());

  if (!verify_circulation(q.net, q.f))
    fail(errc::not_flow_preserving, "merged flow violates conservation in the quotient");
  return q;
}

std::vector<int> find_flow_cycle(const quotient_result& q) {
  const flow_network& net = q.net;
  int start = -1;
  for (std::size_t eid = 0; eid < net.edges.size(); ++eid) {
    if (q.f.f[eid] != 1) continue;
    int src = net.edges[eid].src;
    if (start < 0 || net.verts[static_cast<std::size_t>(src)] < net.verts[static_cast<std::size_t>(start)])
      start = src;
  }
  if (start < 0) fail(errc::no_cycle, "flow is zero");

  std::vector<char> used(net.edges.size(), 0);
  std::map<int, std::size_t> seen_at;  // vertex -> index into path
  std::vector<int> path;
  int cur = start;
  for (;;) {
    auto it = seen_at.find(cur);
    if (it != seen_at.end()) return std::vector<int>(path.begin() + static_cast<long>(it->second), path.end());
    seen_at.emplace(cur, path.size());
    int next = -1;
    for (int eid : net.out_edges[static_cast<std::size_t>(cur)])
      if (!used[static_cast<std::size_t>(eid)] && q.f.f[static_cast<std::size_t>(eid)] == 1) {
        next = eid;
        break;
      }
    if (next < 0) fail(errc::no_cycle, "successor walk stuck; flow is not a circulation");
    used[static_cast<std::size_t>(next)] = 1;
    path.push_back(next);
    cur = net.edges[static_cast<std::size_t>(next)].dst;
  }
}

lift_result lift_cycle(const group_model& m, const flow_network& net, const quotient_result& q,
                       const std::vector<int>& cycle) {
  if (cycle.empty()) fail(errc::precondition, "empty cycle");
  std::map<elem, elem> fwd;
  for (const auto& [y, x] : q.iso) fwd.emplace(y, x);

  const std::size_t n = cycle.size();
  std::vector<elem> src(n), dst(n);
  for (std::size_t i = 0; i < n; ++i) {
    int eid = cycle[i];
    if (eid < 0 || eid >= static_cast<int>(q.origin.size())) fail(errc::precondition, "cycle edge out of range");
    const auto& e = net.edges[static_cast<std::size_t>(q.origin[static_cast<std::size_t>(eid)])];
    src[i] = net.verts[static_cast<std::size_t>(e.src)];
    dst[i] = net.verts[static_cast<std::size_t>(e.dst)];
  }

  // rotate so the walk starts right after a seam crossing
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i)
    if (!(dst[i] == src[(i + 1) % n])) {
      start = (i + 1) % n;
      break;
    }
  if (start == n) fail(errc::lift_mismatch, "cycle never crosses the identified spheres");

  auto seam_pair = [&](const elem& a, const elem& b) {
    auto it = fwd.find(a);
    if (it != fwd.end() && it->second == b) return true;
    it = fwd.find(b);
    return it != fwd.end() && it->second == a;
  };

  elem x = src[start];
  elem cur = x;
  elem g = m.identity();
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t i = (start + t) % n;
    if (src[i] == cur) {
      cur = dst[i];
    } else if (seam_pair(cur, src[i])) {
      g = m.multiply(g, m.multiply(cur, m.inverse(src[i])));
      cur = dst[i];
    } else {
      fail(errc::lift_mismatch, "cycle does not chain through the identification at " + key_string(cur));
    }
  }

  lift_result out;
  out.x = x;
  if (cur == x) {
    out.g = g;
  } else if (seam_pair(cur, x)) {
    out.g = m.multiply(g, m.multiply(cur, m.inverse(x)));
  } else {
    fail(errc::lift_mismatch, "unrolled path ends at " + key_string(cur) + ", not over " + key_string(x));
  }
  out.y = m.multiply(out.g, x);
  return out;
}

// ---------------------------------------------------------------------------
// min-cut evidence table

std::vector<mincut_row> mincut_table(const ball& b, int d_lo, int d_hi) {
  if (d_hi <= 0) d_hi = b.radius - 2;
  if (d_lo < 1 || d_lo > d_hi || d_hi > b.radius - 1)
    fail(errc::precondition, "mincut table wants 1 <= d_lo <= d_hi <= radius-1");
  if (b.sphere(b.radius).empty()) fail(errc::precondition, "ball saturated: outer sphere is empty");

  // synthetic terminal keys one entry longer than any real key
  std::size_t klen = 0;
  for (const elem& v : b.verts) klen = std::max(klen, v.key.size());
  elem src_key{std::vector<std::int64_t>(klen + 1, 0)};
  elem dst_key{std::vector<std::int64_t>(klen + 1, 0)};
  dst_key.key[klen] = 1;

  std::vector<mincut_row> rows;
  for (int d = d_lo; d <= d_hi; ++d) {
    flow_network net;
    net.source = net.add_vertex(src_key);
    net.sink = net.add_vertex(dst_key);
    auto node = [&](std::size_t vid) -> int {
      int dist = b.dist[vid];
      if (dist <= d) return net.source;
      if (dist == b.radius) return net.sink;
      return net.add_vertex(b.verts[vid]);
    };
    for (std::size_t a = 0; a < b.verts.size(); ++a) {
      int na = node(a);
      for (auto [gen, nb] : b.adj[a]) {
        int nbn = node(static_cast<std::size_t>(nb));
        if (na == nbn) continue;               // contracted away
        if (nbn == net.source) continue;       // edges into the source never cross a cut
        if (na == net.sink) continue;          // edges out of the sink never cross a cut
        net.add_edge_ids(na, nbn, 1);
      }
    }
    flow fl = max_flow(net);
    rows.push_back({d, flow_magnitude(net, fl)});
  }
  return rows;
}

std::string mincut_table_csv(const std::vector<mincut_row>& rows) {
  std::string out = "distance,max_flow\n";
  for (const mincut_row& r : rows)
    out += std::to_string(r.distance) + "," + std::to_string(r.magnitude) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// the line-map-free certifier

std::string flow_verdict::json() const {
  nlohmann::ordered_json j;
  j["schema"] = "vzcert.flow_verdict.v1";
  j["group"] = nlohmann::ordered_json::parse(spec.json());
  j["verdict"] = verdict;
  j["growth"] = growth;
  j["radius"] = radius;
  j["magnitude"] = magnitude;
  if (k2 > 0) {
    j["k1"] = k1;
    j["k2"] = k2;
  } else {
    j["k1"] = nullptr;
    j["k2"] = nullptr;
  }
  j["g"] = has_g ? nlohmann::ordered_json(key_string(g)) : nlohmann::ordered_json(nullptr);
  j["z_checked"] = z_checked;
  j["density_k"] = density_k < 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(density_k);
  j["index"] = index;
  nlohmann::ordered_json mc = nlohmann::ordered_json::array();
  for (const mincut_row& r : mincut) {
    nlohmann::ordered_json row;
    row["distance"] = r.distance;
    row["max_flow"] = r.magnitude;
    mc.push_back(std::move(row));
  }
  j["mincut"] = std::move(mc);
  j["detail"] = detail;
  return j.dump(2);
}

flow_verdict detect_virtually_z_via_flow(const group_spec& spec, const flow_detect_params& params) {
  if (params.radius < 4) fail(errc::precondition, "flow detection wants radius >= 4");
  flow_verdict v;
  v.spec = spec;
  v.radius = params.radius;
  v.growth = "unknown";
  v.verdict = "Inconclusive";

  auto model = make_model(spec);
  ball b;
  try {
    b = build_ball(*model, model->identity(), params.radius, params.vertex_cap);
  } catch (const error& e) {
    v.detail = std::string("evaluation ball: ") + e.what();
    return v;
  }

  growth_report gr = classify_growth(b);
  v.growth = growth_class_name(gr.cls);
  if (gr.cls == growth_class::bounded) {
    v.detail = "bounded growth: the ball saturates before radius " + std::to_string(b.radius);
    return v;
  }
  if (gr.cls == growth_class::superlinear) {
    v.verdict = "NotLinearGrowth";
    v.detail = "sphere sizes keep growing across the classification window";
    if (b.verts.size() <= params.mincut_vertex_limit && b.radius - 2 >= 3)
      v.mincut = mincut_table(b, 3, std::min(8, b.radius - 2));
    return v;
  }

  const std::vector<int>& outer = b.sphere(b.radius);
  elem sink_elem = b.verts[static_cast<std::size_t>(outer[0])];
  for (int id : outer)
    if (b.verts[static_cast<std::size_t>(id)] < sink_elem) sink_elem = b.verts[static_cast<std::size_t>(id)];

  flow_network net = ball_network(b, b.center, sink_elem);
  flow fl = max_flow(net);
  v.magnitude = flow_magnitude(net, fl);
  if (v.magnitude == 0) {
    v.detail = "no flow reaches the outer sphere";
    return v;
  }

  try {
    repeat_result rep = find_repeat(net, fl, params.section_cap);
    v.k1 = rep.k1;
    v.k2 = rep.k2;
    quotient_result q = quotient_segment(net, fl, rep.k1, rep.k2, rep.iso);
    std::vector<int> cycle = find_flow_cycle(q);
    lift_result lift = lift_cycle(*model, net, q, cycle);
    if (lift.g == model->identity()) {
      v.detail = "lifted cycle yields the identity";
      return v;
    }
    v.g = lift.g;
    v.has_g = true;
    if (!b.contains(lift.g)) {
      v.detail = "lifted element leaves the ball";
      return v;
    }
    int glen = b.dist[static_cast<std::size_t>(b.id_of(lift.g))];
    int z_cap = std::max(1, (b.radius / 2) / std::max(1, glen));
    v.z_checked = z_cap;
    elem p = model->identity();
    for (int z = 1; z <= z_cap; ++z) {
      p = model->multiply(p, lift.g);
      if (p == model->identity()) {
        v.detail = "lifted element has finite order " + std::to_string(z);
        return v;
      }
    }
    v.density_k = quasi_density_constant(*model, b, lift.g, z_cap);
    v.index = coset_count(*model, b, lift.g, v.density_k);
    v.verdict = "VirtuallyZ";
    v.detail = "cycle lifted from cross-sections at radii " + std::to_string(rep.k1) + " and " +
               std::to_string(rep.k2);
  } catch (const error& e) {
    v.detail = e.what();
  }
  return v;
}

}  // namespace vzcert
