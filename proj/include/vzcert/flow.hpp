#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vzcert/ball.hpp"
#include "vzcert/parallel.hpp"

namespace vzcert {

// Directed graph with {0,1} edge weights plus a distinguished source/sink
// pair. Parallel edges are legal; self-loops are rejected by add_edge and
// appear only in quotient networks, which build their edge lists directly.
struct flow_network {
  struct edge {
    int src = 0;
    int dst = 0;
    int weight = 0;
  };

  std::vector<elem> verts;  // id -> key
  std::unordered_map<elem, int, elem_hash> index;
  std::vector<edge> edges;
  std::vector<std::vector<int>> out_edges;  // vertex id -> edge ids
  std::vector<std::vector<int>> in_edges;
  int source = -1;
  int sink = -1;

  int add_vertex(const elem& v);  // idempotent, returns id
  int id_of(const elem& v) const;  // not_found if absent
  int add_edge(const elem& a, const elem& b, int w);
  int add_edge_ids(int a, int b, int w, bool allow_loop = false);

  std::string csv() const;  // "src,dst,weight" per edge, edge order
};

// Lines of "src,dst,weight" with keys in key_string form; vertices are
// created on first mention, so edge order fixes vertex ids.
flow_network parse_network_csv(const std::string& text, const elem& source, const elem& sink);

// Whole ball as a unit-weight network: every Cayley edge in both directions,
// net vertex ids equal to ball ids.
flow_network ball_network(const ball& b, const elem& source, const elem& sink);

struct flow {
  std::vector<int> f;  // parallel to edges, each 0 or 1
};

// Maximum {0,1}-flow by augmenting shortest residual paths; integral and
// deterministic under the vertex/edge ordering.
flow max_flow(const flow_network& net);

// Capacity bound plus conservation at every vertex other than source/sink.
// precondition if f is not defined on every edge.
bool verify_flow(const flow_network& net, const flow& fl);

// Conservation at every vertex including source and sink.
bool verify_circulation(const flow_network& net, const flow& fl);

// Sum of flow values on edges leaving the source; invalid_flow if the flow
// fails verify_flow. For max_flow outputs this equals the sink in-sum.
long long flow_magnitude(const flow_network& net, const flow& fl);

// Minimum cut magnitude over all 2^(|V|-2) source/sink partitions.
// too_large above 14 vertices. The parallel path enumerates the same masks.
long long brute_force_min_cut(const flow_network& net, exec policy = exec::serial);

// Smallest sphere on [ceil(R/2), R] with its radius; the finite-radius
// witness that liminf |S(k)| is bounded for linear growth.
std::pair<int, std::int64_t> liminf_sphere_bound(const ball& b);

inline constexpr int default_section_cap = 8;
inline constexpr std::size_t default_perm_budget = 1000000;

// One sphere about the network source plus its out-neighbors one step
// farther out. Edge scope: sphere-internal edges and both directions
// between sphere and out-layer; edges inside the out-layer are excluded.
// That scope already determines the net flow each sphere vertex hands
// upward, which is what the quotient seam needs.
struct cross_section {
  int radius = 0;
  std::vector<int> sphere_verts;  // net ids, key order
  std::vector<int> out_verts;     // net ids, key order
  std::vector<int> edge_ids;      // net edge ids, ascending
};

// Canonical encoding of a cross-section up to weight- and flow-preserving
// directed isomorphisms that respect the two layers. order maps canonical
// position -> net vertex id, sphere layer first.
struct section_fingerprint {
  std::string canon;
  std::vector<int> order;
  std::size_t sphere_count = 0;
};

// too_large when the sphere exceeds the cap; precondition when the radius
// holds no vertices.
cross_section sphere_cross_section(const flow_network& net, const flow& fl, int k,
                                   int section_cap = default_section_cap);

// Lexicographically minimal edge encoding over all layer-respecting
// relabelings compatible with iterated neighborhood refinement; refinement
// only prunes labelings no isomorphism could use, so equality of canon
// strings is exactly flow-preserving isomorphism. too_large when the
// surviving relabeling count exceeds the budget.
section_fingerprint fingerprint_of(const flow_network& net, const flow& fl,
                                   const cross_section& cs,
                                   std::size_t perm_budget = default_perm_budget);

struct repeat_result {
  int k1 = 0;
  int k2 = 0;
  std::vector<std::pair<elem, elem>> iso;  // sphere(k2) vertex -> sphere(k1) vertex
};

// Smallest pair of repeating cross-section fingerprints between source and
// sink, radii ascending; oversized sections are skipped. no_repeat lists
// the radii scanned.
repeat_result find_repeat(const flow_network& net, const flow& fl,
                          int section_cap = default_section_cap);

// Segment k1 <= dist <= k2 with each outer-sphere vertex merged onto its
// iso image; may carry self-loops. origin maps each quotient edge back to
// the segment edge it came from.
struct quotient_result {
  flow_network net;
  flow f;
  int k1 = 0;
  int k2 = 0;
  std::vector<std::pair<elem, elem>> iso;
  std::vector<int> origin;
};

// not_flow_preserving when the merged flow fails conservation somewhere;
// precondition unless k2 > k1 and iso is a sphere(k2) -> sphere(k1)
// bijection.
quotient_result quotient_segment(const flow_network& net, const flow& fl, int k1, int k2,
                                 const std::vector<std::pair<elem, elem>>& iso);

// Directed cycle within flow-1 edges of a circulation, found by walking
// successors from the key-minimal flow source; no_cycle when the flow is
// zero.
std::vector<int> find_flow_cycle(const quotient_result& q);

struct lift_result {
  elem x;  // path start in the segment
  elem y;  // unrolled endpoint, y = g * x
  elem g;  // y * x^-1, the deck translation of the seam
};

// Unrolls a quotient cycle back into the segment, composing one deck
// translation per seam crossing. lift_mismatch when consecutive edges fail
// to chain through the identification.
lift_result lift_cycle(const group_model& m, const flow_network& net, const quotient_result& q,
                       const std::vector<int>& cycle);

struct mincut_row {
  int distance = 0;
  long long magnitude = 0;
};

// Max-flow from the contracted closed ball B(d) to the contracted outer
// sphere, for d in [d_lo, d_hi] (d_hi <= 0 means radius - 2). Flat rows
// are the linear-growth signature; growing rows refute it.
std::vector<mincut_row> mincut_table(const ball& b, int d_lo = 3, int d_hi = 0);
std::string mincut_table_csv(const std::vector<mincut_row>& rows);

struct flow_detect_params {
  int radius = 10;
  std::size_t vertex_cap = default_vertex_cap;
  int section_cap = default_section_cap;
  std::size_t mincut_vertex_limit = 5000;  // evidence table only on balls this small
};

struct flow_verdict {
  group_spec spec;
  std::string verdict;  // "VirtuallyZ" | "NotLinearGrowth" | "Inconclusive"
  std::string growth;
  std::string detail;
  int radius = 0;
  long long magnitude = 0;
  int k1 = 0;
  int k2 = 0;
  bool has_g = false;
  elem g;
  int z_checked = 0;
  double density_k = -1.0;
  long long index = 0;
  std::vector<mincut_row> mincut;

  bool virtually_z() const { return verdict == "VirtuallyZ"; }
  std::string json() const;
};

// The line-map-free certifier: growth gate, max-flow across the ball,
// repeating cross-sections, quotient circulation, cycle lift, then the
// power-distinctness / quasi-density / coset-count finish on the lifted g.
flow_verdict detect_virtually_z_via_flow(const group_spec& spec,
                                         const flow_detect_params& params = {});

}  // namespace vzcert
