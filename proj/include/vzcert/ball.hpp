#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vzcert/group.hpp"

namespace vzcert {

// Finite ball of a Cayley graph. Edges join v and v*s for generators s
// (right multiplication); the group then acts on the left by isometries.
// Vertex ids are BFS discovery order (radius, then generator order), which
// every deterministic scan relies on.
struct ball {
  const group_model* model = nullptr;
  elem center;
  int radius = 0;

  std::vector<elem> verts;                            // id -> key
  std::vector<int> dist;                              // id -> distance from center
  std::vector<std::vector<std::pair<int, int>>> adj;  // id -> (gen index, neighbor id)
  std::unordered_map<elem, int, elem_hash> index;     // key -> id

  bool contains(const elem& e) const { return index.find(e) != index.end(); }
  int id_of(const elem& e) const;  // foreign_element if absent
  const std::vector<int>& sphere(int k) const;
  std::vector<std::int64_t> cumulative_sizes() const;  // |B(k)|, k = 0..radius
  std::vector<std::int64_t> sphere_sizes() const;

  std::vector<std::vector<int>> spheres;  // radius -> vertex ids
};

inline constexpr std::size_t default_vertex_cap = 1000000;

ball build_ball(const group_model& m, const elem& center, int radius,
                std::size_t vertex_cap = default_vertex_cap);

// Exact word distance certified inside the ball: returns the restricted BFS
// distance L when min(dist(a), dist(b)) + L <= radius guarantees a geodesic
// stays inside; nullopt when exactness cannot be certified.
std::optional<int> word_distance(const ball& b, const elem& a, const elem& c);

enum class growth_class { bounded, linear, superlinear };
const char* growth_class_name(growth_class g);

struct growth_report {
  std::vector<std::int64_t> sizes;         // |B(k)|
  std::vector<std::int64_t> sphere_sizes;  // |S(k)|
  growth_class cls = growth_class::linear;
  int window_lo = 0;        // classification window [window_lo, radius]
  int liminf_radius = 0;    // smallest sphere on the window (ties: smaller k)
  std::int64_t liminf_size = 0;

  std::string json(const group_spec& spec) const;
};

// Heuristic three-way classification; exact on the built-in models.
// Requires radius >= 4.
growth_report classify_growth(const ball& b);

// Connected components of {v : dist(v) > inner} that touch the outer
// sphere; the finite-radius end count.
int count_ends(const ball& b, int inner);

// "src_key,gen_index,dst_key" lines in (src id, gen index) order.
std::string ball_csv(const ball& b);

}  // namespace vzcert
