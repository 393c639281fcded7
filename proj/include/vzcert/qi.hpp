#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vzcert/ball.hpp"
#include "vzcert/parallel.hpp"

namespace vzcert {

// Candidate quasi-isometric embedding into the real line: the model's
// shipped phi plus the constants the caller claims for it.
struct qi_map {
  const group_model* model = nullptr;
  double lambda = 1.0;
  double epsilon = 0.0;

  double operator()(const elem& e) const { return model->phi(e); }
};

qi_map builtin_qi(const group_model& m);
qi_map builtin_qi(const group_model& m, double lambda, double epsilon);

struct qi_violation {
  elem a, b;
  int dist = 0;
  double image_gap = 0.0;
  bool lower = false;   // true: (1/lambda) d - eps side, false: lambda d + eps side
  double slack = 0.0;   // bound minus actual, negative here
};

struct qi_report {
  bool verified = false;
  double claimed_lambda = 0.0;
  double claimed_epsilon = 0.0;
  double tight_lambda = 0.0;    // claimed lambda
  double tight_epsilon = 0.0;   // minimal eps passing both inequalities at that lambda
  // Group-side round-trip constant: max over vertices of the in-ball
  // distance from v to the snap of phi(v). This is the k the pipeline
  // substitutes for epsilon downstream (eps_eff = max(eps, density_k)).
  double density_k = 0.0;
  // Real-side density of the image in [min_phi, max_phi]: half the largest
  // gap between consecutive image values.
  double image_density = 0.0;
  double min_phi = 0.0;
  double max_phi = 0.0;
  int radius = 0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t violation_count = 0;
  std::vector<qi_violation> violations;  // first violations in (src, dst) id order

  std::string json() const;
};

inline constexpr std::size_t verify_vertex_cap = 20000;
inline constexpr std::size_t violation_keep = 64;

// Exhaustive check of both QI inequalities over every vertex pair whose
// word distance is certified exact inside the ball. resource_limit beyond
// verify_vertex_cap vertices.
qi_report verify_qi(const ball& b, const qi_map& q, exec policy = exec::serial);

// Nearest-image snap. Entries sorted by (phi, word length, key); ties pick
// the shorter word, then the smaller key, so snapping 0 yields the identity
// whenever the ball is centered there.
struct snap_entry {
  double phi = 0.0;
  int len = 0;
  int id = 0;
};

struct snap_index {
  const ball* b = nullptr;
  std::vector<snap_entry> entries;
  std::vector<std::size_t> group_first;  // entry -> first entry with the same phi
  double min_phi = 0.0;
  double max_phi = 0.0;
  double margin = 0.0;  // allowed overshoot outside [min_phi, max_phi]
};

snap_index make_snap_index(const ball& b, const qi_map& q, double margin);
int snap_id(const snap_index& s, double x);  // out_of_range beyond the margin

// Max over vertices of the in-ball distance v -> snap(phi(v)).
double density_roundtrip(const ball& b, const snap_index& s, const qi_map& q);

// One-shot spec-level evaluation (margin = density_k + claimed epsilon).
elem quasi_inverse_eval(const ball& b, const qi_map& q, double x);

}  // namespace vzcert
