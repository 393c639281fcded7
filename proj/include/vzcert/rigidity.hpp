#pragma once

#include <string>
#include <vector>

#include "vzcert/ends.hpp"

namespace vzcert {

struct orbit_report {
  elem g;
  int z_max = 0;
  std::vector<double> positions;  // positions[z + z_max] = g^z * 0
  double min_gap = 0.0;
  double max_gap = 0.0;
  bool monotone = false;

  std::string csv() const;  // "z,position" rows
  std::string svg() const;  // number-line plot of the orbit
};

// Word-length bound a translation element must strictly exceed:
// lambda(eps + lambda^2(eps/lambda + lambda*eps + 2*eps + n)), evaluated at
// the ctx effective epsilon with n = n_threshold + 1.
double translation_threshold(const quasi_action_ctx& ctx);

// First element in (word length, key) order that preserves the ends, moves
// 0 in the positive direction, and sits strictly beyond the threshold.
// not_found when the ball holds no such element.
elem find_translation_element(const quasi_action_ctx& ctx);

// Orbit positions by iterating star(g, .) from 0 (and star(g^-1, .) for
// negative powers), never by evaluating far powers directly.
orbit_report make_orbit_report(const quasi_action_ctx& ctx, const elem& g, int z_max);

// |position(z)| >= |z| * n for every tested z, and no power g^z with
// 1 <= z <= z_max collapses to the identity.
bool infinite_order_check(const quasi_action_ctx& ctx, const orbit_report& orbit);

// Max over vertices of B(R - maxlen(g^z)) of the in-ball distance to the
// nearest orbit element g^z, |z| <= z_max. Needs no line map, so the flow
// certifier can reuse it.
double quasi_density_constant(const group_model& m, const ball& b, const elem& g, int z_max);
double quasi_density_constant(const quasi_action_ctx& ctx, const elem& g, int z_max);

// Distinct right cosets <g>v among v in B(ceil(k)), identifying v and w when
// w v^-1 is an enumerated power of g (word length <= R - ceil(k)).
// indeterminate when R < 3*ceil(k) leaves some pair undecidable.
long long coset_count(const group_model& m, const ball& b, const elem& g, double k);
long long coset_count(const quasi_action_ctx& ctx, const elem& g, double k);

struct certify_params {
  int verify_radius = 10;      // pair-scan ball; halved while it overflows
  int initial_radius = 16;     // evaluation ball start; doubled on demand
  std::size_t vertex_cap = default_vertex_cap;
  int z_max = 8;
  double x_max = 20.0;
  double grid_step = 0.5;  // spacing of the property-scan sample points
  int w_max = 3;
  double lambda_override = 0.0;   // > 0 replaces the model's claimed lambda
  double epsilon_override = -1.0; // >= 0 replaces the model's claimed epsilon
  exec policy = exec::serial;
};

struct check_result {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct certificate {
  group_spec spec;
  std::string verdict;  // "VirtuallyZ" or "Inconclusive"
  double lambda = 0.0;
  double epsilon = 0.0;
  double density_k = 0.0;
  double eps_eff = 0.0;
  derived_constants derived;
  double n_prime = 0.0;  // empirical orbit max gap
  elem g;
  int g_length = 0;
  int z_max = 0;
  double quasi_density_k = 0.0;
  long long cosets = 0;
  int radius = 0;         // evaluation ball radius finally used
  int verify_radius = 0;  // pair-scan ball radius actually used
  orbit_report orbit;
  std::vector<check_result> checks;

  bool virtually_z() const { return verdict == "VirtuallyZ"; }
  std::string json() const;
};

// The full pipeline: pair scan, context build, four properties, end
// homomorphism, translation search, orbit and order checks, quasi-density,
// coset count. Failures become named checks on an Inconclusive certificate;
// the evaluation ball is regrown on demand up to the vertex cap.
certificate certify_virtually_z(const group_spec& spec, certify_params params = {});

}  // namespace vzcert
