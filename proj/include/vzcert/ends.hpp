#pragma once

#include <utility>
#include <vector>

#include "vzcert/quasi_action.hpp"

namespace vzcert {

// Action of an element on the two ends of the line. Composition follows the
// Z/2 table with preserves as the identity.
enum class end_sign { preserves, flips };

inline end_sign operator*(end_sign a, end_sign b) {
  return a == b ? end_sign::preserves : end_sign::flips;
}

const char* end_sign_name(end_sign s);

// 11-point sign probe past the stable threshold lg_of(|g*0|): all images
// positive -> preserves, all negative -> flips. Mixed signs or any image
// within l of the origin throw inconclusive instead of guessing.
end_sign end_action(const quasi_action_ctx& ctx, const elem& g);

struct end_report {
  std::vector<std::pair<elem, end_sign>> signs;           // B(radius), ball order
  std::vector<std::pair<elem, elem>> homomorphism_violations;
  std::vector<elem> kernel;                               // sign == preserves

  // Set-theoretic index of the kernel within the tested ball: 1 when every
  // element preserves, else 2.
  int kernel_index() const { return kernel.size() == signs.size() ? 1 : 2; }
  std::string json() const;
};

// Signs for all of B(radius) plus the pairwise homomorphism check
// sign(g h) = sign(g) sign(h).
end_report end_homomorphism_check(const quasi_action_ctx& ctx, int radius);

bool kernel_member(const quasi_action_ctx& ctx, const elem& g);

// Strict monotonicity probe for kernel elements: star(g,x) < star(g,x+n).
// n must strictly exceed the ctx n_threshold.
bool no_flip_check(const quasi_action_ctx& ctx, const elem& g, double x, double n);

}  // namespace vzcert
