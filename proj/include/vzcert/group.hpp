#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vzcert/errors.hpp"

namespace vzcert {

// Canonical element key. Equal keys mean equal group elements in every
// built-in model; the total order (lexicographic on the encoding) is the
// tie-break order used by every deterministic scan in the library.
struct elem {
  std::vector<std::int64_t> key;

  friend bool operator==(const elem& a, const elem& b) { return a.key == b.key; }
  friend bool operator!=(const elem& a, const elem& b) { return a.key != b.key; }
  friend bool operator<(const elem& a, const elem& b) { return a.key < b.key; }
};

struct elem_hash {
  std::size_t operator()(const elem& e) const {
    std::size_t h = 1469598103934665603ull;
    for (std::int64_t v : e.key) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// "1:0:-3" form used in CSV columns and JSON certificate fields.
std::string key_string(const elem& e);
elem parse_key(const std::string& s);

// Parsed group description. kind is one of: int_gens, grid_d, dihedral_inf,
// product_int_cyclic, free, cyclic, bs12. params holds the integer
// parameters in declaration order (generator list, dimension, modulus, rank).
struct group_spec {
  std::string kind;
  std::vector<std::int64_t> params;

  std::string flat() const;  // "int_gens:2,3" CLI form
  std::string json() const;  // {"kind":"int_gens","gens":[2,3]}

  friend bool operator==(const group_spec& a, const group_spec& b) {
    return a.kind == b.kind && a.params == b.params;
  }
};

group_spec parse_group_flat(const std::string& text);
group_spec parse_group_json(const std::string& text);

// Arithmetic oracle for one finitely generated group. No word-problem
// machinery: multiply/inverse/identity are closed-form on canonical keys.
// The generating set is inverse-closed, identity-free, and in deterministic
// order (declaration order, inverses adjacent).
class group_model {
public:
  virtual ~group_model() = default;

  const group_spec& spec() const { return spec_; }
  const std::vector<elem>& generators() const { return gens_; }

  virtual elem identity() const = 0;
  virtual elem multiply(const elem& a, const elem& b) const = 0;
  virtual elem inverse(const elem& a) const = 0;

  // Throws foreign_element on keys that are not canonical for this model.
  virtual void validate(const elem& a) const = 0;

  // Shipped real embedding (the map the QI pipeline verifies). Total on
  // canonical keys; phi(identity) == 0 in every built-in model.
  virtual double phi(const elem& a) const = 0;

  // Shipped claimed QI constants (lambda, epsilon) for phi.
  virtual std::pair<double, double> claimed_constants() const = 0;

protected:
  group_spec spec_;
  std::vector<elem> gens_;
  // Dedupes, drops identity, appends missing inverses; invalid_spec if empty.
  void finish_generators(std::vector<elem> declared);
};

std::unique_ptr<group_model> make_model(const group_spec& spec);

elem power(const group_model& m, const elem& g, std::int64_t z);

}  // namespace vzcert
