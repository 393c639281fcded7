#include "vzcert/group.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "json.hpp"

namespace vzcert {

const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_spec: return "InvalidSpec";
    case errc::foreign_element: return "ForeignElement";
    case errc::resource_limit: return "ResourceLimit";
    case errc::indeterminate: return "Indeterminate";
    case errc::out_of_range: return "OutOfRange";
    case errc::ball_too_small: return "BallTooSmall";
    case errc::inconclusive: return "Inconclusive";
    case errc::not_found: return "NotFound";
    case errc::precondition: return "PreconditionViolated";
    case errc::too_large: return "TooLarge";
    case errc::no_repeat: return "NoRepeat";
    case errc::not_flow_preserving: return "NotFlowPreserving";
    case errc::no_cycle: return "NoCycle";
    case errc::lift_mismatch: return "LiftMismatch";
    case errc::invalid_flow: return "InvalidFlow";
  }
  return "Error";
}

std::string key_string(const elem& e) {
  std::string out;
  for (std::size_t i = 0; i < e.key.size(); ++i) {
    if (i) out += ':';
    out += std::to_string(e.key[i]);
  }
  return out;
}

elem parse_key(const std::string& s) {
  elem e;
  if (s.empty()) return e;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(':', pos);
    std::string part = s.substr(pos, next == std::string::npos ? next : next - pos);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || p != part.data() + part.size()) {
      fail(errc::invalid_spec, "bad key component '" + part + "'");
    }
    e.key.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return e;
}

void group_model::finish_generators(std::vector<elem> declared) {
  const elem id = identity();
  auto present = [&](const elem& g) {
    return std::find(gens_.begin(), gens_.end(), g) != gens_.end();
  };
  for (const elem& g : declared) {
    if (g == id) continue;
    if (!present(g)) gens_.push_back(g);
    elem gi = inverse(g);
    if (!present(gi)) gens_.push_back(gi);
  }
  if (gens_.empty()) {
    fail(errc::invalid_spec, "generating set of " + spec_.flat() + " is empty");
  }
}

elem power(const group_model& m, const elem& g, std::int64_t z) {
  elem step = z >= 0 ? g : m.inverse(g);
  elem acc = m.identity();
  for (std::int64_t i = 0; i < std::llabs(z); ++i) acc = m.multiply(acc, step);
  return acc;
}

namespace {

void want_size(const elem& a, std::size_t n, const char* kind) {
  if (a.key.size() != n) {
    fail(errc::foreign_element, std::string(kind) + " key has " +
                                    std::to_string(a.key.size()) + " components, wants " +
                                    std::to_string(n));
  }
}

// --- Z with an arbitrary finite generating set -----------------------------

class int_gens_model final : public group_model {
public:
  explicit int_gens_model(const group_spec& s) {
    spec_ = s;
    if (s.params.empty()) fail(errc::invalid_spec, "int_gens wants at least one generator");
    std::vector<elem> declared;
    for (std::int64_t v : s.params) {
      if (v == 0) fail(errc::invalid_spec, "int_gens generators must be nonzero");
      declared.push_back(elem{{v}});
    }
    finish_generators(std::move(declared));
  }

  elem identity() const override { return elem{{0}}; }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    return elem{{a.key[0] + b.key[0]}};
  }
  elem inverse(const elem& a) const override {
    validate(a);
    return elem{{-a.key[0]}};
  }
  void validate(const elem& a) const override { want_size(a, 1, "int_gens"); }
  double phi(const elem& a) const override { return static_cast<double>(a.key[0]); }
  std::pair<double, double> claimed_constants() const override {
    std::int64_t m = 0;
    for (std::int64_t v : spec_.params) m = std::max<std::int64_t>(m, std::llabs(v));
    return {static_cast<double>(m), 1.0};
  }
};

// --- Z^d with the standard basis -------------------------------------------

class grid_model final : public group_model {
public:
  explicit grid_model(const group_spec& s) : d_(s.params.size() == 1 ? s.params[0] : 0) {
    spec_ = s;
    if (d_ < 1) fail(errc::invalid_spec, "grid_d wants dimension >= 1");
    std::vector<elem> declared;
    for (std::int64_t i = 0; i < d_; ++i) {
      elem e = identity();
      e.key[static_cast<std::size_t>(i)] = 1;
      declared.push_back(e);
    }
    finish_generators(std::move(declared));
  }

  elem identity() const override {
    return elem{std::vector<std::int64_t>(static_cast<std::size_t>(d_), 0)};
  }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    elem r = a;
    for (std::size_t i = 0; i < r.key.size(); ++i) r.key[i] += b.key[i];
    return r;
  }
  elem inverse(const elem& a) const override {
    validate(a);
    elem r = a;
    for (auto& v : r.key) v = -v;
    return r;
  }
  void validate(const elem& a) const override {
    want_size(a, static_cast<std::size_t>(d_), "grid_d");
  }
  // Straw-man embedding: first coordinate. Total, but not a quasi-isometry
  // for d >= 2; the verifier is expected to refute it.
  double phi(const elem& a) const override { return static_cast<double>(a.key[0]); }
  std::pair<double, double> claimed_constants() const override { return {2.0, 2.0}; }

private:
  std::int64_t d_;
};

// --- infinite dihedral ------------------------------------------------------
// Keys (n, i) encode r^n s^i with s^2 = e, s r s = r^-1.

class dihedral_model final : public group_model {
public:
  explicit dihedral_model(const group_spec& s) {
    spec_ = s;
    if (!s.params.empty()) fail(errc::invalid_spec, "dihedral_inf takes no parameters");
    finish_generators({elem{{1, 0}}, elem{{0, 1}}});
  }

  elem identity() const override { return elem{{0, 0}}; }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    std::int64_t n = a.key[0], i = a.key[1], m = b.key[0], j = b.key[1];
    return elem{{n + (i ? -m : m), (i + j) & 1}};
  }
  elem inverse(const elem& a) const override {
    validate(a);
    return a.key[1] ? a : elem{{-a.key[0], 0}};
  }
  void validate(const elem& a) const override {
    want_size(a, 2, "dihedral_inf");
    if (a.key[1] != 0 && a.key[1] != 1) fail(errc::foreign_element, "dihedral flag not in {0,1}");
  }
  double phi(const elem& a) const override { return static_cast<double>(a.key[0]); }
  std::pair<double, double> claimed_constants() const override { return {2.0, 1.0}; }
};

// --- Z x Z/m ----------------------------------------------------------------

class product_model final : public group_model {
public:
  explicit product_model(const group_spec& s) : m_(s.params.empty() ? 0 : s.params[0]) {
    spec_ = s;
    if (s.params.size() != 1 || m_ < 1) fail(errc::invalid_spec, "product_int_cyclic wants m >= 1");
    finish_generators({elem{{1, 0}}, elem{{0, m_ > 1 ? 1 : 0}}});
  }

  elem identity() const override { return elem{{0, 0}}; }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    return elem{{a.key[0] + b.key[0], (a.key[1] + b.key[1]) % m_}};
  }
  elem inverse(const elem& a) const override {
    validate(a);
    return elem{{-a.key[0], (m_ - a.key[1]) % m_}};
  }
  void validate(const elem& a) const override {
    want_size(a, 2, "product_int_cyclic");
    if (a.key[1] < 0 || a.key[1] >= m_) fail(errc::foreign_element, "torsion component out of range");
  }
  double phi(const elem& a) const override { return static_cast<double>(a.key[0]); }
  std::pair<double, double> claimed_constants() const override {
    return {2.0, std::max<double>(1.0, static_cast<double>(m_ / 2))};
  }

private:
  std::int64_t m_;
};

// --- free group -------------------------------------------------------------
// Keys are reduced words; letter l in 1..rank, inverse letters negative.

class free_model final : public group_model {
public:
  explicit free_model(const group_spec& s) : rank_(s.params.empty() ? 0 : s.params[0]) {
    spec_ = s;
    if (s.params.size() != 1 || rank_ < 1) fail(errc::invalid_spec, "free wants rank >= 1");
    std::vector<elem> declared;
    for (std::int64_t l = 1; l <= rank_; ++l) declared.push_back(elem{{l}});
    finish_generators(std::move(declared));
  }

  elem identity() const override { return elem{{}}; }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    elem r = a;
    for (std::int64_t l : b.key) {
      if (!r.key.empty() && r.key.back() == -l) {
        r.key.pop_back();
      } else {
        r.key.push_back(l);
      }
    }
    return r;
  }
  elem inverse(const elem& a) const override {
    validate(a);
    elem r;
    for (auto it = a.key.rbegin(); it != a.key.rend(); ++it) r.key.push_back(-*it);
    return r;
  }
  void validate(const elem& a) const override {
    for (std::size_t i = 0; i < a.key.size(); ++i) {
      std::int64_t l = a.key[i];
      if (l == 0 || std::llabs(l) > rank_) fail(errc::foreign_element, "free letter out of range");
      if (i && a.key[i - 1] == -l) fail(errc::foreign_element, "free word not reduced");
    }
  }
  // Straw-man embedding: signed word length.
  double phi(const elem& a) const override {
    if (a.key.empty()) return 0.0;
    double len = static_cast<double>(a.key.size());
    return a.key[0] > 0 ? len : -len;
  }
  std::pair<double, double> claimed_constants() const override { return {1.0, 1.0}; }

private:
  std::int64_t rank_;
};

// --- Z/m --------------------------------------------------------------------

class cyclic_model final : public group_model {
public:
  explicit cyclic_model(const group_spec& s) : m_(s.params.empty() ? 0 : s.params[0]) {
    spec_ = s;
    if (s.params.size() != 1 || m_ < 1) fail(errc::invalid_spec, "cyclic wants m >= 1");
    finish_generators({elem{{1 % m_}}});
  }

  elem identity() const override { return elem{{0}}; }
  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    return elem{{(a.key[0] + b.key[0]) % m_}};
  }
  elem inverse(const elem& a) const override {
    validate(a);
    return elem{{(m_ - a.key[0]) % m_}};
  }
  void validate(const elem& a) const override {
    want_size(a, 1, "cyclic");
    if (a.key[0] < 0 || a.key[0] >= m_) fail(errc::foreign_element, "residue out of range");
  }
  // Balanced representative in (-m/2, m/2].
  double phi(const elem& a) const override {
    std::int64_t r = a.key[0];
    return static_cast<double>(2 * r <= m_ ? r : r - m_);
  }
  std::pair<double, double> claimed_constants() const override {
    return {1.0, static_cast<double>(m_)};
  }

private:
  std::int64_t m_;
};

// --- BS(1,2) ----------------------------------------------------------------
// <a, b | b a b^-1 = a^2> as affine maps x -> 2^n x + q, q dyadic.
// Keys (n, p, k) encode q = p / 2^k with p odd or (p, k) = (0, 0).

class bs12_model final : public group_model {
public:
  explicit bs12_model(const group_spec& s) {
    spec_ = s;
    if (!s.params.empty()) fail(errc::invalid_spec, "bs12 takes no parameters");
    finish_generators({elem{{0, 1, 0}}, elem{{1, 0, 0}}});
  }

  elem identity() const override { return elem{{0, 0, 0}}; }

  elem multiply(const elem& a, const elem& b) const override {
    validate(a);
    validate(b);
    // 2^n1 (2^n2 x + q2) + q1 = 2^(n1+n2) x + (2^n1 q2 + q1)
    std::int64_t n1 = a.key[0], p1 = a.key[1], k1 = a.key[2];
    std::int64_t n2 = b.key[0], p2 = b.key[1], k2 = b.key[2];
    std::int64_t kb = k2 - n1;  // 2^n1 q2 = p2 / 2^kb
    if (kb < 0) {
      p2 = shl(p2, -kb);
      kb = 0;
    }
    std::int64_t kc = std::max(k1, kb);
    std::int64_t num = shl(p1, kc - k1) + shl(p2, kc - kb);
    return make(n1 + n2, num, kc);
  }

  elem inverse(const elem& a) const override {
    validate(a);
    // inverse of x -> 2^n x + q is x -> 2^-n x - q 2^-n
    std::int64_t n = a.key[0], p = a.key[1], k = a.key[2];
    std::int64_t kk = k + n;
    if (kk < 0) {
      p = shl(p, -kk);
      kk = 0;
    }
    return make(-n, -p, kk);
  }

  void validate(const elem& a) const override {
    want_size(a, 3, "bs12");
    std::int64_t p = a.key[1], k = a.key[2];
    if (k < 0) fail(errc::foreign_element, "bs12 denominator exponent negative");
    if ((p == 0 && k != 0) || (p != 0 && k > 0 && p % 2 == 0)) {
      fail(errc::foreign_element, "bs12 dyadic not normalized");
    }
  }

  double phi(const elem& a) const override {
    return static_cast<double>(a.key[0]) +
           static_cast<double>(a.key[1]) * std::pow(2.0, -static_cast<double>(a.key[2]));
  }
  std::pair<double, double> claimed_constants() const override { return {2.0, 2.0}; }

private:
  static std::int64_t shl(std::int64_t v, std::int64_t bits) {
    if (bits > 60) fail(errc::resource_limit, "bs12 dyadic exponent overflow");
    return v < 0 ? -(-v << bits) : v << bits;
  }
  static elem make(std::int64_t n, std::int64_t p, std::int64_t k) {
    if (p == 0) return elem{{n, 0, 0}};
    while (p % 2 == 0 && k > 0) {
      p /= 2;
      --k;
    }
    return elem{{n, p, k}};
  }
};

}  // namespace

std::string group_spec::flat() const {
  std::string out = kind;
  for (std::size_t i = 0; i < params.size(); ++i) {
    out += i ? ',' : ':';
    out += std::to_string(params[i]);
  }
  return out;
}

std::string group_spec::json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  if (kind == "int_gens") {
    j["gens"] = params;
  } else if (kind == "grid_d") {
    j["d"] = params.at(0);
  } else if (kind == "product_int_cyclic" || kind == "cyclic") {
    j["m"] = params.at(0);
  } else if (kind == "free") {
    j["rank"] = params.at(0);
  }
  return j.dump();
}

namespace {

std::int64_t parse_i64(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    fail(errc::invalid_spec, "bad integer '" + s + "' in group spec");
  }
  return v;
}

const char* const kinds[] = {"int_gens", "grid_d",        "dihedral_inf", "product_int_cyclic",
                             "free",     "cyclic",        "bs12"};

bool known_kind(const std::string& k) {
  for (const char* s : kinds) {
    if (k == s) return true;
  }
  return false;
}

}  // namespace

group_spec parse_group_flat(const std::string& text) {
  group_spec spec;
  std::size_t colon = text.find(':');
  spec.kind = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::string rest = text.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      std::size_t next = rest.find(',', pos);
      spec.params.push_back(parse_i64(rest.substr(pos, next == std::string::npos ? next : next - pos)));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
  }
  // "grid_2" shorthand for "grid_d:2"
  if (!known_kind(spec.kind) && spec.kind.rfind("grid_", 0) == 0 && spec.params.empty()) {
    spec.params.push_back(parse_i64(spec.kind.substr(5)));
    spec.kind = "grid_d";
  }
  if (!known_kind(spec.kind)) fail(errc::invalid_spec, "unknown group kind '" + spec.kind + "'");
  return spec;
}

group_spec parse_group_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_spec, std::string("group spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail(errc::invalid_spec, "group spec JSON wants an object with a \"kind\" string");
  }
  group_spec spec;
  spec.kind = j["kind"].get<std::string>();
  if (!known_kind(spec.kind)) fail(errc::invalid_spec, "unknown group kind '" + spec.kind + "'");
  try {
    if (spec.kind == "int_gens") {
      spec.params = j.at("gens").get<std::vector<std::int64_t>>();
    } else if (spec.kind == "grid_d") {
      spec.params = {j.at("d").get<std::int64_t>()};
    } else if (spec.kind == "product_int_cyclic" || spec.kind == "cyclic") {
      spec.params = {j.at("m").get<std::int64_t>()};
    } else if (spec.kind == "free") {
      spec.params = {j.at("rank").get<std::int64_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_spec, "group spec JSON missing parameters: " + std::string(e.what()));
  }
  return spec;
}

std::unique_ptr<group_model> make_model(const group_spec& spec) {
  if (spec.kind == "int_gens") return std::make_unique<int_gens_model>(spec);
  if (spec.kind == "grid_d") return std::make_unique<grid_model>(spec);
  if (spec.kind == "dihedral_inf") return std::make_unique<dihedral_model>(spec);
  if (spec.kind == "product_int_cyclic") return std::make_unique<product_model>(spec);
  if (spec.kind == "free") return std::make_unique<free_model>(spec);
  if (spec.kind == "cyclic") return std::make_unique<cyclic_model>(spec);
  if (spec.kind == "bs12") return std::make_unique<bs12_model>(spec);
  fail(errc::invalid_spec, "unknown group kind '" + spec.kind + "'");
}

}  // namespace vzcert
