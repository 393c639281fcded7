#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "vzcert/group.hpp"

using namespace vzcert;

namespace {

// All products of generator words up to the given length; small but covers
// every branch of the arithmetic.
std::vector<elem> words_up_to(const group_model& m, int len) {
  std::vector<elem> out{m.identity()};
  std::set<std::vector<std::int64_t>> seen{m.identity().key};
  std::size_t lo = 0;
  for (int k = 0; k < len; ++k) {
    std::size_t hi = out.size();
    for (std::size_t i = lo; i < hi; ++i) {
      for (const elem& s : m.generators()) {
        elem w = m.multiply(out[i], s);
        if (seen.insert(w.key).second) out.push_back(w);
      }
    }
    lo = hi;
  }
  return out;
}

void check_axioms(const group_model& m) {
  auto elems = words_up_to(m, 3);
  const elem id = m.identity();
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
  for (int t = 0; t < 200; ++t) {
    const elem &a = elems[pick(rng)], &b = elems[pick(rng)], &c = elems[pick(rng)];
    CHECK(m.multiply(m.multiply(a, b), c) == m.multiply(a, m.multiply(b, c)));
    CHECK(m.multiply(a, id) == a);
    CHECK(m.multiply(id, a) == a);
    CHECK(m.multiply(a, m.inverse(a)) == id);
    CHECK(m.multiply(m.inverse(a), a) == id);
  }
}

void check_generator_set(const group_model& m) {
  const auto& gens = m.generators();
  CHECK(!gens.empty());
  for (const elem& g : gens) {
    CHECK(g != m.identity());
    elem gi = m.inverse(g);
    CHECK(std::find(gens.begin(), gens.end(), gi) != gens.end());
  }
  std::set<std::vector<std::int64_t>> dedup;
  for (const elem& g : gens) CHECK(dedup.insert(g.key).second);
}

// Independent oracle for the infinite dihedral group: affine maps
// x -> a x + b with a = +-1. r is x+1, s is -x; key (n, i) is the map
// x -> (-1)^i x + n.
struct affine {
  std::int64_t a, b;
  friend affine operator*(const affine& f, const affine& g) {
    return affine{f.a * g.a, f.a * g.b + f.b};
  }
  friend bool operator==(const affine& f, const affine& g) = default;
};

affine to_affine(const elem& e) { return affine{e.key[1] ? -1 : 1, e.key[0]}; }

}  // namespace

TEST_CASE("axioms and generating sets for every builtin model") {
  for (const char* flat : {"int_gens:1", "int_gens:2,3", "grid_d:2", "grid_d:3", "dihedral_inf",
                           "product_int_cyclic:2", "product_int_cyclic:5", "free:1", "free:2",
                           "cyclic:2", "cyclic:5", "bs12"}) {
    CAPTURE(flat);
    auto m = make_model(parse_group_flat(flat));
    check_axioms(*m);
    check_generator_set(*m);
    CHECK(m->phi(m->identity()) == 0.0);
  }
}

TEST_CASE("dihedral arithmetic matches the affine oracle") {
  auto m = make_model(parse_group_flat("dihedral_inf"));
  auto elems = words_up_to(*m, 4);
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, elems.size() - 1);
  for (int t = 0; t < 300; ++t) {
    const elem &a = elems[pick(rng)], &b = elems[pick(rng)];
    CHECK(to_affine(m->multiply(a, b)) == to_affine(a) * to_affine(b));
    affine inv = to_affine(m->inverse(a));
    CHECK(inv * to_affine(a) == (affine{1, 0}));
  }

  // frozen values: r s * r = s, s r s = r^-1, (r^n s) self-inverse
  elem r{{1, 0}}, s{{0, 1}};
  CHECK(m->multiply(elem{{1, 1}}, elem{{1, 0}}) == elem{{0, 1}});
  CHECK(m->multiply(m->multiply(s, r), s) == m->inverse(r));
  for (std::int64_t n : {-3, 1, 7}) {
    CHECK(m->inverse(elem{{n, 1}}) == elem{{n, 1}});
  }
}

TEST_CASE("bs12 is the affine group <x+1, 2x>") {
  auto m = make_model(parse_group_flat("bs12"));
  elem a{{0, 1, 0}}, b{{1, 0, 0}};
  // defining relation b a b^-1 = a^2
  elem lhs = m->multiply(m->multiply(b, a), m->inverse(b));
  CHECK(lhs == m->multiply(a, a));
  // b^-1 a b halves the translation part
  elem h = m->multiply(m->multiply(m->inverse(b), a), b);
  CHECK(h == elem{{0, 1, 1}});
  CHECK(m->phi(h) == doctest::Approx(0.5));
  check_axioms(*m);
}

TEST_CASE("free group words reduce") {
  auto m = make_model(parse_group_flat("free:2"));
  elem x{{1}}, y{{2}};
  CHECK(m->multiply(x, m->inverse(x)) == m->identity());
  elem xy = m->multiply(x, y);
  CHECK(xy == elem{{1, 2}});
  CHECK(m->inverse(xy) == elem{{-2, -1}});
  CHECK(m->multiply(m->inverse(xy), xy) == m->identity());
  CHECK_THROWS_AS(m->validate(elem{{1, -1}}), error);
  CHECK_THROWS_AS(m->validate(elem{{3}}), error);
}

TEST_CASE("cyclic and product torsion") {
  auto c5 = make_model(parse_group_flat("cyclic:5"));
  CHECK(power(*c5, elem{{1}}, 5) == c5->identity());
  CHECK(c5->phi(elem{{3}}) == -2.0);
  CHECK(c5->phi(elem{{2}}) == 2.0);

  auto p2 = make_model(parse_group_flat("product_int_cyclic:2"));
  elem t{{0, 1}};
  CHECK(p2->multiply(t, t) == p2->identity());
  CHECK(p2->generators().size() == 3);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(make_model(parse_group_flat("cyclic:1")), error);
  CHECK_THROWS_AS(make_model(parse_group_flat("int_gens:0")), error);
  CHECK_THROWS_AS(make_model(parse_group_flat("grid_d:0")), error);
  CHECK_THROWS_AS(make_model(parse_group_flat("free:0")), error);
  CHECK_THROWS_AS(parse_group_flat("what_is_this"), error);
  CHECK_THROWS_AS(parse_group_flat("int_gens:2,x"), error);
  CHECK_THROWS_AS(parse_group_json("{\"kind\":\"int_gens\"}"), error);
  CHECK_THROWS_AS(parse_group_json("not json"), error);
}

TEST_CASE("spec parsing round trips") {
  group_spec s = parse_group_flat("int_gens:2,3");
  CHECK(s.kind == "int_gens");
  CHECK(s.params == std::vector<std::int64_t>{2, 3});
  CHECK(parse_group_json(s.json()) == s);

  CHECK(parse_group_flat("grid_2") == parse_group_flat("grid_d:2"));
  CHECK(parse_group_json("{\"kind\":\"grid_d\",\"d\":2}") == parse_group_flat("grid_2"));
  CHECK(parse_group_json("{\"kind\":\"dihedral_inf\"}").kind == "dihedral_inf");
  CHECK(parse_group_flat("free:2").json() == "{\"kind\":\"free\",\"rank\":2}");
}

TEST_CASE("foreign keys are rejected") {
  auto d = make_model(parse_group_flat("dihedral_inf"));
  CHECK_THROWS_AS(d->multiply(elem{{0, 5}}, d->identity()), error);
  CHECK_THROWS_AS(d->multiply(elem{{0}}, d->identity()), error);
  auto g = make_model(parse_group_flat("grid_2"));
  CHECK_THROWS_AS(g->inverse(elem{{1, 2, 3}}), error);
  auto b = make_model(parse_group_flat("bs12"));
  CHECK_THROWS_AS(b->validate(elem{{0, 2, 1}}), error);
  CHECK_THROWS_AS(b->validate(elem{{0, 0, 3}}), error);
  auto p = make_model(parse_group_flat("product_int_cyclic:2"));
  CHECK_THROWS_AS(p->validate(elem{{0, 2}}), error);
}

TEST_CASE("key strings round trip") {
  for (const char* flat : {"int_gens:2,3", "dihedral_inf", "free:2", "bs12"}) {
    auto m = make_model(parse_group_flat(flat));
    for (const elem& e : words_up_to(*m, 3)) {
      CHECK(parse_key(key_string(e)) == e);
    }
  }
  CHECK(key_string(elem{{-2, 1}}) == "-2:1");
  CHECK(parse_key("") == elem{{}});
}

TEST_CASE("generator order is deterministic") {
  auto m = make_model(parse_group_flat("int_gens:2,3"));
  std::vector<elem> want{elem{{2}}, elem{{-2}}, elem{{3}}, elem{{-3}}};
  CHECK(m->generators() == want);
  auto d = make_model(parse_group_flat("dihedral_inf"));
  std::vector<elem> wantd{elem{{1, 0}}, elem{{-1, 0}}, elem{{0, 1}}};
  CHECK(d->generators() == wantd);
}
