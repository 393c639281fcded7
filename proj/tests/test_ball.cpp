#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "vzcert/ball.hpp"

using namespace vzcert;

namespace {

std::unique_ptr<group_model> model_of(const char* flat) {
  return make_model(parse_group_flat(flat));
}

ball ball_of(const group_model& m, int radius) { return build_ball(m, m.identity(), radius); }

}  // namespace

TEST_CASE("ball sizes match independent enumeration oracles") {
  // Z with gens {+-2, +-3}: direct integer-set enumeration.
  std::set<std::int64_t> reach{0};
  for (int step = 0; step < 2; ++step) {
    std::set<std::int64_t> next = reach;
    for (std::int64_t v : reach) {
      for (std::int64_t s : {2, -2, 3, -3}) next.insert(v + s);
    }
    reach = next;
  }
  CHECK(reach.size() == 13);  // frozen

  auto z23 = model_of("int_gens:2,3");
  ball b = ball_of(*z23, 2);
  CHECK(b.verts.size() == 13);
  CHECK(b.verts.size() == reach.size());
  for (const elem& v : b.verts) CHECK(reach.count(v.key[0]) == 1);

  // free group of rank 2: 2 * 3^k - 1 vertices at radius k.
  auto f2 = model_of("free:2");
  CHECK(ball_of(*f2, 3).verts.size() == 53);  // frozen

  // dihedral: |B(k)| = 4k; grid_2: 2k^2 + 2k + 1.
  CHECK(ball_of(*model_of("dihedral_inf"), 6).verts.size() == 24);
  CHECK(ball_of(*model_of("grid_2"), 6).verts.size() == 85);
  CHECK(ball_of(*model_of("int_gens:1"), 5).verts.size() == 11);
}

TEST_CASE("ball growth bound and monotone sizes") {
  for (const char* flat : {"int_gens:1", "int_gens:2,3", "grid_2", "dihedral_inf",
                           "product_int_cyclic:2", "free:2", "bs12"}) {
    CAPTURE(flat);
    auto m = model_of(flat);
    ball b = ball_of(*m, 5);
    auto sizes = b.cumulative_sizes();
    double bound = 1.0;
    double base = 2.0 * static_cast<double>(m->generators().size()) + 1.0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      CHECK(static_cast<double>(sizes[k]) <= bound);
      bound *= base;
      if (k + 1 < sizes.size()) CHECK(sizes[k] < sizes[k + 1]);  // infinite models only
    }
  }
}

TEST_CASE("word distances are exact where certified") {
  auto z = model_of("int_gens:1");
  ball b = ball_of(*z, 10);
  CHECK(word_distance(b, elem{{-3}}, elem{{4}}) == 7);  // frozen
  CHECK(word_distance(b, elem{{5}}, elem{{5}}) == 0);

  auto z23 = model_of("int_gens:2,3");
  ball b23 = ball_of(*z23, 10);
  CHECK(word_distance(b23, elem{{0}}, elem{{1}}) == 2);  // frozen: 3 - 2
  CHECK(word_distance(b23, elem{{0}}, elem{{6}}) == 2);

  // boundary pair whose geodesic cannot be certified inside the ball
  ball b5 = ball_of(*z, 5);
  CHECK(!word_distance(b5, elem{{-5}}, elem{{5}}).has_value());
  CHECK_THROWS_AS(word_distance(b5, elem{{-6}}, elem{{0}}), error);
}

TEST_CASE("left multiplication is an isometry") {
  for (const char* flat : {"int_gens:2,3", "dihedral_inf", "free:2", "bs12"}) {
    CAPTURE(flat);
    auto m = model_of(flat);
    ball b = ball_of(*m, 8);
    // sample short elements so translated pairs stay certifiable
    std::vector<elem> small;
    for (int id = 0; id < static_cast<int>(b.verts.size()); ++id) {
      if (b.dist[static_cast<std::size_t>(id)] <= 2) small.push_back(b.verts[static_cast<std::size_t>(id)]);
    }
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, small.size() - 1);
    int checked = 0;
    for (int t = 0; t < 200 && checked < 50; ++t) {
      const elem &h = small[pick(rng)], &a = small[pick(rng)], &c = small[pick(rng)];
      auto d1 = word_distance(b, a, c);
      elem ha = m->multiply(h, a), hc = m->multiply(h, c);
      if (!b.contains(ha) || !b.contains(hc)) continue;
      auto d2 = word_distance(b, ha, hc);
      if (d1 && d2) {
        CHECK(*d1 == *d2);
        ++checked;
      }
    }
    CHECK(checked >= 50);
  }
}

TEST_CASE("growth classification is exact on builtin models") {
  auto cls = [&](const char* flat, int radius) {
    auto m = model_of(flat);
    ball b = ball_of(*m, radius);
    return classify_growth(b).cls;
  };
  CHECK(cls("int_gens:1", 8) == growth_class::linear);
  CHECK(cls("int_gens:2,3", 8) == growth_class::linear);
  CHECK(cls("dihedral_inf", 8) == growth_class::linear);
  CHECK(cls("product_int_cyclic:2", 8) == growth_class::linear);
  CHECK(cls("product_int_cyclic:5", 8) == growth_class::linear);
  CHECK(cls("grid_2", 8) == growth_class::superlinear);
  CHECK(cls("free:2", 8) == growth_class::superlinear);
  CHECK(cls("bs12", 8) == growth_class::superlinear);
  CHECK(cls("cyclic:5", 8) == growth_class::bounded);
  CHECK(cls("cyclic:2", 8) == growth_class::bounded);

  auto m = model_of("int_gens:1");
  ball b3 = ball_of(*m, 3);
  CHECK_THROWS_AS(classify_growth(b3), error);
}

TEST_CASE("liminf sphere sizes") {
  auto d = model_of("dihedral_inf");
  growth_report r = classify_growth(ball_of(*d, 8));
  CHECK(r.liminf_size == 4);  // frozen
  CHECK(r.liminf_radius == 4);

  auto z = model_of("int_gens:1");
  growth_report rz = classify_growth(ball_of(*z, 8));
  CHECK(rz.liminf_size == 2);

  auto g = model_of("grid_2");
  growth_report rg = classify_growth(ball_of(*g, 8));
  CHECK(rg.liminf_size == 16);  // 4k at k = 4
  CHECK(rg.liminf_radius == 4);
}

TEST_CASE("finite-radius ends") {
  auto ends = [&](const char* flat, int inner, int radius) {
    auto m = model_of(flat);
    ball b = ball_of(*m, radius);
    return count_ends(b, inner);
  };
  CHECK(ends("int_gens:1", 2, 6) == 2);   // frozen
  CHECK(ends("grid_2", 2, 6) == 1);       // frozen
  CHECK(ends("cyclic:5", 2, 6) == 0);     // frozen
  CHECK(ends("free:2", 2, 6) == 36);      // 4 * 3^2 branch components
  CHECK(ends("free:2", 2, 6) > 2);
  CHECK(ends("dihedral_inf", 2, 6) == 2);
  CHECK(ends("int_gens:2,3", 2, 8) == 2);

  auto m = model_of("int_gens:1");
  ball b = ball_of(*m, 6);
  CHECK_THROWS_AS(count_ends(b, 6), error);
  CHECK_THROWS_AS(count_ends(b, -1), error);
}

TEST_CASE("ends agree with a union-find oracle") {
  for (const char* flat : {"int_gens:1", "grid_2", "dihedral_inf", "free:2", "cyclic:5"}) {
    CAPTURE(flat);
    auto m = model_of(flat);
    ball b = ball_of(*m, 6);
    int inner = 2;

    // independent oracle: union-find over the exported adjacency
    std::vector<int> parent(b.verts.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (std::size_t v = 0; v < b.verts.size(); ++v) {
      if (b.dist[v] <= inner) continue;
      for (auto [gi, w] : b.adj[v]) {
        (void)gi;
        if (b.dist[static_cast<std::size_t>(w)] <= inner) continue;
        parent[static_cast<std::size_t>(find(static_cast<int>(v)))] = find(w);
      }
    }
    std::set<int> roots;
    for (std::size_t v = 0; v < b.verts.size(); ++v) {
      if (b.dist[v] == b.radius) roots.insert(find(static_cast<int>(v)));
    }
    CHECK(count_ends(b, inner) == static_cast<int>(roots.size()));
  }
}

TEST_CASE("adjacency csv is deterministic and complete") {
  auto z = model_of("int_gens:1");
  ball b = ball_of(*z, 1);
  CHECK(ball_csv(b) ==
        "src_key,gen_index,dst_key\n"
        "0,0,1\n"
        "0,1,-1\n"
        "1,1,0\n"
        "-1,0,0\n");

  ball b5 = ball_of(*z, 5);
  CHECK(ball_csv(b5) == ball_csv(ball_of(*z, 5)));  // byte-identical rebuild
}

TEST_CASE("vertex cap raises a resource error") {
  auto f2 = model_of("free:2");
  CHECK_THROWS_AS(build_ball(*f2, f2->identity(), 10, 100), error);
}

TEST_CASE("balls can be centered away from the identity") {
  auto z = model_of("int_gens:1");
  ball b = build_ball(*z, elem{{5}}, 3);
  CHECK(b.verts.size() == 7);
  CHECK(b.dist[b.index.at(elem{{8}})] == 3);
}
