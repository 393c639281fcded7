#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "vzcert/rigidity.hpp"

using namespace vzcert;

namespace {

struct fixture {
  std::unique_ptr<group_model> model;
  ball b;
  quasi_action_ctx ctx;
  fixture(const char* flat, int radius, double lambda, double epsilon,
          double x_max = 10.0, int w_max = 3)
      : model(make_model(parse_group_flat(flat))) {
    b = build_ball(*model, model->identity(), radius);
    ctx = make_ctx(b, builtin_qi(*model, lambda, epsilon), x_max, w_max);
  }
};

// Independent coset oracle: pairwise partition of B(ceil(k)) by
// "w v^-1 is an enumerated power of g".
long long coset_oracle(const quasi_action_ctx& ctx, const elem& g, double k) {
  const ball& b = *ctx.b;
  const int ck = static_cast<int>(std::ceil(k));
  const int cap = b.radius - ck;
  std::set<elem> powers;
  for (int dir = 0; dir < 2; ++dir) {
    elem step = dir == 0 ? g : ctx.model->inverse(g);
    elem p = step;
    while (b.contains(p) && b.dist[static_cast<std::size_t>(b.id_of(p))] <= cap) {
      powers.insert(p);
      p = ctx.model->multiply(p, step);
    }
  }
  std::vector<elem> region;
  for (std::size_t v = 0; v < b.verts.size(); ++v)
    if (b.dist[v] <= ck) region.push_back(b.verts[v]);

  std::vector<int> cls(region.size());
  std::iota(cls.begin(), cls.end(), 0);
  for (std::size_t i = 0; i < region.size(); ++i) {
    for (std::size_t j = i + 1; j < region.size(); ++j) {
      elem diff = ctx.model->multiply(region[j], ctx.model->inverse(region[i]));
      if (powers.count(diff)) {
        int a = cls[i], c = cls[j];
        if (a != c)
          for (int& x : cls)
            if (x == c) x = a;
      }
    }
  }
  std::set<int> roots(cls.begin(), cls.end());
  return static_cast<long long>(roots.size());
}

}  // namespace

TEST_CASE("translation thresholds match hand evaluation") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  CHECK(translation_threshold(z.ctx) == 11.0);
  fixture w("int_gens:2,3", 16, 3.0, 1.0);
  CHECK(translation_threshold(w.ctx) == 3657.0);
  fixture d("dihedral_inf", 64, 2.0, 1.0);
  CHECK(translation_threshold(d.ctx) == 318.0);
  fixture p("product_int_cyclic:2", 64, 2.0, 1.0);
  CHECK(translation_threshold(p.ctx) == 318.0);
}

TEST_CASE("translation search returns the first qualifying element") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  CHECK(find_translation_element(z.ctx) == elem{{12}});

  fixture d("dihedral_inf", 2048, 2.0, 1.0);
  CHECK(find_translation_element(d.ctx) == elem{{319, 0}});  // (318,1) flips, rejected

  fixture p("product_int_cyclic:2", 2048, 2.0, 1.0);
  CHECK(find_translation_element(p.ctx) == elem{{318, 1}});  // sorts before (319,0)
}

TEST_CASE("translation search reports absence in bounded groups") {
  fixture c("cyclic:5", 5, 1.0, 5.0, 2.0, 1);
  CHECK_THROWS_AS(find_translation_element(c.ctx), error);
  try {
    find_translation_element(c.ctx);
  } catch (const error& e) {
    CHECK(e.code() == errc::not_found);
  }
}

TEST_CASE("orbit of an exact translation is an arithmetic progression") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  orbit_report r = make_orbit_report(z.ctx, elem{{7}}, 5);
  REQUIRE(r.positions.size() == 11);
  for (int zz = -5; zz <= 5; ++zz)
    CHECK(r.positions[static_cast<std::size_t>(zz + 5)] == 7.0 * zz);
  CHECK(r.min_gap == 7.0);
  CHECK(r.max_gap == 7.0);
  CHECK(r.monotone);

  fixture d("dihedral_inf", 64, 2.0, 1.0);
  orbit_report rd = make_orbit_report(d.ctx, elem{{3, 0}}, 4);
  for (int zz = -4; zz <= 4; ++zz)
    CHECK(rd.positions[static_cast<std::size_t>(zz + 4)] == 3.0 * zz);
  CHECK(rd.monotone);
}

TEST_CASE("orbit power bookkeeping stays within the accumulated error bound") {
  fixture w("int_gens:2,3", 32, 3.0, 1.0);
  elem g{{7}};
  orbit_report r = make_orbit_report(w.ctx, g, 4);
  double step_err = w.ctx.eps_eff + w.ctx.lambda * w.ctx.eps_eff;
  for (int zz = -4; zz <= 4; ++zz) {
    double direct = w.ctx.qi(power(*w.model, g, zz));
    double iterated = r.positions[static_cast<std::size_t>(zz + 4)];
    CHECK(std::fabs(direct - iterated) <= step_err * (std::abs(zz) + 1));
  }
}

TEST_CASE("orbit csv and svg are stable byte for byte") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  orbit_report r = make_orbit_report(z.ctx, elem{{2}}, 2);
  CHECK(r.csv() == "z,position\n-2,-4\n-1,-2\n0,0\n1,2\n2,4\n");
  std::string svg = r.svg();
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("orbit of 2 on the line") != std::string::npos);
  std::size_t circles = 0;
  for (std::size_t at = svg.find("<circle"); at != std::string::npos; at = svg.find("<circle", at + 1)) ++circles;
  CHECK(circles == 6);  // five positions plus the highlighted origin ring
  CHECK(r.svg() == svg);
}

TEST_CASE("infinite order holds for found elements and fails for torsion") {
  fixture z("int_gens:1", 128, 1.0, 1.0);
  elem g = find_translation_element(z.ctx);
  orbit_report r = make_orbit_report(z.ctx, g, 8);
  CHECK(infinite_order_check(z.ctx, r));

  fixture c("cyclic:5", 5, 1.0, 5.0, 2.0, 1);
  orbit_report rc = make_orbit_report(c.ctx, elem{{1}}, 5);
  CHECK(!rc.monotone);
  CHECK(!infinite_order_check(c.ctx, rc));
}

TEST_CASE("quasi-density constants match hand scans") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  CHECK(quasi_density_constant(z.ctx, elem{{7}}, 8) == 3.0);

  fixture z2("int_gens:1", 16, 1.0, 1.0, 5.0, 2);
  CHECK(quasi_density_constant(z2.ctx, elem{{1}}, 8) == 0.0);

  fixture d("dihedral_inf", 16, 2.0, 1.0, 5.0, 2);
  CHECK(quasi_density_constant(d.ctx, elem{{1, 0}}, 8) == 1.0);

  // orbit power outside the ball
  CHECK_THROWS_AS(quasi_density_constant(z2.ctx, elem{{7}}, 8), error);
}

TEST_CASE("coset counts agree with the pairwise oracle") {
  fixture z("int_gens:1", 64, 1.0, 1.0);
  CHECK(coset_count(z.ctx, elem{{7}}, 3.0) == 7);
  CHECK(coset_count(z.ctx, elem{{7}}, 3.0) == coset_oracle(z.ctx, elem{{7}}, 3.0));
  CHECK(coset_count(z.ctx, elem{{1}}, 0.0) == 1);

  fixture d("dihedral_inf", 32, 2.0, 1.0, 5.0, 2);
  double k = quasi_density_constant(d.ctx, elem{{3, 0}}, 8);
  CHECK(k == 2.0);
  CHECK(coset_count(d.ctx, elem{{3, 0}}, k) == 6);
  CHECK(coset_oracle(d.ctx, elem{{3, 0}}, k) == 6);

  fixture p("product_int_cyclic:2", 32, 2.0, 1.0, 5.0, 2);
  double kp = quasi_density_constant(p.ctx, elem{{3, 1}}, 8);
  CHECK(coset_count(p.ctx, elem{{3, 1}}, kp) == coset_oracle(p.ctx, elem{{3, 1}}, kp));
}

TEST_CASE("coset counting refuses undecidable configurations") {
  fixture z("int_gens:1", 16, 1.0, 1.0, 5.0, 2);
  CHECK_THROWS_AS(coset_count(z.ctx, elem{{7}}, 6.0), error);
  try {
    coset_count(z.ctx, elem{{7}}, 6.0);
  } catch (const error& e) {
    CHECK(e.code() == errc::indeterminate);
  }
}

TEST_CASE("certify: one-generator line") {
  certificate c = certify_virtually_z(parse_group_flat("int_gens:1"));
  CHECK(c.virtually_z());
  CHECK(c.g == elem{{12}});
  CHECK(c.g_length == 12);
  CHECK(c.cosets == 12);
  CHECK(c.cosets == c.g_length);  // index equals the word length of g here
  CHECK(c.quasi_density_k == 6.0);
  CHECK(c.radius == 128);
  CHECK(c.verify_radius == 10);
  CHECK(c.eps_eff == 1.0);
  CHECK(c.derived.n_threshold == 5.0);
  CHECK(c.n_prime == 12.0);
  REQUIRE(c.checks.size() == 8);
  const char* names[] = {"verify_qi", "four_properties", "end_homomorphism",
                         "find_translation_element", "orbit_monotone", "infinite_order",
                         "quasi_density", "coset_count"};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(c.checks[i].name == names[i]);
    CHECK(c.checks[i].passed);
  }
}

TEST_CASE("certify: infinite dihedral") {
  certificate c = certify_virtually_z(parse_group_flat("dihedral_inf"));
  CHECK(c.virtually_z());
  CHECK(c.g == elem{{319, 0}});
  CHECK(c.g_length == 319);
  CHECK(c.cosets == 638);
  CHECK(c.cosets == 2 * c.g_length);  // rotation classes times two for reflections
  CHECK(c.quasi_density_k == 160.0);
  CHECK(c.radius == 4096);
}

TEST_CASE("certify: product with a finite factor") {
  certificate c = certify_virtually_z(parse_group_flat("product_int_cyclic:2"));
  CHECK(c.virtually_z());
  CHECK(c.g == elem{{318, 1}});
  CHECK(c.g_length == 319);
  CHECK(c.cosets == 636);
  // unlike the dihedral orbit (all flips zero), this orbit alternates the
  // finite coordinate, so every midpoint has a parity-matching neighbor
  CHECK(c.quasi_density_k == 159.0);
  CHECK(c.radius == 4096);
}

TEST_CASE("certify: two-generator line at claimed constants (3,1)") {
  certificate c = certify_virtually_z(parse_group_flat("int_gens:2,3"));
  CHECK(c.virtually_z());
  CHECK(c.g == elem{{10972}});
  CHECK(c.g_length == 3658);
  CHECK(c.cosets == 10972);
  CHECK(c.quasi_density_k == 7019.0);
  CHECK(c.radius == 65536);
  // arithmetic oracle: cosets of <10972> met by integers within the region
  std::set<std::int64_t> residues;
  for (std::int64_t v = -21057; v <= 21057; ++v) residues.insert(((v % 10972) + 10972) % 10972);
  CHECK(c.cosets == static_cast<long long>(residues.size()));
}

TEST_CASE("certify: constant overrides shrink the whole chain") {
  certify_params p;
  p.lambda_override = 1.0;
  p.epsilon_override = 0.5;
  certificate c = certify_virtually_z(parse_group_flat("int_gens:1"), p);
  CHECK(c.virtually_z());
  CHECK(c.lambda == 1.0);
  CHECK(c.epsilon == 0.5);
  CHECK(c.eps_eff == 0.5);
  CHECK(c.derived.n_threshold == 3.0);
  CHECK(c.g == elem{{7}});
  CHECK(c.cosets == 7);
  CHECK(c.quasi_density_k == 3.0);
  CHECK(c.radius == 64);
}

TEST_CASE("certify: exact-isometry constants are too tight for the point grid") {
  // at eps 0 the snap quantization alone moves half-integer points by 0.5,
  // so the identity-on-points property cannot hold
  certify_params p;
  p.lambda_override = 1.0;
  p.epsilon_override = 0.0;
  certificate c = certify_virtually_z(parse_group_flat("int_gens:1"), p);
  CHECK(!c.virtually_z());
  CHECK(c.verdict == "Inconclusive");
  REQUIRE(!c.checks.empty());
  CHECK(c.checks.back().name == "four_properties");
  CHECK(!c.checks.back().passed);
}

TEST_CASE("certify: straw-man embeddings are refuted at the pair scan") {
  certificate g2 = certify_virtually_z(parse_group_flat("grid_2"));
  CHECK(!g2.virtually_z());
  CHECK(g2.verdict == "Inconclusive");
  REQUIRE(!g2.checks.empty());
  CHECK(g2.checks[0].name == "verify_qi");
  CHECK(!g2.checks[0].passed);

  certificate fr = certify_virtually_z(parse_group_flat("free:2"));
  CHECK(!fr.virtually_z());
  CHECK(fr.checks[0].name == "verify_qi");
  CHECK(!fr.checks[0].passed);
  CHECK(fr.verify_radius < 10);  // pair scan ball was halved to stay affordable
}

TEST_CASE("certify: bounded groups stop at the context stage") {
  certificate c = certify_virtually_z(parse_group_flat("cyclic:5"));
  CHECK(!c.virtually_z());
  REQUIRE(c.checks.size() >= 2);
  CHECK(c.checks[0].name == "verify_qi");
  CHECK(c.checks[0].passed);  // a 5-point image is a fine QI image of itself
  CHECK(c.checks[1].name == "quasi_action_ctx");
  CHECK(!c.checks[1].passed);
}

TEST_CASE("certify: exponential growth exhausts the vertex budget") {
  certificate c = certify_virtually_z(parse_group_flat("bs12"));
  CHECK(!c.virtually_z());
  CHECK(c.verdict == "Inconclusive");
}

TEST_CASE("certificates rerun byte-identically, serial or parallel") {
  certificate a = certify_virtually_z(parse_group_flat("dihedral_inf"));
  certificate b = certify_virtually_z(parse_group_flat("dihedral_inf"));
  CHECK(a.json() == b.json());

  certify_params pp;
  pp.policy = exec::parallel;
  certificate c = certify_virtually_z(parse_group_flat("dihedral_inf"), pp);
  CHECK(a.json() == c.json());
}

TEST_CASE("certificate json carries the full check list") {
  certificate c = certify_virtually_z(parse_group_flat("int_gens:1"));
  nlohmann::json j = nlohmann::json::parse(c.json());
  CHECK(j["schema"] == "vzcert.certificate.v1");
  CHECK(j["verdict"] == "VirtuallyZ");
  CHECK(j["group"]["kind"] == "int_gens");
  CHECK(j["constants"]["lambda"] == 1.0);
  CHECK(j["constants"]["n"] == 6.0);
  CHECK(j["g"] == "12");
  CHECK(j["coset_count"] == 12);
  REQUIRE(j["checks"].size() == 8);
  for (const auto& chk : j["checks"]) CHECK(chk["passed"] == true);
}
