#include <doctest.h>

#include "soficlab/approx_hom.hpp"
#include "soficlab/irs.hpp"
#include "soficlab/rng.hpp"

using namespace soficlab;

namespace {

std::vector<std::pair<Element, Element>> window_pairs(const Window& W) {
  std::vector<std::pair<Element, Element>> pairs;
  for (const Element& g : W.elements())
    for (const Element& h : W.elements()) pairs.emplace_back(g, h);
  return pairs;
}

}  // namespace

TEST_CASE("from_action: rotations") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom sigma = ApproxHom::from_action(z, ActionSpec::cyclic(5, {1}), W, 6);
  CHECK(sigma.evaluate(Element{{1}}) ==
        Permutation::from_cycles(5, {{0, 1, 2, 3, 4}}));
  DefectReport rep = defect(sigma, window_pairs(W));
  CHECK(rep.max == Rational(0, 1));
  CHECK(rep.identity_defect == Rational(0, 1));
}

TEST_CASE("from_action: Z^2 into Z/9 via (+1,+3)") {
  auto z2 = Group::lattice(2);
  Window W = z2->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(z2, ActionSpec::cyclic(9, {1, 3}), W, 6);
  // g=(1,1) acts as rotation by 1+3 = 4 mod 9
  Permutation p = sigma.evaluate(Element{{1, 1}});
  for (uint32_t j = 0; j < 9; ++j) CHECK(p(j) == (j + 4) % 9);
}

TEST_CASE("from_action: other catalog entries are honest") {
  {
    auto fa = Group::finite_abelian({2, 3});
    Window W = fa->ball(2);
    ApproxHom s = ApproxHom::from_action(fa, ActionSpec::regular(), W, 6);
    CHECK(s.degree() == 6);
    CHECK(defect(s, window_pairs(W)).max == Rational(0, 1));
  }
  {
    auto z2 = Group::lattice(2);
    Window W = z2->ball(2);
    ApproxHom s = ApproxHom::from_action(
        z2, ActionSpec::lattice_coset({{2, 1}, {0, 3}}), W, 6);
    CHECK(s.degree() == 6);  // |det| = 6
    CHECK(defect(s, window_pairs(W)).max == Rational(0, 1));
  }
  {
    auto h3 = Group::heisenberg();
    Window W = h3->ball(2);
    ApproxHom s = ApproxHom::from_action(h3, ActionSpec::heis_mod(3), W, 6);
    CHECK(s.degree() == 27);
    CHECK(defect(s, window_pairs(W)).max == Rational(0, 1));
  }
  {
    auto f2 = Group::free_group(2);
    Window W = f2->ball(2);
    ApproxHom s =
        ApproxHom::from_action(f2, ActionSpec::seeded_images(40, 5), W, 6);
    CHECK(defect(s, window_pairs(W)).max == Rational(0, 1));
  }
  auto z2 = Group::lattice(2);
  CHECK_THROWS(
      action_image(*z2, ActionSpec::seeded_images(10, 1), Element{{1, 0}}));
}

TEST_CASE("evaluate: stored vs geodesic composition") {
  auto z = Group::lattice(1);
  ActionSpec action = ActionSpec::cyclic(12, {1});
  Window W1 = z->ball(1);
  ApproxHom sigma = ApproxHom::from_action(z, action, W1, 4);

  CHECK(sigma.evaluate(z->identity()).is_identity());
  CHECK(sigma.evaluate(Element{{1}}) == sigma.stored_image(1));
  // outside the window, by word composition; equals the honest image
  CHECK(!W1.contains(Element{{2}}));
  CHECK(sigma.evaluate(Element{{2}}) == action_image(*z, action, Element{{2}}));
  CHECK(sigma.evaluate(Element{{-3}}) ==
        action_image(*z, action, Element{{-3}}));
  CHECK_THROWS(sigma.evaluate(Element{{9}}));  // length cap 4
}

TEST_CASE("defect: manual wrong square") {
  auto z = Group::lattice(1);
  Window W = Window::from_elements(
      z, {Element{{0}}, Element{{1}}, Element{{-1}}, Element{{2}}});
  Permutation swap = Permutation::from_cycles(2, {{0, 1}});
  std::vector<Permutation> images = {Permutation::identity(2), swap, swap,
                                     swap};
  ApproxHom sigma(z, W, images, 4);
  DefectReport rep = defect(
      sigma,
      std::vector<std::pair<Element, Element>>{{Element{{1}}, Element{{1}}}});
  CHECK(rep.entries[0].value == Rational(1, 1));  // sigma(2)=swap vs id
}

TEST_CASE("defect under a transposition-composed image") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ActionSpec action = ActionSpec::cyclic(40, {1});
  ApproxHom sigma = ApproxHom::from_action(z, action, W, 6);
  // replace sigma(1) with tau . sigma(1)
  std::vector<Permutation> images;
  for (size_t i = 0; i < W.size(); ++i) images.push_back(sigma.stored_image(i));
  Permutation tau = Permutation::from_cycles(40, {{3, 17}});
  int idx = W.index_of(Element{{1}});
  images[(size_t)idx] = compose(tau, images[(size_t)idx]);
  ApproxHom tweaked(z, W, images, 6);

  auto pairs = window_pairs(W);
  DefectReport before = defect(sigma, pairs);
  DefectReport after = defect(tweaked, pairs);
  Element moved_g{{1}};
  for (size_t i = 0; i < pairs.size(); ++i) {
    Rational change = (after.entries[i].value - before.entries[i].value).abs();
    Element prod = z->multiply(pairs[i].first, pairs[i].second);
    Permutation lhs_b = sigma.evaluate(prod);
    Permutation lhs_a = tweaked.evaluate(prod);
    Permutation rhs_b = compose(sigma.evaluate(pairs[i].first),
                                sigma.evaluate(pairs[i].second));
    Permutation rhs_a = compose(tweaked.evaluate(pairs[i].first),
                                tweaked.evaluate(pairs[i].second));
    long long moved = 0;
    for (uint32_t j = 0; j < 40; ++j)
      if (lhs_b(j) != lhs_a(j) || rhs_b(j) != rhs_a(j)) ++moved;
    CHECK(change <= Rational(moved, 40));
    // pairs touching the modified image once move by at most 2/d
    // (restricted to products inside the window, where the product image
    // is stored rather than re-derived from generator words)
    int occurrences = (pairs[i].first == moved_g) +
                      (pairs[i].second == moved_g) + (prod == moved_g);
    if (occurrences == 1 && W.contains(prod)) CHECK(change <= Rational(2, 40));
  }
}

TEST_CASE("perturb") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(z, ActionSpec::cyclic(1000, {1}), W, 6);

  ApproxHom zero = perturb(sigma, 0.0, 9);
  for (size_t i = 0; i < W.size(); ++i)
    CHECK(zero.stored_image(i) == sigma.stored_image(i));

  // a one-point subset cannot move anything
  ApproxHom tiny = perturb(sigma, 1.0 / 1000.0, 9);
  for (size_t i = 0; i < W.size(); ++i)
    CHECK(tiny.stored_image(i) == sigma.stored_image(i));

  ApproxHom noisy = perturb(sigma, 0.1, 9);
  ApproxHom again = perturb(sigma, 0.1, 9);
  bool some_change = false;
  for (size_t i = 0; i < W.size(); ++i) {
    CHECK(noisy.stored_image(i) == again.stored_image(i));  // seeded
    Rational dist = hamming(noisy.stored_image(i), sigma.stored_image(i));
    CHECK(dist.leq(0.101));
    some_change = some_change || !dist.is_zero();
  }
  CHECK(some_change);

  // fixed fractions move by at most |F| (rate + 1/d)
  std::vector<Element> F = {Element{{1}}, Element{{2}}};
  Rational before = fixed_fraction(sigma, F);
  Rational after = fixed_fraction(noisy, F);
  CHECK((before - after).abs().leq(2 * (0.1 + 1.0 / 1000.0)));
}

TEST_CASE("block_sum") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(z, ActionSpec::seeded_images(20, 3), W, 6);

  ApproxHom one = block_sum(sigma, 1);
  for (size_t i = 0; i < W.size(); ++i)
    CHECK(one.stored_image(i) == sigma.stored_image(i));

  ApproxHom three = block_sum(sigma, 3);
  CHECK(three.degree() == 60);
  for (const Element& g : W.elements()) {
    std::vector<Element> F = {g};
    CHECK(fixed_fraction(three, F) == fixed_fraction(sigma, F));
  }

  ApproxHom two = block_sum(sigma, 2);
  auto pairs = window_pairs(W);
  DefectReport d1 = defect(sigma, pairs);
  DefectReport d2 = defect(two, pairs);
  for (size_t i = 0; i < pairs.size(); ++i)
    CHECK(d1.entries[i].value == d2.entries[i].value);

  CHECK_THROWS(block_sum(sigma, 10, /*degree_cap=*/100));
}

TEST_CASE("pad_trivial and redimension formulas") {
  auto z = Group::lattice(1);
  Window W = z->ball(1);
  std::vector<Element> F = {Element{{1}}};

  // two disjoint 2-cycles on 4 points: theta({1}) = 0
  ApproxHom base =
      block_sum(ApproxHom::from_action(z, ActionSpec::cyclic(2, {1}), W, 6), 2);
  CHECK(fixed_fraction(base, F) == Rational(0, 1));
  CHECK(pad_trivial(base, 0).degree() == 4);
  CHECK(fixed_fraction(pad_trivial(base, 4), F) == Rational(4, 8));

  // theta = 1/2 case: (2 + 4) / 8 = 3/4
  Permutation half = Permutation::from_cycles(4, {{0, 1}});
  Window W0 =
      Window::from_elements(z, {Element{{0}}, Element{{1}}, Element{{-1}}});
  ApproxHom manual(z, W0, {Permutation::identity(4), half, half.inverse()}, 4);
  CHECK(fixed_fraction(manual, F) == Rational(1, 2));
  CHECK(fixed_fraction(pad_trivial(manual, 4), F) == Rational(3, 4));

  // defects rescale by d/(d+r): no new disagreements
  auto pairs = window_pairs(W0);
  DefectReport before = defect(manual, pairs);
  DefectReport after = defect(pad_trivial(manual, 4), pairs);
  for (size_t i = 0; i < pairs.size(); ++i)
    CHECK(after.entries[i].value == before.entries[i].value * Rational(4, 8));

  // redimension: d=5, theta=1/5, target 12 -> 4/12
  Permutation c5 = Permutation::from_cycles(5, {{0, 1, 2, 3}});  // fixes 4
  ApproxHom five(z, W0, {Permutation::identity(5), c5, c5.inverse()}, 4);
  CHECK(fixed_fraction(five, F) == Rational(1, 5));
  ApproxHom re = redimension(five, 12);
  CHECK(re.degree() == 12);
  CHECK(fixed_fraction(re, F) == Rational(4, 12));
  CHECK(fixed_fraction(redimension(five, 5), F) == Rational(1, 5));
  CHECK(fixed_fraction(redimension(five, 10), F) ==
        fixed_fraction(block_sum(five, 2), F));
  CHECK_THROWS(redimension(five, 4));
}

TEST_CASE("subgroup consistency masses") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom honest =
      ApproxHom::from_action(z, ActionSpec::cyclic(500, {1}), W, 6);
  SubgroupConsistencyReport rep = subgroup_consistency_defects(honest, W);
  CHECK(rep.identity_mass == Rational(0, 1));
  for (const auto& v : rep.product_violations) CHECK(v.mass == Rational(0, 1));
  for (const auto& v : rep.inverse_violations) CHECK(v.mass == Rational(0, 1));

  // the two counting inequalities hold on every perturbed instance
  Permutation id = Permutation::identity(500);
  for (int t = 0; t < 100; ++t) {
    ApproxHom sigma = perturb(honest, t % 2 ? 0.1 : 0.01, 50 + (uint64_t)t);
    SubgroupConsistencyReport r = subgroup_consistency_defects(sigma, W);
    for (const auto& v : r.product_violations) {
      Rational pd = hamming(sigma.evaluate(z->multiply(v.g, v.h)),
                            compose(sigma.evaluate(v.g), sigma.evaluate(v.h)));
      CHECK(v.mass <= pd);
    }
    Permutation se = sigma.evaluate(z->identity());
    for (const auto& v : r.inverse_violations) {
      Rational bound = hamming(compose(sigma.evaluate(z->inverse(v.g)),
                                       sigma.evaluate(v.g)),
                               se) +
                       hamming(se, id);
      CHECK(v.mass <= bound);
    }
  }
}
