#include <doctest.h>

#include <sstream>

#include "soficlab/irs.hpp"
#include "soficlab/rng.hpp"

using namespace soficlab;

TEST_CASE("empirical IRS of catalog actions") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);

  // honest rotation: only the identity fixes anything
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(12, {1}), W, 6);
  PatternMeasure mu = empirical_irs(rot, W);
  REQUIRE(mu.masses().size() == 1);
  CHECK(mu.masses().begin()->first == "10000");
  CHECK(mu.masses().begin()->second == Rational(1, 1));
  CHECK(mu.identity_violation_mass() == Rational(0, 1));
  CHECK(mu.inconsistent_mass() == Rational(0, 1));

  // trivial action: the all-ones pattern
  ApproxHom triv = ApproxHom::from_action(z, ActionSpec::trivial(10), W, 6);
  PatternMeasure mt = empirical_irs(triv, W);
  REQUIRE(mt.masses().size() == 1);
  CHECK(mt.masses().begin()->first == "11111");

  // n disjoint 2-cycles: even powers fix everything, odd powers nothing
  ApproxHom cycles =
      block_sum(ApproxHom::from_action(z, ActionSpec::cyclic(2, {1}), W, 6), 7);
  PatternMeasure mc = empirical_irs(cycles, W);
  REQUIRE(mc.masses().size() == 1);
  // window order (0, 1, -1, 2, -2)
  CHECK(mc.masses().begin()->first == "10011");
}

TEST_CASE("fixed_fraction marginals agree with the pattern measure") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom cycles =
      block_sum(ApproxHom::from_action(z, ActionSpec::cyclic(2, {1}), W, 6), 7);
  CHECK(fixed_fraction(cycles, std::vector<Element>{}) == Rational(1, 1));
  CHECK(fixed_fraction(cycles, std::vector<Element>{z->identity()}) ==
        Rational(1, 1));
  CHECK(fixed_fraction(cycles, std::vector<Element>{Element{{1}}}) ==
        Rational(0, 1));
  CHECK(fixed_fraction(cycles, std::vector<Element>{Element{{2}}}) ==
        Rational(1, 1));

  // the two computation routes agree exactly, including on noisy sigma
  ApproxHom noisy = perturb(
      ApproxHom::from_action(z, ActionSpec::cyclic(200, {1}), W, 6), 0.1, 4);
  PatternMeasure mu = empirical_irs(noisy, W);
  CounterRng rng(77);
  for (int t = 0; t < 40; ++t) {
    std::vector<Element> F;
    std::vector<int> idx;
    for (size_t i = 0; i < W.size(); ++i)
      if (rng.below(2)) {
        F.push_back(W[i]);
        idx.push_back((int)i);
      }
    CHECK(fixed_fraction(noisy, F) == mu.marginal_ones(idx));
    // monotone under enlarging F
    std::vector<Element> F2 = F;
    F2.push_back(W[(size_t)rng.below(W.size())]);
    CHECK(fixed_fraction(noisy, F2) <= fixed_fraction(noisy, F));
  }

  // inconsistent mass is bounded by the summed violation masses
  SubgroupConsistencyReport rep = subgroup_consistency_defects(noisy, W);
  Rational bound = rep.identity_mass;
  for (const auto& v : rep.product_violations) bound += v.mass;
  for (const auto& v : rep.inverse_violations) bound += v.mass;
  CHECK(mu.inconsistent_mass() <= bound);
}

TEST_CASE("tv distance") {
  auto z = Group::lattice(1);
  Window W = z->ball(1);
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(9, {1}), W, 4);
  PatternMeasure mu = empirical_irs(rot, W);
  CHECK(tv_distance(mu, mu) == Rational(0, 1));

  ApproxHom triv = ApproxHom::from_action(z, ActionSpec::trivial(9), W, 4);
  PatternMeasure nu = empirical_irs(triv, W);
  CHECK(tv_distance(mu, nu) == Rational(1, 1));  // distinct point masses

  PatternMeasure blocked = empirical_irs(block_sum(rot, 3), W);
  CHECK(tv_distance(mu, blocked) == Rational(0, 1));

  Window W2 = z->ball(2);
  PatternMeasure other = empirical_irs(rot, W2);
  CHECK_THROWS(tv_distance(mu, other));
}

TEST_CASE("IRS window spec validation") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  // pattern of 2Z within (0,1,-1,2,-2)
  IRSWindowSpec ok(W, {{"10011", Rational(1, 2)}, {"10000", Rational(1, 2)}},
                   IRSWindowSpec::Provenance::UserSupplied);
  CHECK(ok.patterns.size() == 2);
  // y(e)=0
  CHECK_THROWS(IRSWindowSpec(W, {{"00000", Rational(1, 1)}},
                             IRSWindowSpec::Provenance::UserSupplied));
  // inverse symmetry broken: y(1)=1, y(-1)=0
  CHECK_THROWS(IRSWindowSpec(W, {{"11000", Rational(1, 1)}},
                             IRSWindowSpec::Provenance::UserSupplied));
  // product closure broken: y(1)=y(-1)=1 but y(2)=0
  CHECK_THROWS(IRSWindowSpec(W, {{"11100", Rational(1, 1)}},
                             IRSWindowSpec::Provenance::UserSupplied));
  // weights must sum to 1
  CHECK_THROWS(IRSWindowSpec(W, {{"10000", Rational(1, 2)}},
                             IRSWindowSpec::Provenance::UserSupplied));
}

TEST_CASE("stats_match flags padding mismatch exactly") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(z, ActionSpec::cyclic(600, {1}), W, 6);

  std::vector<std::vector<Element>> family;
  for (const Element& g : W.elements()) family.push_back({g});

  StatsMatchReport self = stats_match(sigma, sigma, family, 1e-12);
  CHECK(self.all_pass);
  CHECK(self.max_diff == Rational(0, 1));

  // another rotation generated differently still matches
  ApproxHom other =
      ApproxHom::from_action(z, ActionSpec::cyclic(600, {7}), W, 6);
  CHECK(stats_match(sigma, other, family, 1e-12).all_pass);

  ApproxHom padded = pad_trivial(sigma, 300);
  StatsMatchReport rep = stats_match(sigma, padded, family, 0.05);
  CHECK(!rep.all_pass);
  for (const auto& row : rep.rows) {
    if (z->is_identity(row.F[0])) {
      CHECK(row.diff == Rational(0, 1));
    } else {
      CHECK(row.diff == Rational(1, 3));  // (0 + r) / (d + r) with r = d/2
      CHECK(!row.pass);
    }
  }
}

TEST_CASE("conjugation invariance defect") {
  // abelian: conjugation is trivial, defect 0 with full coverage
  auto z2 = Group::lattice(2);
  Window W = z2->ball(2);
  ApproxHom torus = ApproxHom::from_action(z2, ActionSpec::torus(5), W, 6);
  PatternMeasure mu = empirical_irs(torus, W);
  ConjInvarianceReport rep =
      conjugation_invariance_defect(mu, Element{{1, 0}});
  CHECK(rep.defect == Rational(0, 1));
  CHECK(rep.coverage == Rational(1, 1));

  // honest Heisenberg quotient: exactly conjugation-invariant statistics
  auto h3 = Group::heisenberg();
  Window HW = h3->ball(2);
  ApproxHom hm = ApproxHom::from_action(h3, ActionSpec::heis_mod(4), HW, 6);
  PatternMeasure hmu = empirical_irs(hm, HW);
  for (const Element& g : h3->generators()) {
    ConjInvarianceReport hr = conjugation_invariance_defect(hmu, g);
    CHECK(hr.defect == Rational(0, 1));
    CHECK(hr.subwindow_size > 0);
    CHECK(hr.coverage < Rational(1, 1));  // conjugation leaves the window
  }

  // perturbed case: defect bounded by 2 |W_g| max involved defect
  ApproxHom noisy = perturb(hm, 0.02, 3);
  PatternMeasure nmu = empirical_irs(noisy, HW);
  Permutation id = Permutation::identity(noisy.degree());
  for (const Element& g : h3->generators()) {
    ConjInvarianceReport nr = conjugation_invariance_defect(nmu, g);
    Element ginv = h3->inverse(g);
    Rational maxmass = hamming(noisy.evaluate(h3->identity()), id);
    for (size_t i = 0; i < HW.size(); ++i) {
      Element h = HW[i];
      if (!HW.contains(h3->conjugate(ginv, h))) continue;
      auto pair_defect = [&](const Element& a, const Element& b) {
        return hamming(noisy.evaluate(h3->multiply(a, b)),
                       compose(noisy.evaluate(a), noisy.evaluate(b)));
      };
      Rational m1 = pair_defect(ginv, h3->multiply(h, g));
      Rational m2 = pair_defect(h, g);
      Rational m3 = pair_defect(ginv, g);
      for (const Rational& m : {m1, m2, m3})
        if (maxmass < m) maxmass = m;
    }
    Rational bound = Rational(2 * (long long)nr.subwindow_size, 1) * maxmass;
    CHECK(nr.defect <= bound);
  }
}

TEST_CASE("pattern measure csv") {
  auto z = Group::lattice(1);
  Window W = z->ball(1);
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(6, {1}), W, 4);
  PatternMeasure mu = empirical_irs(rot, W);
  std::ostringstream os;
  mu.write_csv(os);
  CHECK(os.str() == "pattern,numerator,denominator\n100,1,1\n");
}
