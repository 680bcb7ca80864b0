#include <doctest.h>

#include <cmath>

#include "soficlab/bernoulli.hpp"
#include "soficlab/parallel.hpp"
#include "soficlab/rng.hpp"

using namespace soficlab;

namespace {

StepFunction half() { return StepFunction::lower_indicator(2, 1); }

CylinderFunction make_f(std::vector<std::pair<Element, StepFunction>> labels,
                        std::vector<Element> bits = {}) {
  CylinderFunction f;
  f.labels = std::move(labels);
  f.bits = std::move(bits);
  return f;
}

}  // namespace

TEST_CASE("step functions") {
  StepFunction f(4, {1.0, 0.5, 0.25, 0.0});
  CHECK(f(0.0) == 1.0);
  CHECK(f(0.30) == 0.5);
  CHECK(f(0.99) == 0.0);
  CHECK(f.integral() == doctest::Approx(0.4375).epsilon(1e-15));
  CHECK(f.sup_norm() == 1.0);
  CHECK_THROWS(StepFunction(2, {1.0, -0.5}));

  std::vector<StepFunction> prod = {half(), StepFunction(3, {1.0, 1.0, 0.0})};
  // common refinement on 6 bins: [0,1/2) * [0,2/3) has measure 1/2 * ... = 1/3...
  // exact: bins of 1/6: f1=1 on bins 0..2, f2=1 on bins 0..3 -> overlap 3 bins = 1/2?
  // f1: [0, 3/6), f2: [0, 4/6): product is 1 on [0, 3/6) -> 1/2
  CHECK(integral_of_product(prod) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("mu_theta closed form") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  Element e = z->identity();
  Element two{{2}};

  // point mass on the identity-only pattern: two singleton cosets
  IRSWindowSpec only_e(W, {{"10000", Rational(1, 1)}},
                       IRSWindowSpec::Provenance::UserSupplied);
  CylinderFunction f = make_f({{e, half()}, {two, half()}});
  CHECK(mu_theta(f, only_e) == doctest::Approx(0.25).epsilon(1e-15));

  // point mass on the 2Z pattern: {0,2} is a single coset class
  IRSWindowSpec two_z(W, {{"10011", Rational(1, 1)}},
                      IRSWindowSpec::Provenance::UserSupplied);
  CHECK(mu_theta(f, two_z) == doctest::Approx(0.5).epsilon(1e-15));

  // any theta integrates constants to 1
  CylinderFunction ones =
      make_f({{e, StepFunction::constant(1.0)}, {two, StepFunction::constant(1.0)}});
  CHECK(mu_theta(ones, only_e) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mu_theta(ones, two_z) == doctest::Approx(1.0).epsilon(1e-15));

  // closure precondition: E*E^-1 must fit in the window
  Window W1 = z->ball(1);
  IRSWindowSpec small(W1, {{"100", Rational(1, 1)}},
                      IRSWindowSpec::Provenance::UserSupplied);
  CHECK_THROWS(mu_theta(f, small));
}

TEST_CASE("phi_f closed form") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  Element e = z->identity();
  CylinderFunction f = make_f({{e, half()}, {Element{{2}}, half()}});

  // identity-only pattern: all exponents 1
  CHECK(phi_f("10000", W, f) == doctest::Approx(0.25).epsilon(1e-12));
  // 2Z pattern: one class of size two, (1/2)^(1/2) twice
  CHECK(phi_f("10011", W, f) == doctest::Approx(0.5).epsilon(1e-12));
  // all f constant 1: phi reduces to the bit gate
  CylinderFunction gate = make_f({{e, StepFunction::constant(1.0)}},
                                 {Element{{1}}});
  CHECK(phi_f("10000", W, gate) == 0.0);
  CHECK(phi_f("11111", W, gate) == 1.0);
  CHECK_THROWS(phi_f("00000", W, f));  // needs y(e) = 1
}

TEST_CASE("sample_labels is a counter-based generator") {
  Labels a = sample_labels(10000, 42);
  Labels b = sample_labels(10000, 42);
  CHECK(a.x == b.x);
  Labels c = sample_labels(10000, 43);
  int differ = 0;
  for (size_t j = 0; j < a.x.size(); ++j)
    if (a.x[j] != c.x[j]) ++differ;
  CHECK(differ >= 9900);
  for (double v : a.x) CHECK((v >= 0.0 && v < 1.0));

  Labels big = sample_labels(100000, 7);
  double mean = 0.0;
  for (double v : big.x) mean += v;
  mean /= (double)big.x.size();
  CHECK(std::fabs(mean - 0.5) <= 4.0 / std::sqrt(12.0 * 100000.0));
}

TEST_CASE("pushforward") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(64, {1}), W, 6);
  Labels x = sample_labels(64, 3);

  CylinderFunction unit;
  CHECK(pushforward(rot, x, unit) == 1.0);

  CylinderFunction dead = make_f({}, {Element{{1}}});  // fixed-point-free bit
  CHECK(pushforward(rot, x, dead) == 0.0);

  ApproxHom triv1 = ApproxHom::from_action(z, ActionSpec::trivial(1), W, 6);
  CylinderFunction fe =
      make_f({{z->identity(), half()}, {Element{{1}}, half()}});
  Labels x1 = sample_labels(1, 9);
  double expect = x1.x[0] < 0.5 ? 1.0 : 0.0;
  CHECK(pushforward(triv1, x1, fe) == expect);
}

TEST_CASE("exact_mean factorizations") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  Element e = z->identity();

  // rotation: all preimages distinct, so the mean is a product of integrals
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(50, {1}), W, 6);
  CylinderFunction f =
      make_f({{e, StepFunction(4, {1.0, 0.5, 0.25, 0.0})}, {Element{{1}}, half()}});
  CHECK(exact_mean(rot, f) ==
        doctest::Approx(0.4375 * 0.5).epsilon(1e-14));

  // d=1 trivial action: preimages coincide
  ApproxHom triv1 = ApproxHom::from_action(z, ActionSpec::trivial(1), W, 6);
  CylinderFunction ff = make_f({{e, half()}, {Element{{1}}, half()}});
  CHECK(exact_mean(triv1, ff) == doctest::Approx(0.5).epsilon(1e-15));

  // Monte Carlo agrees within 4 sqrt(var/S)
  ApproxHom rot1k =
      ApproxHom::from_action(z, ActionSpec::cyclic(1000, {1}), W, 6);
  double mean = exact_mean(rot1k, ff);
  double var = exact_variance(rot1k, ff);
  McStats st = mc_stats(rot1k, ff, 4096, 17);
  CHECK(std::fabs(st.mean - mean) <= 4.0 * std::sqrt(var / 4096.0));
  CHECK(st.sample_variance >= 0.5 * var);
  CHECK(st.sample_variance <= 2.0 * var);
}

TEST_CASE("exact_variance") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  Element e = z->identity();

  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(100, {1}), W, 6);
  CylinderFunction bit_only = make_f({}, {e});
  CHECK(exact_variance(rot, bit_only) == 0.0);  // no label dependence

  // always within the (2/d)|E|^2 prod sup^2 envelope
  CounterRng rng(5);
  for (int t = 0; t < 100; ++t) {
    CylinderFunction f;
    Window W1 = z->ball(1);
    for (const Element& g : W1.elements()) {
      if (rng.below(3) == 0) continue;
      int bins = 1 << rng.below(3);
      std::vector<double> vals((size_t)bins);
      for (auto& v : vals) v = 2.0 * rng.next_unit();
      f.labels.emplace_back(g, StepFunction(bins, std::move(vals)));
    }
    if (f.labels.empty()) f.labels.emplace_back(e, half());
    double v = exact_variance(rot, f);
    double sup2 = 1.0;
    for (const auto& [g, fn] : f.labels) sup2 *= fn.sup_norm() * fn.sup_norm();
    CHECK(v <= 2.0 / 100.0 * (double)(f.labels.size() * f.labels.size()) * sup2);
  }

  // block decomposition: variance scales by exactly 1/q for q = 4
  CylinderFunction ff = make_f({{e, half()}, {Element{{1}}, half()}});
  double v1 = exact_variance(rot, ff);
  double v4 = exact_variance(block_sum(rot, 4), ff);
  CHECK(v4 == 0.25 * v1);

  // mc sanity: constant integrand has zero spread
  CylinderFunction unit;
  McStats st = mc_stats(rot, unit, 16, 2);
  CHECK(st.mean == 1.0);
  CHECK(st.sample_variance == 0.0);
}

TEST_CASE("translate_cylinder") {
  auto z2 = Group::lattice(2);
  Element e = z2->identity();
  Element a{{1, 0}};
  Element b{{0, 1}};
  CylinderFunction f = make_f({{e, half()}, {a, half()}}, {b});

  CylinderFunction same = translate_cylinder(*z2, f, e);
  CHECK(same.labels[0].first == e);
  CHECK(same.bits[0] == b);

  CylinderFunction moved = translate_cylinder(*z2, f, a);
  CHECK(moved.labels[0].first == a);
  CHECK(moved.labels[1].first == Element{{2, 0}});
  CHECK(moved.bits[0] == b);  // abelian: conjugation fixes the bit window

  CylinderFunction back = translate_cylinder(*z2, moved, z2->inverse(a));
  CHECK(back.labels[0].first == f.labels[0].first);
  CHECK(back.labels[1].first == f.labels[1].first);
  CHECK(back.bits[0] == f.bits[0]);

  Window W1 = z2->ball(1);
  CHECK_THROWS(translate_cylinder(*z2, moved, a, &W1));

  // nonabelian: the bit window conjugates
  auto h3 = Group::heisenberg();
  Element hx{{1, 0, 0}};
  Element hy{{0, 1, 0}};
  CylinderFunction hf = make_f({}, {hy});
  CylinderFunction hmoved = translate_cylinder(*h3, hf, hx);
  CHECK(hmoved.bits[0] == h3->conjugate(hx, hy));
}

TEST_CASE("equivariance defect") {
  auto z = Group::lattice(1);
  Window W = z->ball(3);
  Element e = z->identity();
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(300, {1}), W, 8);
  Labels x = sample_labels(300, 21);
  CylinderFunction f = make_f({{e, half()}, {Element{{1}}, half()}},
                              {Element{{-1}}});

  EquivarianceResult honest = equivariance_defect(rot, x, f, Element{{1}});
  CHECK(honest.value == 0.0);
  CHECK(honest.mismatch_mass == Rational(0, 1));

  CylinderFunction unit;  // no coordinates at all
  ApproxHom noisy = perturb(rot, 0.05, 11);
  CHECK(equivariance_defect(noisy, x, unit, Element{{1}}).value == 0.0);

  for (uint64_t s = 0; s < 10; ++s) {
    ApproxHom bad = perturb(rot, 0.05, 100 + s);
    EquivarianceResult er = equivariance_defect(bad, x, f, Element{{1}});
    CHECK(er.value <= er.bound);
    // the mismatch set is exactly the union of the per-coordinate
    // disagreement sets of the permutation compositions involved
    Element g{{1}};
    uint32_t d = bad.degree();
    Permutation inv_g = bad.evaluate(g).inverse();
    long long covered = 0;
    for (uint32_t j = 0; j < d; ++j) {
      bool hit = false;
      for (const Element& k : {e, Element{{1}}}) {  // E part
        if (bad.evaluate(k).inverse()(inv_g(j)) !=
            bad.evaluate(z->multiply(g, k)).inverse()(j))
          hit = true;
      }
      Element b{{-1}};  // F part
      uint32_t jp = inv_g(j);
      if ((bad.evaluate(b)(jp) == jp) !=
          (bad.evaluate(z->conjugate(g, b))(j) == j))
        hit = true;
      if (hit) ++covered;
    }
    CHECK(er.mismatch_mass == Rational(covered, d));
  }
}

TEST_CASE("select_good_sample") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(512, {1}), W, 6);
  Element e = z->identity();
  std::vector<CylinderFunction> fs = {
      make_f({{e, half()}}),
      make_f({{e, half()}, {Element{{1}}, half()}}),
  };

  // sup-norm tolerance accepts the first sample
  GoodSampleResult loose = select_good_sample(rot, fs, 2.0, 5, 3);
  CHECK(loose.ok);
  CHECK(loose.tries == 1);

  // deterministic bit-only integrand: residual exactly zero
  std::vector<CylinderFunction> bits = {make_f({}, {Element{{1}}})};
  GoodSampleResult det = select_good_sample(rot, bits, 1e-9, 1, 3);
  CHECK(det.ok);
  CHECK(det.residual_sum == 0.0);

  // impossible tolerance exhausts max_tries
  GoodSampleResult tight = select_good_sample(rot, fs, 1e-15, 4, 3);
  CHECK(!tight.ok);
  CHECK(tight.tries == 4);
  CHECK(tight.chebyshev_per_try > 1.0);

  // Chebyshev regime: tol = 10 sqrt(sum var) succeeds within 10 tries
  double var_sum = 0.0;
  for (const auto& f : fs) var_sum += exact_variance(rot, f);
  GoodSampleResult cheb =
      select_good_sample(rot, fs, 10.0 * std::sqrt(var_sum), 10, 5);
  CHECK(cheb.ok);
  CHECK(cheb.chebyshev_per_try <= 0.011);
}

TEST_CASE("results are bit-identical across thread counts") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom rot =
      ApproxHom::from_action(z, ActionSpec::cyclic(20000, {1}), W, 6);
  ApproxHom noisy = perturb(rot, 0.03, 7);
  Element e = z->identity();
  CylinderFunction f = make_f({{e, half()}, {Element{{1}}, half()}});

  struct Snapshot {
    std::vector<double> labels;
    double push, mean, var, mc;
  };
  auto capture = [&](int threads) {
    set_thread_cap(threads);
    Snapshot s;
    Labels x = sample_labels(20000, 99);
    s.labels = x.x;
    s.push = pushforward(noisy, x, f);
    s.mean = exact_mean(noisy, f);
    s.var = exact_variance(noisy, f);
    s.mc = mc_stats(noisy, f, 32, 4).mean;
    return s;
  };
  Snapshot a = capture(1);
  Snapshot b = capture(8);
  set_thread_cap(0);
  CHECK(a.labels == b.labels);
  CHECK(a.push == b.push);
  CHECK(a.mean == b.mean);
  CHECK(a.var == b.var);
  CHECK(a.mc == b.mc);
}

TEST_CASE("main theorem check on honest and noisy actions") {
  auto z = Group::lattice(1);
  Window W = z->ball(2);
  ApproxHom rot = ApproxHom::from_action(z, ActionSpec::cyclic(400, {1}), W, 6);
  Element e = z->identity();
  CylinderFunction f = make_f({{e, half()}, {Element{{1}}, half()}});

  TheoremCheck tc = main_theorem_check(rot, f, W);
  CHECK(tc.omega_complement == Rational(0, 1));
  CHECK(tc.slack == 0.0);
  REQUIRE(tc.diff_coset.has_value());
  CHECK(*tc.diff_coset <= 1e-12);
  CHECK(tc.diff_phi <= 1e-12);

  ApproxHom noisy = perturb(rot, 0.05, 8);
  TheoremCheck nc = main_theorem_check(noisy, f, W);
  CHECK(nc.diff_phi <= nc.slack + 1e-12);

  // label-free cylinders: points moved by sigma(e) but fixed by sigma(s)
  // belong to Omega^c, so the slack still covers the difference
  ApproxHom still = ApproxHom::from_action(z, ActionSpec::trivial(200), W, 6);
  CylinderFunction bit_only = make_f({}, {Element{{1}}});
  for (uint64_t s = 0; s < 20; ++s) {
    ApproxHom jittered = perturb(still, 0.05, 60 + s);
    TheoremCheck bc = main_theorem_check(jittered, bit_only, W);
    CHECK(bc.diff_phi <= bc.slack + 1e-12);
  }
}
