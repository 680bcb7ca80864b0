#include <doctest.h>

#include "soficlab/align.hpp"
#include "soficlab/rng.hpp"

using namespace soficlab;

namespace {

ApproxHom hom_from_images(std::shared_ptr<const Group> z,
                          const Permutation& image_of_one) {
  Window W =
      Window::from_elements(z, {Element{{0}}, Element{{1}}, Element{{-1}}});
  return ApproxHom(z, W,
                   {Permutation::identity(image_of_one.degree()), image_of_one,
                    image_of_one.inverse()},
                   4);
}

Permutation random_perm(uint32_t d, uint64_t seed) {
  std::vector<uint32_t> img(d);
  for (uint32_t j = 0; j < d; ++j) img[j] = j;
  CounterRng rng(seed);
  rng.shuffle(img.data(), img.size());
  return Permutation(std::move(img));
}

ApproxHom conjugated_copy(const ApproxHom& sigma, const Permutation& pi) {
  std::vector<Permutation> images;
  Permutation pinv = pi.inverse();
  for (size_t i = 0; i < sigma.window().size(); ++i)
    images.push_back(compose(compose(pi, sigma.stored_image(i)), pinv));
  return ApproxHom(sigma.group(), sigma.window(), std::move(images),
                   sigma.eval_length_cap());
}

}  // namespace

TEST_CASE("alignment objective") {
  auto z = Group::lattice(1);
  std::vector<Element> E = {Element{{1}}};

  ApproxHom sigma = hom_from_images(z, random_perm(12, 1));
  CHECK(alignment_objective(sigma, sigma, Permutation::identity(12), E) ==
        Rational(0, 1));

  Permutation chi0 = random_perm(12, 2);
  ApproxHom psi = conjugated_copy(sigma, chi0);
  CHECK(alignment_objective(sigma, psi, chi0, E) == Rational(0, 1));

  // cycle types differ: the objective is 1 for every conjugator
  ApproxHom id2 = hom_from_images(z, Permutation::identity(2));
  ApproxHom swap2 =
      hom_from_images(z, Permutation::from_cycles(2, {{0, 1}}));
  for (uint64_t s = 0; s < 4; ++s)
    CHECK(alignment_objective(id2, swap2, random_perm(2, s), E) ==
          Rational(1, 1));

  // symmetry under swapping sides
  for (uint64_t s = 0; s < 10; ++s) {
    ApproxHom a = hom_from_images(z, random_perm(9, 100 + s));
    ApproxHom b = hom_from_images(z, random_perm(9, 200 + s));
    Permutation chi = random_perm(9, 300 + s);
    CHECK(alignment_objective(a, b, chi, E) ==
          alignment_objective(b, a, chi.inverse(), E));
  }

  // invariance under simultaneous relabeling
  for (uint64_t s = 0; s < 10; ++s) {
    ApproxHom a = hom_from_images(z, random_perm(9, 400 + s));
    ApproxHom b = hom_from_images(z, random_perm(9, 500 + s));
    Permutation chi = random_perm(9, 600 + s);
    Permutation pi = random_perm(9, 700 + s);
    CHECK(alignment_objective(a, b, chi, E) ==
          alignment_objective(conjugated_copy(a, pi), b,
                              compose(chi, pi.inverse()), E));
  }
}

TEST_CASE("brute force alignment") {
  auto z = Group::lattice(1);
  std::vector<Element> E = {Element{{1}}};

  // all 3-cycles are conjugate
  ApproxHom c1 = hom_from_images(z, Permutation::from_cycles(3, {{0, 1, 2}}));
  ApproxHom c2 = hom_from_images(z, Permutation::from_cycles(3, {{0, 2, 1}}));
  CHECK(brute_force_align(c1, c2, E).objective == Rational(0, 1));

  // 4-cycle vs identity: conjugation preserves cycle type, so >= 1
  ApproxHom c4 =
      hom_from_images(z, Permutation::from_cycles(4, {{0, 1, 2, 3}}));
  ApproxHom id4 = hom_from_images(z, Permutation::identity(4));
  CHECK(brute_force_align(c4, id4, E).objective == Rational(1, 1));

  // identical inputs: identity is the lexicographically first optimum
  AlignmentResult same = brute_force_align(c4, c4, E);
  CHECK(same.objective == Rational(0, 1));
  CHECK(same.chi == Permutation::identity(4));

  ApproxHom big = hom_from_images(z, random_perm(9, 1));
  CHECK_THROWS(brute_force_align(big, big, E));
}

TEST_CASE("align finds cyclic alignments") {
  auto z = Group::lattice(1);
  Window W = z->ball(1);
  for (uint32_t d : {100u, 1000u}) {
    ApproxHom sigma =
        ApproxHom::from_action(z, ActionSpec::cyclic(d, {1}), W, 4);
    ApproxHom psi = ApproxHom::from_action(
        z, ActionSpec::cyclic(d, {d == 100 ? 7 : 9}), W, 4);
    AlignmentProblem p;
    p.sigma = &sigma;
    p.psi = &psi;
    p.window = W.elements();
    p.seed = d;
    AlignmentResult res = align(p);
    CHECK(res.objective == Rational(0, 1));
    CHECK(alignment_objective(sigma, psi, res.chi, p.window) ==
          res.objective);
  }
}

TEST_CASE("align never undercuts brute force and usually matches") {
  auto f2 = Group::free_group(2);
  Window W = f2->ball(1);
  std::vector<Element> E = {Element{{1}}, Element{{2}}};
  int matched = 0;
  for (uint64_t t = 0; t < 25; ++t) {
    ApproxHom sigma = ApproxHom::from_action(
        f2, ActionSpec::seeded_images(6, derive_stream(91, 2 * t)), W, 3);
    ApproxHom psi = ApproxHom::from_action(
        f2, ActionSpec::seeded_images(6, derive_stream(91, 2 * t + 1)), W, 3);
    AlignmentResult exact = brute_force_align(sigma, psi, E);
    AlignmentProblem p;
    p.sigma = &sigma;
    p.psi = &psi;
    p.window = E;
    p.seed = t;
    AlignmentResult heur = align(p);
    CHECK(heur.objective >= exact.objective);
    if (heur.objective == exact.objective) ++matched;
  }
  CHECK(matched >= 22);
}

TEST_CASE("align beats the identity coupling on perturbed pairs") {
  auto z = Group::lattice(1);
  Window W = z->ball(1);
  ApproxHom sigma =
      ApproxHom::from_action(z, ActionSpec::cyclic(400, {1}), W, 4);
  double rho = 0.05;
  ApproxHom psi = perturb(sigma, rho, 3);
  AlignmentProblem p;
  p.sigma = &sigma;
  p.psi = &psi;
  p.window = W.elements();
  AlignmentResult res = align(p);
  double bound = 2.0 * (double)p.window.size() * rho +
                 2.0 * (double)p.window.size() / 400.0;
  CHECK(res.objective.leq(bound));
}

TEST_CASE("refinement is conjugation-sound") {
  auto f2 = Group::free_group(2);
  Window W = f2->ball(1);
  std::vector<Element> E = {Element{{1}}, Element{{2}}};
  ApproxHom sigma =
      ApproxHom::from_action(f2, ActionSpec::seeded_images(64, 17), W, 3);
  // conjugate copy: identical class-size multisets after refinement
  Permutation chi0 = random_perm(64, 5);
  std::vector<Permutation> images;
  for (size_t i = 0; i < W.size(); ++i)
    images.push_back(
        compose(compose(chi0, sigma.stored_image(i)), chi0.inverse()));
  ApproxHom psi(f2, W, std::move(images), 3);
  auto [sa, sb] = refinement_class_sizes(sigma, psi, E, 6);
  CHECK(sa == sb);

  AlignmentProblem p;
  p.sigma = &sigma;
  p.psi = &psi;
  p.window = E;
  AlignmentResult res = align(p);
  CHECK(res.trace.class_size_multisets_equal);
  CHECK(res.objective == Rational(0, 1));
}
