#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soficlab/group.hpp"
#include "soficlab/perm.hpp"
#include "soficlab/rational.hpp"

namespace soficlab {

// Built-in exact actions used to seed approximate homomorphisms.
//   cyclic            Z^k on Z/modulus, generator i adds offsets[i]
//   torus             Z^k on (Z/n)^k, componentwise translation
//   regular           finite abelian group translating itself
//   lattice_coset     Z^k on Z^k / (basis * Z^k), via Hermite normal form
//   heis_mod          H3(Z) on H3(Z/n), left translation, degree n^3
//   generator_images  free group (or Z) with prescribed or seeded
//                     random generator images of the given degree
//   trivial           every element acts as the identity
struct ActionSpec {
  enum class Kind {
    Cyclic,
    Torus,
    Regular,
    LatticeCoset,
    HeisMod,
    GeneratorImages,
    Trivial
  };
  Kind kind = Kind::Cyclic;
  long long modulus = 0;                          // cyclic
  std::vector<long long> offsets;                 // cyclic
  long long n = 0;                                // torus / heis_mod
  std::vector<std::vector<long long>> basis;      // lattice_coset columns
  long long degree = 0;                           // generator_images / trivial
  std::vector<std::vector<uint32_t>> images;      // generator_images, explicit
  std::optional<uint64_t> seed;                   // generator_images, random

  static ActionSpec cyclic(long long modulus, std::vector<long long> offsets);
  static ActionSpec torus(long long n);
  static ActionSpec regular();
  static ActionSpec lattice_coset(std::vector<std::vector<long long>> basis);
  static ActionSpec heis_mod(long long n);
  static ActionSpec seeded_images(long long degree, uint64_t seed);
  static ActionSpec explicit_images(std::vector<std::vector<uint32_t>> images);
  static ActionSpec trivial(long long degree);
};

// Degree the action acts on; validates parameters against the group.
uint32_t action_degree(const Group& group, const ActionSpec& action);

// Exact image of a single element under the action (the construction
// oracle; independent of ApproxHom's word evaluation rule).
Permutation action_image(const Group& group, const ActionSpec& action,
                         const Element& g);

struct DefectReport {
  struct Entry {
    Element g, h;
    Rational value;
  };
  std::vector<Entry> entries;
  Rational max{0, 1};
  Rational mean{0, 1};
  Rational identity_defect{0, 1};  // d_Hamm(sigma(e), id)
};

struct SubgroupConsistencyReport {
  struct PairMass {
    Element g, h;
    Rational mass;  // u_d{j fixed by sigma(g),sigma(h) but not sigma(gh)}
  };
  struct InverseMass {
    Element g;
    Rational mass;  // u_d{j fixed by exactly one of sigma(g),sigma(g^-1)}
  };
  std::vector<PairMass> product_violations;
  std::vector<InverseMass> inverse_violations;
  Rational identity_mass{0, 1};  // u_d{j : sigma(e)(j) != j}
};

// Map from a window of group elements into Sym(d). Elements outside the
// window evaluate by composing generator images along the canonical
// geodesic word, left to right. Immutable after construction.
class ApproxHom {
 public:
  static constexpr uint32_t kDefaultDegreeCap = 10'000'000;

  ApproxHom(std::shared_ptr<const Group> group, Window window,
            std::vector<Permutation> images, int eval_length_cap = 16);

  static ApproxHom from_action(std::shared_ptr<const Group> group,
                               const ActionSpec& action, const Window& window,
                               int eval_length_cap = 16);

  const std::shared_ptr<const Group>& group() const { return group_; }
  const Window& window() const { return window_; }
  uint32_t degree() const { return degree_; }
  int eval_length_cap() const { return eval_cap_; }
  const Permutation& stored_image(size_t window_index) const {
    return images_[window_index];
  }

  // Stored image if g is in the window, else geodesic-word composition.
  Permutation evaluate(const Element& g) const;
  std::vector<Permutation> evaluate_all(std::span<const Element> elems) const;

 private:
  std::shared_ptr<const Group> group_;
  Window window_;
  std::vector<Permutation> images_;
  uint32_t degree_ = 0;
  int eval_cap_ = 16;
  std::vector<int> generator_window_index_;
};

DefectReport defect(const ApproxHom& sigma,
                    std::span<const std::pair<Element, Element>> pairs);

// All pairs (g,h) from the window with gh in the window, plus the I_g and
// identity masses from the IRS lemma's finite-scale inequalities.
SubgroupConsistencyReport subgroup_consistency_defects(const ApproxHom& sigma,
                                                       const Window& W);

// Post-composes every stored image with an independent random
// derangement of a uniformly random subset of ceil(rate*d) points
// (identity when the subset has fewer than 2 points), so
// d_Hamm(sigma(g), sigma'(g)) <= rate + 1/d. Deterministic given seed.
ApproxHom perturb(const ApproxHom& sigma, double rate, uint64_t seed);

// Degree q*d, point (j,r) stored as j + r*d; preserves every joint
// fixed fraction exactly.
ApproxHom block_sum(const ApproxHom& sigma, uint32_t q,
                    uint32_t degree_cap = ApproxHom::kDefaultDegreeCap);

// Degree d+r with r new points fixed by every image.
ApproxHom pad_trivial(const ApproxHom& sigma, uint32_t r);

// block_sum with q = target/d, then pad_trivial with target mod d.
ApproxHom redimension(const ApproxHom& sigma, uint32_t target_degree,
                      uint32_t degree_cap = ApproxHom::kDefaultDegreeCap);

}  // namespace soficlab
