#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace soficlab {

// Catalog of groups with an exact, total multiplication oracle on
// canonical normal forms:
//   lattice        Z^k          payload: k coordinates
//   finite_abelian prod Z/m_i   payload: residues in [0, m_i)
//   heisenberg     H_3(Z)       payload: (a,b,c), product
//                               (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')
//                               (upper-triangular integer matrix model)
//   free           F_k          payload: freely reduced word, letter +i / -i
//                               for generator i (1-based) and its inverse

enum class GroupKind { Lattice, FiniteAbelian, Heisenberg, Free };

struct GroupSpec {
  GroupKind kind = GroupKind::Lattice;
  int rank = 1;                    // k for Z^k, rank for free groups
  std::vector<long long> moduli;   // finite abelian factors

  std::string describe() const;
  bool operator==(const GroupSpec&) const = default;
};

struct Element {
  std::vector<long long> v;

  bool operator==(const Element&) const = default;
  bool operator<(const Element& o) const { return v < o.v; }
};

struct ElementHash {
  size_t operator()(const Element& e) const {
    uint64_t h = 1469598103934665603ULL;
    for (long long x : e.v) {
      h ^= (uint64_t)x;
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return (size_t)h;
  }
};

class Window;

class Group : public std::enable_shared_from_this<Group> {
 public:
  static constexpr size_t kDefaultWindowCap = 5'000'000;

  static std::shared_ptr<const Group> lattice(int k);
  static std::shared_ptr<const Group> finite_abelian(std::vector<long long> moduli);
  static std::shared_ptr<const Group> heisenberg();
  static std::shared_ptr<const Group> free_group(int rank);
  static std::shared_ptr<const Group> from_spec(const GroupSpec& spec);

  const GroupSpec& spec() const { return spec_; }
  bool same_as(const Group& o) const { return spec_ == o.spec_; }
  bool is_abelian() const;
  // Catalog metadata (not certified): free groups of rank >= 2 are the
  // only non-amenable entries.
  bool is_amenable() const;

  Element identity() const;
  bool is_identity(const Element& a) const;
  void validate(const Element& a) const;  // throws on malformed payload

  Element multiply(const Element& a, const Element& b) const;
  Element inverse(const Element& a) const;
  // g h g^{-1}
  Element conjugate(const Element& g, const Element& h) const;

  std::span<const Element> generators() const { return gens_; }
  // Index of s^{-1} in the generator list.
  int generator_inverse_index(int i) const { return gen_inv_[i]; }

  std::string to_string(const Element& a) const;

  // Ball of the given word-length radius. Order: identity first, then by
  // word length, then lexicographically by canonical geodesic word
  // (= BFS discovery order with generators in catalog order).
  Window ball(int radius, size_t size_cap = kDefaultWindowCap) const;

  // Canonical geodesic word (generator indices, leftmost factor first).
  // Throws if the element is not reachable within max_length.
  std::vector<int> geodesic_word(const Element& g, int max_length) const;

 private:
  explicit Group(GroupSpec spec);

  GroupSpec spec_;
  std::vector<Element> gens_;
  std::vector<int> gen_inv_;
};

// Finite identity-containing element window with index lookup and, for
// balls, the BFS tree that yields canonical geodesic words.
class Window {
 public:
  Window() = default;

  static Window ball_of(std::shared_ptr<const Group> g, int radius,
                        size_t size_cap);
  // Explicit windows must contain the identity and be duplicate-free.
  static Window from_elements(std::shared_ptr<const Group> g,
                              std::vector<Element> elems);

  const std::shared_ptr<const Group>& group() const { return group_; }
  size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const Element& operator[](size_t i) const { return elems_[i]; }
  const std::vector<Element>& elements() const { return elems_; }

  int index_of(const Element& e) const;
  bool contains(const Element& e) const { return index_of(e) >= 0; }
  int identity_index() const { return id_idx_; }
  int radius() const { return radius_; }

  bool has_words() const { return !parent_.empty(); }
  std::vector<int> word_of(int index) const;

  bool same_window(const Window& o) const;

 private:
  std::shared_ptr<const Group> group_;
  std::vector<Element> elems_;
  std::unordered_map<Element, int, ElementHash> index_;
  std::vector<int> parent_;
  std::vector<int> genidx_;
  int radius_ = -1;
  int id_idx_ = 0;
};

struct ClosureReport {
  bool pass = true;
  std::string requirement;
  std::vector<Element> missing;
};

// W contains every product of at most L generators.
ClosureReport check_products_up_to_length(const Window& W, int L);
// E * E^{-1} subset of W.
ClosureReport check_pair_products(const Window& W, std::span<const Element> E);
// g * W subset of target.
ClosureReport check_translate(const Window& target, const Element& g,
                              const Window& W);
// g F g^{-1} subset of W.
ClosureReport check_conjugates(const Window& W, const Element& g,
                               std::span<const Element> F);

}  // namespace soficlab
