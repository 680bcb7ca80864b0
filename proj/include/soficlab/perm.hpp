#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soficlab/rational.hpp"

namespace soficlab {

// Bijection of {0,...,d-1}, stored as its image sequence.
class Permutation {
 public:
  Permutation() = default;
  explicit Permutation(std::vector<uint32_t> img);  // validates bijectivity
  static Permutation identity(uint32_t degree);
  // Test convenience: product of cycles, remaining points fixed.
  static Permutation from_cycles(uint32_t degree,
                                 const std::vector<std::vector<uint32_t>>& cycles);

  uint32_t degree() const { return (uint32_t)img_.size(); }
  uint32_t operator()(uint32_t j) const { return img_[j]; }
  const std::vector<uint32_t>& images() const { return img_; }

  Permutation inverse() const;
  bool is_identity() const;

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<uint32_t> img_;
};

// (p o q)(j) = p(q(j)).
Permutation compose(const Permutation& p, const Permutation& q);

// Normalized Hamming distance |{j : p(j) != q(j)}| / d, exact.
Rational hamming(const Permutation& p, const Permutation& q);

// |intersection of Fix(p) over the list| (degree taken from the list).
long long joint_fixed_count(std::span<const Permutation> ps);

// u_d of the joint fixed-point set; the empty list gives 1.
Rational fixed_fraction_joint(std::span<const Permutation> ps);

}  // namespace soficlab
