#include "soficlab/perm.hpp"

#include <numeric>
#include <stdexcept>

namespace soficlab {

namespace {

void require_equal_degree(const Permutation& p, const Permutation& q) {
  if (p.degree() != q.degree())
    throw std::invalid_argument("permutation degree mismatch: " +
                                std::to_string(p.degree()) + " vs " +
                                std::to_string(q.degree()));
}

}  // namespace

Permutation::Permutation(std::vector<uint32_t> img) : img_(std::move(img)) {
  std::vector<bool> hit(img_.size(), false);
  for (uint32_t v : img_) {
    if (v >= img_.size() || hit[v])
      throw std::invalid_argument("image sequence is not a bijection");
    hit[v] = true;
  }
}

Permutation Permutation::identity(uint32_t degree) {
  Permutation p;
  p.img_.resize(degree);
  std::iota(p.img_.begin(), p.img_.end(), 0u);
  return p;
}

Permutation Permutation::from_cycles(
    uint32_t degree, const std::vector<std::vector<uint32_t>>& cycles) {
  Permutation p = identity(degree);
  for (const auto& c : cycles) {
    for (size_t i = 0; i < c.size(); ++i) {
      if (c[i] >= degree) throw std::invalid_argument("cycle point out of range");
      p.img_[c[i]] = c[(i + 1) % c.size()];
    }
  }
  return Permutation(std::move(p.img_));  // re-validate
}

Permutation Permutation::inverse() const {
  Permutation r;
  r.img_.resize(img_.size());
  for (uint32_t j = 0; j < img_.size(); ++j) r.img_[img_[j]] = j;
  return r;
}

bool Permutation::is_identity() const {
  for (uint32_t j = 0; j < img_.size(); ++j)
    if (img_[j] != j) return false;
  return true;
}

Permutation compose(const Permutation& p, const Permutation& q) {
  require_equal_degree(p, q);
  Permutation r;
  std::vector<uint32_t> img(p.degree());
  for (uint32_t j = 0; j < p.degree(); ++j) img[j] = p(q(j));
  return Permutation(std::move(img));
}

Rational hamming(const Permutation& p, const Permutation& q) {
  require_equal_degree(p, q);
  if (p.degree() == 0) return Rational(0, 1);
  long long diff = 0;
  for (uint32_t j = 0; j < p.degree(); ++j)
    if (p(j) != q(j)) ++diff;
  return Rational(diff, p.degree());
}

long long joint_fixed_count(std::span<const Permutation> ps) {
  if (ps.empty()) return 0;
  for (const auto& p : ps) require_equal_degree(ps[0], p);
  long long count = 0;
  for (uint32_t j = 0; j < ps[0].degree(); ++j) {
    bool fixed = true;
    for (const auto& p : ps) {
      if (p(j) != j) {
        fixed = false;
        break;
      }
    }
    if (fixed) ++count;
  }
  return count;
}

Rational fixed_fraction_joint(std::span<const Permutation> ps) {
  if (ps.empty()) return Rational(1, 1);  // E_emptyset == 1
  if (ps[0].degree() == 0) return Rational(1, 1);
  return Rational(joint_fixed_count(ps), ps[0].degree());
}

}  // namespace soficlab
