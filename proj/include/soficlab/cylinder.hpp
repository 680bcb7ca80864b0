#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "soficlab/approx_hom.hpp"
#include "soficlab/group.hpp"

namespace soficlab {

// Nonnegative step function on [0,1), constant on uniform bins, so all
// one-dimensional integrals of products are exact finite sums.
class StepFunction {
 public:
  StepFunction(int bins, std::vector<double> values);
  static StepFunction constant(double value, int bins = 1);
  // 1 on the listed bins, 0 elsewhere.
  static StepFunction indicator(int bins, std::span<const int> members);
  // 1 on [0, upto/bins).
  static StepFunction lower_indicator(int bins, int upto);

  int bins() const { return bins_; }
  const std::vector<double>& values() const { return values_; }
  double operator()(double t) const;
  double integral() const;
  double sup_norm() const;
  StepFunction refined(int new_bins) const;  // new_bins multiple of bins

 private:
  int bins_;
  std::vector<double> values_;
};

// Exact integral of a pointwise product of step functions over [0,1)
// (common refinement of the bin grids).
double integral_of_product(std::span<const StepFunction* const> fs);
double integral_of_product(std::span<const StepFunction> fs);

// f = (tensor of f_g over the label window E) * E_F over the bit window.
struct CylinderFunction {
  std::vector<std::pair<Element, StepFunction>> labels;  // E part
  std::vector<Element> bits;                             // F part
  std::string name;

  double sup_bound() const;  // prod of label sup norms (1 if E empty)
  void require_distinct() const;
};

// i.i.d.-style 53-bit uniform labels, coordinate j a pure function of
// (seed, j).
struct Labels {
  uint32_t degree = 0;
  std::vector<double> x;
  uint64_t seed = 0;
  std::string provenance;
};

Labels sample_labels(uint32_t degree, uint64_t seed);

// phi_x: point j with the bits sigma(g)(j)=j and labels x(sigma(g)^{-1}(j)),
// prepared over a fixed element list.
class Microstate {
 public:
  Microstate(const ApproxHom& sigma, const Labels& labels,
             std::span<const Element> elems);

  size_t arity() const { return perms_.size(); }
  uint32_t degree() const { return degree_; }
  bool bit(size_t elem_idx, uint32_t j) const {
    return perms_[elem_idx](j) == j;
  }
  double label(size_t elem_idx, uint32_t j) const {
    return (*x_)[inverses_[elem_idx](j)];
  }
  const Permutation& perm(size_t elem_idx) const { return perms_[elem_idx]; }
  const Permutation& inverse_perm(size_t elem_idx) const {
    return inverses_[elem_idx];
  }

 private:
  std::vector<Permutation> perms_;
  std::vector<Permutation> inverses_;
  const std::vector<double>* x_;
  uint32_t degree_;
};

}  // namespace soficlab
