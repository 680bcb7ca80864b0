#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soficlab/bernoulli.hpp"
#include "soficlab/cylinder.hpp"
#include "soficlab/irs.hpp"

namespace soficlab {

// Measurable rectangle in (bit, label) coordinates: partial bit
// constraints plus per-element unions of half-open label bins. All label
// constraints in one family share a bin count.
struct CylinderSet {
  struct BinUnion {
    int bins = 0;
    std::vector<int> members;  // sorted, unique
  };

  std::vector<std::pair<Element, bool>> bit_constraints;     // sorted
  std::vector<std::pair<Element, BinUnion>> label_constraints;  // sorted
  bool infeasible = false;
  std::string name;

  static CylinderSet full();
  static CylinderSet bit(const Element& g, bool value);
  static CylinderSet label_bins(const Element& g, int bins,
                                std::vector<int> members);

  void canonicalize();
  std::string canonical_key(const Group& gr) const;
  CylinderSet intersect(const CylinderSet& other) const;
  CylinderSet translated(const Group& gr, const Element& g) const;

  // Indicator of the set intersected with {y(b)=1 : b in extra_bits}, as
  // a signed combination of cylinder functions (inclusion-exclusion over
  // negative bit constraints).
  std::vector<std::pair<double, CylinderFunction>> indicator_expansion(
      std::span<const Element> extra_bits) const;
};

// rho/sigma data realizing a declared family of sets as point subsets;
// self-contained (loadable from disk without the originating sigma).
struct SoficApproxData {
  std::shared_ptr<const Group> group;
  uint32_t degree = 0;
  Window element_window;              // elements with stored permutations
  std::vector<Permutation> perms;     // parallel to element_window
  std::vector<std::pair<CylinderSet, std::vector<uint32_t>>> sets;
  std::map<std::string, size_t> key_index;

  const std::vector<uint32_t>* find_set(const Group& gr,
                                        const CylinderSet& b) const;
  const Permutation& perm_of(const Element& g) const;
  void index_sets();
};

// rho(B) = phi_x-preimage of each declared set; permutations copied for
// every element of element_window.
SoficApproxData export_relation_data(const ApproxHom& sigma, const Labels& x,
                                     std::span<const CylinderSet> family,
                                     const Window& element_window);

// u_d( rho(B1 and B2) symmetric-difference (rho(B1) and rho(B2)) ).
Rational intersection_defect(const SoficApproxData& data, const CylinderSet& b1,
                             const CylinderSet& b2);

// | u_d({j in rho(B) : sigma(g)(j)=j}) - mu_Theta(B and {y(g)=1}) |.
double trace_defect(const SoficApproxData& data, const CylinderSet& b,
                    const Element& g, const IRSWindowSpec& theta);

// u_d( rho(gB) symmetric-difference sigma(g).rho(B) ).
Rational relation_equivariance_defect(const SoficApproxData& data,
                                      const CylinderSet& b, const Element& g);

struct RelationTolerances {
  double homomorphism = 0.0;
  double intersection = 0.0;
  double trace = 0.05;
  double equivariance = 0.0;
};

struct FullReport {
  struct Row {
    std::string kind;
    std::string params;
    double value = 0.0;
    double tolerance = 0.0;
    bool exact = false;  // value is an exact rational
    bool pass = true;
  };
  std::vector<Row> rows;
  std::vector<std::string> closure_violations;
  std::vector<std::string> notes;
  bool pass = true;
};

// Homomorphism defect over window pairs, pairwise intersection defects
// over the family, trace and equivariance defects against the test
// elements. Required sets missing from the data are enumerated as
// closure violations and fail the report.
FullReport full_report(const SoficApproxData& data,
                       std::span<const CylinderSet> family,
                       std::span<const Element> test_elements,
                       const IRSWindowSpec& theta,
                       const RelationTolerances& tol);

}  // namespace soficlab
