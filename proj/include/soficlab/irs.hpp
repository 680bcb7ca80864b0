#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soficlab/approx_hom.hpp"
#include "soficlab/group.hpp"
#include "soficlab/rational.hpp"

namespace soficlab {

// A pattern is a bit string in window order: bit i records whether the
// point is fixed by sigma(W[i]). Patterns are the finite-scale proxy for
// subgroups.

// Returns a violation description if the bit pattern fails the subgroup
// consistency rules on the window: y(e)=1; y(g)=y(g^-1) when g^-1 lies in
// the window; y(g)=y(h)=1 and gh in the window imply y(gh)=1.
std::optional<std::string> pattern_inconsistency(const Window& W,
                                                 const std::string& bits);

// Sparse probability distribution on window patterns with exact masses.
// Patterns missing the identity bit are kept and their total mass
// reported, never silently repaired.
class PatternMeasure {
 public:
  PatternMeasure(Window window, std::map<std::string, Rational> masses);

  const Window& window() const { return window_; }
  const std::map<std::string, Rational>& masses() const { return masses_; }
  Rational mass_of(const std::string& bits) const;
  Rational total() const;
  Rational identity_violation_mass() const { return identity_violation_; }

  // Sum of masses of patterns with bit 1 at every listed window index
  // (the integral of E_F against the measure).
  Rational marginal_ones(std::span<const int> window_indices) const;

  // Total mass of patterns that fail subgroup consistency on the window.
  Rational inconsistent_mass() const;

  void write_csv(std::ostream& os) const;

 private:
  Window window_;
  std::map<std::string, Rational> masses_;
  Rational identity_violation_{0, 1};
};

// Theta_n restricted to W: mass of pattern y is
// u_d({j : forall g in W, (sigma(g)(j)=j) == y(g)}).
PatternMeasure empirical_irs(const ApproxHom& sigma, const Window& W);

// u_d of the joint fixed-point set of {sigma(g) : g in F}; equals the
// marginal sum of empirical_irs over patterns with ones on F.
Rational fixed_fraction(const ApproxHom& sigma, std::span<const Element> F);

// (1/2) sum |mu1 - mu2| over patterns; windows must match.
Rational tv_distance(const PatternMeasure& m1, const PatternMeasure& m2);

// Window-restricted IRS: all patterns subgroup-consistent, weights
// summing to one. Construction fails loudly on violations.
struct IRSWindowSpec {
  enum class Provenance { EmpiricalFromSigma, ExactSubgroupList, UserSupplied };

  Window window;
  std::vector<std::pair<std::string, Rational>> patterns;
  Provenance provenance = Provenance::UserSupplied;

  IRSWindowSpec(Window w, std::vector<std::pair<std::string, Rational>> pats,
                Provenance prov);

  static IRSWindowSpec from_measure(const PatternMeasure& m, Provenance prov);
};

struct StatsMatchReport {
  struct Row {
    std::vector<Element> F;
    Rational theta_sigma;
    Rational theta_psi;
    Rational diff;
    bool pass = true;
  };
  std::vector<Row> rows;
  Rational max_diff{0, 1};
  bool all_pass = true;
};

StatsMatchReport stats_match(const ApproxHom& sigma, const ApproxHom& psi,
                             std::span<const std::vector<Element>> family,
                             double tol);

struct ConjInvarianceReport {
  Rational defect{0, 1};
  Rational coverage{0, 1};  // |W_g| / |W|
  size_t subwindow_size = 0;
};

// TV distance between the W_g-marginal of mu and its pushforward through
// h -> g^-1 h g, where W_g = {h in W : g^-1 h g in W}.
ConjInvarianceReport conjugation_invariance_defect(const PatternMeasure& mu,
                                                   const Element& g);

}  // namespace soficlab
