#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soficlab/approx_hom.hpp"
#include "soficlab/cylinder.hpp"
#include "soficlab/irs.hpp"
#include "soficlab/rational.hpp"

namespace soficlab {

// Closed-form integral of f against the Theta-Bernoulli measure:
// for each pattern y, partition the label window E by g ~ k iff
// y(g k^-1) = 1 (right cosets of the pattern's subgroup) and take the
// product over classes of the integral of the class's product of f_g.
// Requires E*E^-1 and F inside Theta's window.
double mu_theta(const CylinderFunction& f, const IRSWindowSpec& theta);

// Label-part factor of mu_theta for a single pattern (the coset
// product). Throws if the pattern's relation on E is not an equivalence.
double coset_product_factor(const std::string& pattern_bits, const Window& W,
                            const CylinderFunction& f);

// The proof's Phi_f with fractional powers (the over-counting identity's
// other route): E_F(y) * prod_g (int prod_{k: y(gk^-1)=1} f_k)^(1/#...).
// Defined for any pattern with y(e)=1, consistent or not.
double phi_f(const std::string& pattern_bits, const Window& W,
             const CylinderFunction& f);

// (phi_x)_*(u_d)(f) = (1/d) sum_j [prod_{b in F} 1{sigma(b)(j)=j}]
//                              * prod_{g in E} f_g(x(sigma(g)^-1(j))).
double pushforward(const ApproxHom& sigma, const Labels& x,
                   const CylinderFunction& f);

// J_{n,f}: deterministic exact value of the label-average of pushforward,
// via the per-point factorization over distinct preimages.
double exact_mean(const ApproxHom& sigma, const CylinderFunction& f);

// Exact label-variance of pushforward: only point pairs with overlapping
// preimage sets contribute; each contributes the joint expectation minus
// the product of per-point factors.
double exact_variance(const ApproxHom& sigma, const CylinderFunction& f);

struct McStats {
  double mean = 0.0;
  double sample_variance = 0.0;   // unbiased
  double confidence_radius = 0.0; // 3 sqrt(sample_variance / samples)
  int samples = 0;
};

McStats mc_stats(const ApproxHom& sigma, const CylinderFunction& f,
                 int samples, uint64_t seed);

// alpha_g(f) as a cylinder function: label window gE with f'_{gh} = f_h,
// bit window g F g^-1. If require_within is given, every translated
// element must lie in that window.
CylinderFunction translate_cylinder(const Group& group,
                                    const CylinderFunction& f, const Element& g,
                                    const Window* require_within = nullptr);

struct EquivarianceResult {
  double value = 0.0;       // l2(u_d) norm of f.phi_x.sigma(g)^-1 - alpha_g(f).phi_x
  double bound = 0.0;       // 2 sup|f| sqrt(u_d(M))
  Rational mismatch_mass{0, 1};  // u_d(M), exact
};

EquivarianceResult equivariance_defect(const ApproxHom& sigma, const Labels& x,
                                       const CylinderFunction& f,
                                       const Element& g);

struct GoodSampleResult {
  bool ok = false;
  Labels labels;
  int tries = 0;
  std::vector<double> residuals;  // per f, at the returned sample
  double residual_sum = 0.0;
  double chebyshev_per_try = 0.0;  // sum_f variance / tol^2
};

// First seeded sample whose summed residual against the exact means is
// below tol; ok=false when max_tries is exhausted (tol too small for d).
GoodSampleResult select_good_sample(const ApproxHom& sigma,
                                    std::span<const CylinderFunction> fs,
                                    double tol, int max_tries, uint64_t seed);

// Finite-scale consistency of the main theorem against the empirical IRS:
// |exact_mean - integral of Phi_f| is bounded by the mass of points whose
// permutation compositions disagree, times sup-norm constants.
struct TheoremCheck {
  double exact_mean_value = 0.0;
  double phi_integral = 0.0;  // sum over patterns with y(e)=1 of mass*Phi_f
  std::optional<double> coset_integral;  // mu_theta when all patterns consistent
  double diff_phi = 0.0;
  std::optional<double> diff_coset;
  double slack = 0.0;
  Rational omega_complement{0, 1};
};

TheoremCheck main_theorem_check(const ApproxHom& sigma,
                                const CylinderFunction& f, const Window& W);

}  // namespace soficlab
