#include "soficlab/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "soficlab/align.hpp"
#include "soficlab/bernoulli.hpp"
#include "soficlab/config.hpp"
#include "soficlab/irs.hpp"
#include "soficlab/relation.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "FAILED: " << what << "; ";
    }
  }
  void note(const std::string& s) { detail << s << "; "; }
};

std::vector<std::pair<Element, Element>> all_pairs(const Window& W) {
  std::vector<std::pair<Element, Element>> pairs;
  for (const Element& g : W.elements())
    for (const Element& h : W.elements()) pairs.emplace_back(g, h);
  return pairs;
}

// ---- criterion 1: honest actions are exactly multiplicative ----
void criterion_exact_honest(Check& c) {
  struct Case {
    std::shared_ptr<const Group> gr;
    ActionSpec action;
    const char* label;
  };
  std::vector<Case> cases;
  cases.push_back({Group::lattice(1), ActionSpec::cyclic(1000, {1}), "Z_rot"});
  cases.push_back({Group::lattice(2), ActionSpec::torus(32), "Z2_torus"});

  for (const auto& cs : cases) {
    Window W = cs.gr->ball(3);
    ApproxHom sigma = ApproxHom::from_action(cs.gr, cs.action, W, 8);
    DefectReport rep = defect(sigma, all_pairs(W));
    c.require(rep.max.is_zero() && rep.identity_defect.is_zero(),
              std::string(cs.label) + " pair defects nonzero");

    SubgroupConsistencyReport sub = subgroup_consistency_defects(sigma, W);
    bool masses_zero = sub.identity_mass.is_zero();
    for (const auto& v : sub.product_violations)
      masses_zero = masses_zero && v.mass.is_zero();
    for (const auto& v : sub.inverse_violations)
      masses_zero = masses_zero && v.mass.is_zero();
    c.require(masses_zero, std::string(cs.label) + " subgroup masses nonzero");

    Labels x = sample_labels(sigma.degree(), 11);
    std::vector<CylinderFunction> fs = standard_cylinder_family(*cs.gr);
    Window W1 = cs.gr->ball(1);
    bool equiv_zero = true;
    for (const auto& f : fs) {
      for (const Element& g : W1.elements()) {
        EquivarianceResult er = equivariance_defect(sigma, x, f, g);
        equiv_zero = equiv_zero && er.value == 0.0 &&
                     er.mismatch_mass.is_zero();
      }
    }
    c.require(equiv_zero, std::string(cs.label) + " equivariance defect nonzero");
  }
}

// ---- criterion 2: permanence identities are exact ----
void criterion_permanence(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(3);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::seeded_images(240, 77), W, 8);
  uint32_t d = sigma.degree();
  CounterRng rng = CounterRng::stream(0xC2, 0);
  int failures = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Element> F;
    size_t fsize = (size_t)rng.below(4);
    for (size_t i = 0; i < fsize; ++i)
      F.push_back(W[(size_t)rng.below(W.size())]);
    std::sort(F.begin(), F.end());
    F.erase(std::unique(F.begin(), F.end()), F.end());
    uint32_t q = 1 + (uint32_t)rng.below(6);
    uint32_t r = (uint32_t)rng.below(2 * d + 1);
    uint32_t target = d + (uint32_t)rng.below(4 * d);

    long long count =
        F.empty() ? (long long)d : joint_fixed_count(sigma.evaluate_all(F));
    Rational theta = fixed_fraction(sigma, F);

    if (fixed_fraction(block_sum(sigma, q), F) != theta) ++failures;
    if (fixed_fraction(pad_trivial(sigma, r), F) !=
        Rational(count + r, (long long)d + r))
      ++failures;
    uint32_t qq = target / d, rr = target % d;
    if (fixed_fraction(redimension(sigma, target), F) !=
        Rational((long long)qq * count + rr, target))
      ++failures;
  }
  c.require(failures == 0,
            std::to_string(failures) + " permanence identity failures");
  c.note("50 random (F,q,r) cases");
}

// ---- criterion 3: violation-mass inequalities ----
void criterion_violation_masses(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  ApproxHom honest =
      ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W, 6);
  Permutation id = Permutation::identity(honest.degree());
  int failures = 0;
  for (int t = 0; t < 100; ++t) {
    double rate = (t % 2 == 0) ? 0.01 : 0.1;
    ApproxHom sigma = perturb(honest, rate, 1000 + (uint64_t)t);
    SubgroupConsistencyReport rep = subgroup_consistency_defects(sigma, W);
    for (const auto& v : rep.product_violations) {
      Element prod = gr->multiply(v.g, v.h);
      Rational pd = hamming(sigma.evaluate(prod),
                            compose(sigma.evaluate(v.g), sigma.evaluate(v.h)));
      if (!(v.mass <= pd)) ++failures;
    }
    Permutation sig_e = sigma.evaluate(gr->identity());
    for (const auto& v : rep.inverse_violations) {
      Element ginv = gr->inverse(v.g);
      Rational bound =
          hamming(compose(sigma.evaluate(ginv), sigma.evaluate(v.g)), sig_e) +
          hamming(sig_e, id);
      if (!(v.mass <= bound)) ++failures;
    }
  }
  c.require(failures == 0,
            std::to_string(failures) + " violation-mass inequality failures");
  c.note("100 perturbed instances at rates {0.01,0.1}, d=10^4");
}

// ---- criterion 4: Phi_f vs coset product on consistent patterns ----
void criterion_oracle_equivalence(Check& c) {
  std::vector<std::shared_ptr<const Group>> groups = {
      Group::lattice(1), Group::lattice(2), Group::heisenberg()};
  long long patterns_checked = 0;
  double worst = 0.0;
  for (const auto& gr : groups) {
    Window W = gr->ball(2);
    std::vector<Element> E = gr->ball(1).elements();
    if (W.size() > 20) continue;  // guarded by catalog sizes below
    for (uint64_t mask = 0; mask < (1ull << W.size()); ++mask) {
      std::string bits(W.size(), '0');
      for (size_t i = 0; i < W.size(); ++i)
        if (mask & (1ull << i)) bits[i] = '1';
      if (pattern_inconsistency(W, bits)) continue;
      ++patterns_checked;
      for (int t = 0; t < 20; ++t) {
        CounterRng rng = CounterRng::stream(0xC4, mask * 100 + (uint64_t)t);
        CylinderFunction f;
        for (const Element& g : E) {
          int bins = 1 << rng.below(3);
          std::vector<double> vals((size_t)bins);
          for (auto& v : vals) v = 2.0 * rng.next_unit();
          f.labels.emplace_back(g, StepFunction(bins, std::move(vals)));
        }
        for (size_t i = 0; i < W.size(); ++i)
          if (rng.below(4) == 0) f.bits.push_back(W[i]);
        double gate = 1.0;
        for (const Element& b : f.bits) {
          int bi = W.index_of(b);
          if (bits[(size_t)bi] == '0') gate = 0.0;
        }
        double coset = gate * coset_product_factor(bits, W, f);
        double phi = phi_f(bits, W, f);
        double err = std::fabs(phi - coset) / std::max(1.0, std::fabs(coset));
        worst = std::max(worst, err);
      }
    }
  }
  c.require(worst <= 1e-12, "oracle disagreement " + std::to_string(worst));
  c.note(std::to_string(patterns_checked) + " consistent patterns x 20 families, worst rel err " +
         std::to_string(worst));
}

// ---- criterion 5: main-theorem finite-scale consistency ----
void criterion_theorem_consistency(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W, 6);
  std::vector<CylinderFunction> fs = standard_cylinder_family(*gr);
  double worst_honest = 0.0;
  for (const auto& f : fs) {
    TheoremCheck tc = main_theorem_check(sigma, f, W);
    c.require(tc.omega_complement.is_zero(), "honest action has nonempty Omega^c");
    c.require(tc.diff_coset.has_value(), "honest empirical IRS not consistent");
    if (tc.diff_coset) worst_honest = std::max(worst_honest, *tc.diff_coset);
  }
  c.require(worst_honest <= 1e-12,
            "honest |exact_mean - mu_theta| = " + std::to_string(worst_honest));

  ApproxHom noisy = perturb(sigma, 0.01, 5);
  for (const auto& f : fs) {
    TheoremCheck tc = main_theorem_check(noisy, f, W);
    c.require(tc.diff_phi <= tc.slack + 1e-12,
              "perturbed diff " + std::to_string(tc.diff_phi) +
                  " above slack " + std::to_string(tc.slack) + " for " + f.name);
  }
  c.note("honest worst diff " + std::to_string(worst_honest));
}

// ---- criterion 6: Monte Carlo calibration ----
void criterion_mc_calibration(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::cyclic(1000, {1}), W, 6);
  std::vector<CylinderFunction> fs = standard_cylinder_family(*gr);
  const CylinderFunction& f = fs[1];  // two label coordinates

  double exact = exact_mean(sigma, f);
  double var = exact_variance(sigma, f);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    McStats st = mc_stats(sigma, f, 1024, derive_stream(0xC6, (uint64_t)trial));
    if (std::fabs(st.mean - exact) <= 3.0 * std::sqrt(var / 1024.0)) ++within;
  }
  c.require(within >= 99, "only " + std::to_string(within) +
                              "/100 trials within the CLT radius");

  // Variance bound on random instances over two action types.
  std::vector<ApproxHom> sigmas;
  sigmas.push_back(sigma);
  sigmas.push_back(
      ApproxHom::from_action(gr, ActionSpec::seeded_images(500, 99), W, 6));
  int bound_failures = 0;
  for (int t = 0; t < 100; ++t) {
    CounterRng rng = CounterRng::stream(0xC6B, (uint64_t)t);
    const ApproxHom& s = sigmas[t % 2];
    CylinderFunction rf;
    std::vector<Element> E = gr->ball(1).elements();
    for (const Element& g : E) {
      if (rng.below(3) == 0) continue;
      int bins = 1 << rng.below(3);
      std::vector<double> vals((size_t)bins);
      for (auto& v : vals) v = 2.0 * rng.next_unit();
      rf.labels.emplace_back(g, StepFunction(bins, std::move(vals)));
    }
    if (rf.labels.empty())
      rf.labels.emplace_back(gr->identity(), StepFunction::constant(1.0));
    double v = exact_variance(s, rf);
    double sup2 = 1.0;
    for (const auto& [g, fn] : rf.labels)
      sup2 *= fn.sup_norm() * fn.sup_norm();
    double bound = 2.0 / (double)s.degree() *
                   (double)(rf.labels.size() * rf.labels.size()) * sup2;
    if (!(v <= bound)) ++bound_failures;
  }
  c.require(bound_failures == 0,
            std::to_string(bound_failures) + " variance bound failures");

  double var4 = exact_variance(block_sum(sigma, 4), f);
  c.require(var4 == 0.25 * var,
            "block_sum variance not exactly 1/4: " + std::to_string(var4) +
                " vs " + std::to_string(var));
  c.note(std::to_string(within) + "/100 within radius");
}

// ---- criterion 7: variance decay across degrees ----
void criterion_variance_decay(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  std::vector<CylinderFunction> fs = standard_cylinder_family(*gr);
  std::vector<long long> degrees = {1000, 4000, 16000};
  std::vector<std::vector<double>> vars;
  for (long long d : degrees) {
    ApproxHom sigma =
        ApproxHom::from_action(gr, ActionSpec::cyclic(d, {1}), W, 6);
    std::vector<double> row;
    for (const auto& f : fs) row.push_back(exact_variance(sigma, f));
    vars.push_back(std::move(row));
  }
  for (size_t fi = 0; fi < fs.size(); ++fi) {
    for (size_t step = 0; step + 1 < degrees.size(); ++step) {
      double hi = vars[step][fi], lo = vars[step + 1][fi];
      if (hi == 0.0 && lo == 0.0) continue;  // label-free cylinders
      double ratio = hi / lo;
      c.require(ratio >= 3.8 && ratio <= 4.2,
                "variance ratio " + std::to_string(ratio) + " for " +
                    fs[fi].name);
    }
  }
}

// ---- criterion 8: good-sample selection succeeds fast ----
void criterion_good_sample(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W, 6);
  std::vector<CylinderFunction> fs = standard_cylinder_family(*gr);
  double var_sum = 0.0;
  for (const auto& f : fs) var_sum += exact_variance(sigma, f);
  double tol = 10.0 * std::sqrt(var_sum);
  int ok = 0;
  long long tries_total = 0;
  for (int run = 0; run < 100; ++run) {
    GoodSampleResult res = select_good_sample(
        sigma, fs, tol, 10, derive_stream(0xC8, (uint64_t)run));
    if (res.ok) {
      ++ok;
      tries_total += res.tries;
    }
  }
  c.require(ok >= 99, "only " + std::to_string(ok) + "/100 runs succeeded");
  c.note("tol=" + std::to_string(tol) + ", mean tries " +
         std::to_string((double)tries_total / std::max(ok, 1)));
}

// ---- criterion 9: relation soficity end to end ----
void criterion_relation_end_to_end(Check& c) {
  auto gr = Group::lattice(1);
  Window W3 = gr->ball(3);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W3, 8);

  std::vector<CylinderFunction> fs = standard_cylinder_family(*gr);
  double var_sum = 0.0;
  for (const auto& f : fs) var_sum += exact_variance(sigma, f);
  GoodSampleResult gs = select_good_sample(sigma, fs, 10.0 * std::sqrt(var_sum),
                                           10, derive_stream(0xC9, 1));
  c.require(gs.ok, "good sample selection failed");
  if (!gs.ok) return;

  std::vector<Element> test_elems = gr->ball(1).elements();
  std::vector<CylinderSet> base;
  {
    CylinderSet full = CylinderSet::full();
    base.push_back(full);
    int id = 0;
    for (const Element& g : test_elems) {
      CylinderSet s = CylinderSet::bit(g, true);
      s.name = "bit" + std::to_string(id++);
      base.push_back(s);
    }
    for (const Element& h : test_elems) {
      for (int b = 0; b < 4; ++b) {
        CylinderSet s = CylinderSet::label_bins(h, 4, {b});
        s.name = "lab" + std::to_string(id++);
        base.push_back(s);
      }
    }
  }
  // Family: base sets, their pairwise intersections, and translates.
  std::vector<CylinderSet> family;
  std::map<std::string, bool> seen;
  auto add = [&](const CylinderSet& s) {
    std::string key = s.canonical_key(*gr);
    if (seen.emplace(key, true).second) family.push_back(s);
  };
  for (const auto& b : base) add(b);
  for (size_t i = 0; i < base.size(); ++i)
    for (size_t j = i; j < base.size(); ++j) add(base[i].intersect(base[j]));
  for (const auto& b : base)
    for (const Element& g : test_elems) add(b.translated(*gr, g));

  SoficApproxData data =
      export_relation_data(sigma, gs.labels, family, gr->ball(2));
  IRSWindowSpec theta = IRSWindowSpec::from_measure(
      empirical_irs(sigma, gr->ball(2)),
      IRSWindowSpec::Provenance::EmpiricalFromSigma);

  RelationTolerances tol;
  tol.homomorphism = 0.0;
  tol.intersection = 0.0;
  tol.trace = 0.05;
  tol.equivariance = 0.0;
  FullReport rep = full_report(data, base, test_elems, theta, tol);
  c.require(rep.closure_violations.empty(),
            std::to_string(rep.closure_violations.size()) + " closure violations");
  double max_trace = 0.0;
  for (const auto& row : rep.rows) {
    if (row.kind == "trace") max_trace = std::max(max_trace, row.value);
    if ((row.kind == "intersection" || row.kind == "equivariance") &&
        row.value != 0.0)
      c.require(false, row.kind + " defect nonzero for " + row.params);
  }
  c.require(rep.pass, "full_report failed");
  c.note("max trace defect " + std::to_string(max_trace) + ", " +
         std::to_string(family.size()) + " sets");
}

// ---- criterion 10: conjugacy search ----
void criterion_conjugacy(Check& c) {
  // (a) two independently constructed n-cycles at d = 10^4.
  {
    auto gr = Group::lattice(1);
    Window W = gr->ball(2);
    ApproxHom sigma =
        ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W, 6);
    ApproxHom psi =
        ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {3}), W, 6);
    AlignmentProblem p;
    p.sigma = &sigma;
    p.psi = &psi;
    p.window = gr->ball(1).elements();
    p.seed = 0xA10;
    AlignmentResult res = align(p);
    c.require(res.objective.is_zero(),
              "n-cycle alignment objective " + res.objective.str());
    Rational recomputed =
        alignment_objective(sigma, psi, res.chi, p.window);
    c.require(recomputed == res.objective, "objective not recomputable");
  }

  // (b) align vs brute force at d = 6.
  {
    auto gr = Group::free_group(2);
    Window W = gr->ball(1);
    std::vector<Element> E = {Element{{1}}, Element{{2}}};
    int matched = 0, undercut = 0;
    for (int t = 0; t < 100; ++t) {
      ApproxHom sigma = ApproxHom::from_action(
          gr, ActionSpec::seeded_images(6, derive_stream(0xB10, 2 * (uint64_t)t)),
          W, 4);
      ApproxHom psi = ApproxHom::from_action(
          gr,
          ActionSpec::seeded_images(6, derive_stream(0xB10, 2 * (uint64_t)t + 1)),
          W, 4);
      AlignmentResult exact = brute_force_align(sigma, psi, E);
      AlignmentProblem p;
      p.sigma = &sigma;
      p.psi = &psi;
      p.window = E;
      p.seed = derive_stream(0xB11, (uint64_t)t);
      AlignmentResult heur = align(p);
      if (heur.objective == exact.objective) ++matched;
      if (heur.objective < exact.objective) ++undercut;
    }
    c.require(undercut == 0, "align undercut brute force");
    c.require(matched >= 90,
              "align matched brute force only " + std::to_string(matched) +
                  "/100 times");
    c.note("brute-force matches " + std::to_string(matched) + "/100");
  }

  // (c) Z^2 torus vs Z/n^2 embedding trend.
  {
    auto gr = Group::lattice(2);
    Window W3 = gr->ball(3);
    std::vector<std::vector<Element>> family;
    for (const Element& g : W3.elements()) family.push_back({g});
    family.push_back(gr->ball(1).elements());
    family.push_back(gr->ball(2).elements());
    family.push_back(W3.elements());

    std::vector<long long> ns = {8, 16, 32};
    std::vector<ApproxHom> keep;
    keep.reserve(2 * ns.size());
    std::vector<TrendInstance> instances;
    for (long long n : ns) {
      keep.push_back(ApproxHom::from_action(gr, ActionSpec::torus(n), W3, 8));
      keep.push_back(ApproxHom::from_action(
          gr, ActionSpec::cyclic(n * n, {1, n}), W3, 8));
      TrendInstance inst;
      inst.size_param = n;
      inst.sigma = &keep[keep.size() - 2];
      inst.psi = &keep[keep.size() - 1];
      inst.align_window = W3.elements();
      inst.stats_family = family;
      instances.push_back(std::move(inst));
    }
    AlignmentProblem tmpl;
    tmpl.seed = 0xA10C;
    std::vector<TrendRow> rows = conjugacy_trend(instances, 1e-9, tmpl);
    for (const auto& row : rows)
      c.require(row.stats_pass, "stats_match failed at n=" +
                                    std::to_string(row.size_param));
    for (size_t i = 0; i + 1 < rows.size(); ++i)
      c.require(rows[i + 1].objective <= rows[i].objective,
                "objective trend not monotone at step " + std::to_string(i));
    std::ostringstream tr;
    tr << "objectives";
    for (const auto& row : rows) tr << " " << row.objective.str();
    c.note(tr.str());
  }
}

// ---- criterion 11: IRS mismatch detection ----
void criterion_mismatch_detection(Check& c) {
  auto gr = Group::lattice(1);
  Window W = gr->ball(2);
  ApproxHom sigma =
      ApproxHom::from_action(gr, ActionSpec::cyclic(10000, {1}), W, 6);
  ApproxHom padded = pad_trivial(sigma, sigma.degree() / 2);
  std::vector<std::vector<Element>> family;
  for (const Element& g : W.elements())
    if (!gr->is_identity(g)) family.push_back({g});
  StatsMatchReport rep = stats_match(sigma, padded, family, 0.05);
  c.require(!rep.all_pass, "mismatch not flagged");
  for (const auto& row : rep.rows) {
    c.require(row.diff == Rational(1, 3),
              "difference " + row.diff.str() + " is not exactly 1/3");
    c.require(!row.pass, "mismatched row passed");
  }
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* progress) {
  struct Entry {
    int id;
    const char* name;
    std::function<void(Check&)> fn;
    double time_limit;  // seconds; 0 = none stated
  };
  std::vector<Entry> entries = {
      {1, "exactness of honest actions", criterion_exact_honest, 5.0},
      {2, "permanence identities", criterion_permanence, 0.0},
      {3, "violation-mass inequalities", criterion_violation_masses, 0.0},
      {4, "oracle equivalence phi_f vs coset product",
       criterion_oracle_equivalence, 0.0},
      {5, "main-theorem finite-scale consistency",
       criterion_theorem_consistency, 30.0},
      {6, "Monte Carlo calibration", criterion_mc_calibration, 0.0},
      {7, "variance decay", criterion_variance_decay, 60.0},
      {8, "good-sample selection", criterion_good_sample, 0.0},
      {9, "relation soficity end-to-end", criterion_relation_end_to_end, 60.0},
      {10, "conjugacy search", criterion_conjugacy, 0.0},
      {11, "IRS mismatch detection", criterion_mismatch_detection, 0.0},
  };

  std::vector<CriterionResult> results;
  for (const auto& entry : entries) {
    Check check;
    auto t0 = std::chrono::steady_clock::now();
    try {
      entry.fn(check);
    } catch (const std::exception& ex) {
      check.ok = false;
      check.detail << "exception: " << ex.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (entry.time_limit > 0.0 && secs > entry.time_limit) {
      check.ok = false;
      check.detail << "runtime " << secs << "s exceeds " << entry.time_limit
                   << "s; ";
    }
    CriterionResult res;
    res.id = entry.id;
    res.name = entry.name;
    res.pass = check.ok;
    res.detail = check.detail.str();
    res.seconds = secs;
    if (progress) {
      (*progress) << (res.pass ? "[PASS]" : "[FAIL]") << " criterion "
                  << res.id << ": " << res.name << " (" << res.seconds
                  << "s)";
      if (!res.detail.empty()) (*progress) << " -- " << res.detail;
      (*progress) << "\n" << std::flush;
    }
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace soficlab
