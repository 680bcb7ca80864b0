#include "soficlab/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soficlab/parallel.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

namespace {

std::vector<Element> label_elements(const CylinderFunction& f) {
  std::vector<Element> e;
  e.reserve(f.labels.size());
  for (const auto& [g, fn] : f.labels) e.push_back(g);
  return e;
}

void require_pair_products(const Window& W, std::span<const Element> E) {
  ClosureReport rep = check_pair_products(W, E);
  if (!rep.pass) {
    std::string msg = "window closure violated (E*E^-1): missing";
    for (const auto& m : rep.missing) msg += " " + W.group()->to_string(m);
    throw std::invalid_argument(msg);
  }
}

std::vector<int> window_indices(const Window& W, std::span<const Element> es,
                                const char* what) {
  std::vector<int> idx;
  idx.reserve(es.size());
  for (const Element& e : es) {
    int i = W.index_of(e);
    if (i < 0)
      throw std::invalid_argument(std::string(what) + " element " +
                                  W.group()->to_string(e) +
                                  " outside the window");
    idx.push_back(i);
  }
  return idx;
}

// Index pairs g,k of E whose pattern bit y(g k^-1) is set, as an
// adjacency matrix; entry -1 marks products that leave the window.
std::vector<std::vector<char>> pattern_relation(const std::string& bits,
                                                const Window& W,
                                                std::span<const Element> E) {
  const Group& gr = *W.group();
  size_t n = E.size();
  std::vector<std::vector<char>> rel(n, std::vector<char>(n, 0));
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      Element p = gr.multiply(E[a], gr.inverse(E[b]));
      int i = W.index_of(p);
      if (i < 0)
        throw std::invalid_argument("pattern relation needs " +
                                    gr.to_string(p) + " in the window");
      rel[a][b] = bits[(size_t)i] == '1' ? 1 : 0;
    }
  }
  return rel;
}

bool bits_all_one(const std::string& bits, std::span<const int> idx) {
  for (int i : idx)
    if (bits[(size_t)i] != '1') return false;
  return true;
}

// Per-point factor of exact_mean: product over distinct preimage points
// of the integral of the product of labels mapping there. `pairs` is a
// scratch buffer of (preimage point, label index).
double point_factor(const std::vector<const Permutation*>& inv,
                    const std::vector<const StepFunction*>& fns, uint32_t j,
                    std::vector<std::pair<uint32_t, int>>& pairs,
                    std::vector<const StepFunction*>& group) {
  pairs.clear();
  for (size_t t = 0; t < inv.size(); ++t)
    pairs.emplace_back((*inv[t])(j), (int)t);
  std::sort(pairs.begin(), pairs.end());
  double factor = 1.0;
  size_t a = 0;
  while (a < pairs.size()) {
    size_t b = a;
    group.clear();
    while (b < pairs.size() && pairs[b].first == pairs[a].first) {
      group.push_back(fns[(size_t)pairs[b].second]);
      ++b;
    }
    factor *= integral_of_product(std::span<const StepFunction* const>(group));
    a = b;
  }
  return factor;
}

}  // namespace

double coset_product_factor(const std::string& bits, const Window& W,
                            const CylinderFunction& f) {
  std::vector<Element> E = label_elements(f);
  auto rel = pattern_relation(bits, W, E);
  size_t n = E.size();
  // The relation must be an equivalence to define the coset classes.
  for (size_t a = 0; a < n; ++a) {
    if (!rel[a][a]) throw std::invalid_argument("pattern not reflexive on E");
    for (size_t b = 0; b < n; ++b) {
      if (rel[a][b] != rel[b][a])
        throw std::invalid_argument("pattern relation not symmetric on E");
      if (!rel[a][b]) continue;
      for (size_t c = 0; c < n; ++c)
        if (rel[b][c] && !rel[a][c])
          throw std::invalid_argument("pattern relation not transitive on E");
    }
  }
  std::vector<char> done(n, 0);
  double prod = 1.0;
  std::vector<const StepFunction*> cls;
  for (size_t a = 0; a < n; ++a) {
    if (done[a]) continue;
    cls.clear();
    for (size_t b = 0; b < n; ++b)
      if (rel[a][b]) {
        cls.push_back(&f.labels[b].second);
        done[b] = 1;
      }
    prod *= integral_of_product(std::span<const StepFunction* const>(cls));
  }
  return prod;
}

double phi_f(const std::string& bits, const Window& W,
             const CylinderFunction& f) {
  if (bits[(size_t)W.identity_index()] != '1')
    throw std::invalid_argument("phi_f needs y(e) = 1");
  std::vector<int> fidx = window_indices(W, f.bits, "bit window");
  if (!bits_all_one(bits, fidx)) return 0.0;
  std::vector<Element> E = label_elements(f);
  if (E.empty()) return 1.0;
  auto rel = pattern_relation(bits, W, E);
  double prod = 1.0;
  std::vector<const StepFunction*> kset;
  for (size_t g = 0; g < E.size(); ++g) {
    kset.clear();
    for (size_t k = 0; k < E.size(); ++k)
      if (rel[g][k]) kset.push_back(&f.labels[k].second);
    // y(e)=1 puts g itself in the set, so the exponent is at least 1.
    double base = integral_of_product(std::span<const StepFunction* const>(kset));
    prod *= std::pow(base, 1.0 / (double)kset.size());
  }
  return prod;
}

double mu_theta(const CylinderFunction& f, const IRSWindowSpec& theta) {
  f.require_distinct();
  std::vector<Element> E = label_elements(f);
  require_pair_products(theta.window, E);
  std::vector<int> fidx = window_indices(theta.window, f.bits, "bit window");
  double total = 0.0;
  for (const auto& [bits, weight] : theta.patterns) {
    if (!bits_all_one(bits, fidx)) continue;
    total += weight.to_double() * coset_product_factor(bits, theta.window, f);
  }
  return total;
}

double pushforward(const ApproxHom& sigma, const Labels& x,
                   const CylinderFunction& f) {
  f.require_distinct();
  if (x.degree != sigma.degree())
    throw std::invalid_argument("labels degree mismatch");
  uint32_t d = sigma.degree();
  std::vector<Element> E = label_elements(f);
  Microstate ms(sigma, x, E);
  std::vector<Permutation> bit_perms = sigma.evaluate_all(f.bits);

  std::vector<double> vals(d);
  parallel_for(d, [&](int64_t b, int64_t e) {
    for (int64_t j = b; j < e; ++j) {
      bool gate = true;
      for (const auto& p : bit_perms)
        if (p((uint32_t)j) != (uint32_t)j) {
          gate = false;
          break;
        }
      if (!gate) {
        vals[(size_t)j] = 0.0;
        continue;
      }
      double prod = 1.0;
      for (size_t t = 0; t < E.size(); ++t)
        prod *= f.labels[t].second(ms.label(t, (uint32_t)j));
      vals[(size_t)j] = prod;
    }
  });
  return pairwise_sum(vals) / (double)d;
}

double exact_mean(const ApproxHom& sigma, const CylinderFunction& f) {
  f.require_distinct();
  uint32_t d = sigma.degree();
  std::vector<Element> E = label_elements(f);
  std::vector<Permutation> label_perms = sigma.evaluate_all(E);
  std::vector<Permutation> inv_store;
  inv_store.reserve(label_perms.size());
  for (const auto& p : label_perms) inv_store.push_back(p.inverse());
  std::vector<const Permutation*> inv;
  std::vector<const StepFunction*> fns;
  for (size_t t = 0; t < E.size(); ++t) {
    inv.push_back(&inv_store[t]);
    fns.push_back(&f.labels[t].second);
  }
  std::vector<Permutation> bit_perms = sigma.evaluate_all(f.bits);

  std::vector<double> vals(d);
  parallel_for(d, [&](int64_t b, int64_t e) {
    std::vector<std::pair<uint32_t, int>> pairs;
    std::vector<const StepFunction*> group;
    for (int64_t j = b; j < e; ++j) {
      bool gate = true;
      for (const auto& p : bit_perms)
        if (p((uint32_t)j) != (uint32_t)j) {
          gate = false;
          break;
        }
      vals[(size_t)j] =
          gate ? point_factor(inv, fns, (uint32_t)j, pairs, group) : 0.0;
    }
  });
  return pairwise_sum(vals) / (double)d;
}

double exact_variance(const ApproxHom& sigma, const CylinderFunction& f) {
  f.require_distinct();
  uint32_t d = sigma.degree();
  std::vector<Element> E = label_elements(f);
  if (E.empty()) return 0.0;  // no label dependence: pushforward is constant
  std::vector<Permutation> label_perms = sigma.evaluate_all(E);
  std::vector<Permutation> inv_store;
  inv_store.reserve(label_perms.size());
  for (const auto& p : label_perms) inv_store.push_back(p.inverse());
  std::vector<const Permutation*> inv;
  std::vector<const StepFunction*> fns;
  for (size_t t = 0; t < E.size(); ++t) {
    inv.push_back(&inv_store[t]);
    fns.push_back(&f.labels[t].second);
  }
  std::vector<Permutation> bit_perms = sigma.evaluate_all(f.bits);

  std::vector<char> f_fixed(d, 1);
  for (const auto& p : bit_perms)
    for (uint32_t j = 0; j < d; ++j)
      if (p(j) != j) f_fixed[j] = 0;

  // Per-point factors Psi(j).
  std::vector<double> psi(d, 0.0);
  parallel_for(d, [&](int64_t b, int64_t e) {
    std::vector<std::pair<uint32_t, int>> pairs;
    std::vector<const StepFunction*> group;
    for (int64_t j = b; j < e; ++j)
      if (f_fixed[(size_t)j])
        psi[(size_t)j] = point_factor(inv, fns, (uint32_t)j, pairs, group);
  });

  // For each j, candidate overlapping partners are sigma(h)(sigma(g)^-1(j)).
  std::vector<double> contrib(d, 0.0);
  parallel_for(d, [&](int64_t b, int64_t e) {
    std::vector<uint32_t> cands;
    std::vector<std::pair<uint32_t, int>> pairs;
    std::vector<const StepFunction*> group;
    for (int64_t jj = b; jj < e; ++jj) {
      uint32_t j = (uint32_t)jj;
      if (!f_fixed[j]) continue;
      cands.clear();
      for (size_t g = 0; g < E.size(); ++g) {
        uint32_t s = (*inv[g])(j);
        for (size_t h = 0; h < E.size(); ++h) cands.push_back(label_perms[h](s));
      }
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
      double c = 0.0;
      for (uint32_t k : cands) {
        if (!f_fixed[k]) continue;
        // Joint expectation over the union of both preimage lists.
        pairs.clear();
        for (size_t t = 0; t < E.size(); ++t)
          pairs.emplace_back((*inv[t])(j), (int)t);
        for (size_t t = 0; t < E.size(); ++t)
          pairs.emplace_back((*inv[t])(k), (int)(t + E.size()));
        std::sort(pairs.begin(), pairs.end());
        double joint = 1.0;
        size_t a = 0;
        while (a < pairs.size()) {
          size_t bb = a;
          group.clear();
          while (bb < pairs.size() && pairs[bb].first == pairs[a].first) {
            group.push_back(fns[(size_t)pairs[bb].second % E.size()]);
            ++bb;
          }
          joint *=
              integral_of_product(std::span<const StepFunction* const>(group));
          a = bb;
        }
        c += joint - psi[j] * psi[k];
      }
      contrib[j] = c;
    }
  });
  return pairwise_sum(contrib) / ((double)d * (double)d);
}

McStats mc_stats(const ApproxHom& sigma, const CylinderFunction& f, int samples,
                 uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("mc_stats needs >= 2 samples");
  std::vector<double> vals((size_t)samples);
  parallel_for(samples, [&](int64_t b, int64_t e) {
    for (int64_t s = b; s < e; ++s) {
      Labels x = sample_labels(sigma.degree(), derive_stream(seed, (uint64_t)s));
      vals[(size_t)s] = pushforward(sigma, x, f);
    }
  });
  McStats st;
  st.samples = samples;
  st.mean = pairwise_sum(vals) / (double)samples;
  std::vector<double> sq((size_t)samples);
  for (int s = 0; s < samples; ++s) {
    double dev = vals[(size_t)s] - st.mean;
    sq[(size_t)s] = dev * dev;
  }
  st.sample_variance = pairwise_sum(sq) / (double)(samples - 1);
  st.confidence_radius = 3.0 * std::sqrt(st.sample_variance / (double)samples);
  return st;
}

CylinderFunction translate_cylinder(const Group& group,
                                    const CylinderFunction& f, const Element& g,
                                    const Window* require_within) {
  CylinderFunction out;
  out.name = f.name.empty() ? "" : f.name + ".translated";
  for (const auto& [h, fn] : f.labels)
    out.labels.emplace_back(group.multiply(g, h), fn);
  for (const Element& b : f.bits) out.bits.push_back(group.conjugate(g, b));
  if (require_within) {
    for (const auto& [h, fn] : out.labels)
      if (!require_within->contains(h))
        throw std::invalid_argument("translated label element " +
                                    group.to_string(h) + " leaves the window");
    for (const Element& b : out.bits)
      if (!require_within->contains(b))
        throw std::invalid_argument("translated bit element " +
                                    group.to_string(b) + " leaves the window");
  }
  return out;
}

EquivarianceResult equivariance_defect(const ApproxHom& sigma, const Labels& x,
                                       const CylinderFunction& f,
                                       const Element& g) {
  f.require_distinct();
  const Group& gr = *sigma.group();
  uint32_t d = sigma.degree();
  std::vector<Element> E = label_elements(f);

  Permutation inv_g = sigma.evaluate(g).inverse();
  std::vector<Permutation> inv_k, inv_gk, bit_b, bit_conj;
  for (const Element& k : E) {
    inv_k.push_back(sigma.evaluate(k).inverse());
    inv_gk.push_back(sigma.evaluate(gr.multiply(g, k)).inverse());
  }
  for (const Element& b : f.bits) {
    bit_b.push_back(sigma.evaluate(b));
    bit_conj.push_back(sigma.evaluate(gr.conjugate(g, b)));
  }

  std::vector<double> sq(d);
  std::vector<char> mismatch(d, 0);
  parallel_for(d, [&](int64_t b0, int64_t e0) {
    for (int64_t jj = b0; jj < e0; ++jj) {
      uint32_t j = (uint32_t)jj;
      uint32_t jp = inv_g(j);
      double lhs = 1.0, rhs = 1.0;
      bool bad = false;
      for (size_t t = 0; t < E.size(); ++t) {
        uint32_t a = inv_k[t](jp);
        uint32_t b = inv_gk[t](j);
        if (a != b) bad = true;
        lhs *= f.labels[t].second(x.x[a]);
        rhs *= f.labels[t].second(x.x[b]);
      }
      for (size_t t = 0; t < f.bits.size(); ++t) {
        bool lb = bit_b[t](jp) == jp;
        bool rb = bit_conj[t](j) == j;
        if (lb != rb) bad = true;
        if (!lb) lhs = 0.0;
        if (!rb) rhs = 0.0;
      }
      mismatch[j] = bad ? 1 : 0;
      double dev = lhs - rhs;
      sq[j] = dev * dev;
    }
  });
  long long mcount = 0;
  for (uint32_t j = 0; j < d; ++j) mcount += mismatch[j];

  EquivarianceResult r;
  r.value = std::sqrt(pairwise_sum(sq) / (double)d);
  r.mismatch_mass = Rational(mcount, d);
  r.bound = 2.0 * f.sup_bound() * std::sqrt(r.mismatch_mass.to_double());
  return r;
}

GoodSampleResult select_good_sample(const ApproxHom& sigma,
                                    std::span<const CylinderFunction> fs,
                                    double tol, int max_tries, uint64_t seed) {
  if (tol <= 0.0) throw std::invalid_argument("good-sample tol must be > 0");
  std::vector<double> means;
  double var_sum = 0.0;
  for (const auto& f : fs) {
    means.push_back(exact_mean(sigma, f));
    var_sum += exact_variance(sigma, f);
  }
  GoodSampleResult res;
  res.chebyshev_per_try = var_sum / (tol * tol);
  for (int t = 0; t < max_tries; ++t) {
    Labels x = sample_labels(sigma.degree(), derive_stream(seed, (uint64_t)t));
    std::vector<double> resid;
    double sum = 0.0;
    for (size_t i = 0; i < fs.size(); ++i) {
      double r = std::fabs(pushforward(sigma, x, fs[i]) - means[i]);
      resid.push_back(r);
      sum += r;
    }
    res.tries = t + 1;
    res.residuals = std::move(resid);
    res.residual_sum = sum;
    if (sum < tol) {
      res.ok = true;
      res.labels = std::move(x);
      return res;
    }
  }
  res.ok = false;
  return res;
}

TheoremCheck main_theorem_check(const ApproxHom& sigma,
                                const CylinderFunction& f, const Window& W) {
  f.require_distinct();
  std::vector<Element> E = label_elements(f);
  require_pair_products(W, E);
  window_indices(W, f.bits, "bit window");

  TheoremCheck out;
  out.exact_mean_value = exact_mean(sigma, f);

  PatternMeasure mu = empirical_irs(sigma, W);
  bool all_consistent = true;
  double phi_total = 0.0;
  for (const auto& [bits, mass] : mu.masses()) {
    if (pattern_inconsistency(W, bits)) all_consistent = false;
    if (bits[(size_t)W.identity_index()] == '1')
      phi_total += mass.to_double() * phi_f(bits, W, f);
  }
  out.phi_integral = phi_total;
  out.diff_phi = std::fabs(out.exact_mean_value - out.phi_integral);
  if (all_consistent) {
    IRSWindowSpec theta = IRSWindowSpec::from_measure(
        mu, IRSWindowSpec::Provenance::EmpiricalFromSigma);
    out.coset_integral = mu_theta(f, theta);
    out.diff_coset = std::fabs(out.exact_mean_value - *out.coset_integral);
  }

  // Points where sigma(e) moves j, or where the pattern grouping on E
  // disagrees with equality of label preimages; off this set the
  // per-point factor equals Phi_f of the point's pattern.
  const Group& gr = *sigma.group();
  uint32_t d = sigma.degree();
  Permutation sigma_e = sigma.evaluate(gr.identity());
  std::vector<Permutation> inv_perms;
  for (const Element& g : E) inv_perms.push_back(sigma.evaluate(g).inverse());
  std::vector<Permutation> prod_perms;  // sigma(g k^-1) for all pairs
  for (const Element& g : E)
    for (const Element& k : E)
      prod_perms.push_back(sigma.evaluate(gr.multiply(g, gr.inverse(k))));

  long long bad = 0;
  size_t n = E.size();
  for (uint32_t j = 0; j < d; ++j) {
    bool ok = sigma_e(j) == j;
    for (size_t a = 0; a < n && ok; ++a)
      for (size_t b = 0; b < n; ++b) {
        bool same_preimage = inv_perms[a](j) == inv_perms[b](j);
        bool pattern_bit = prod_perms[a * n + b](j) == j;
        if (same_preimage != pattern_bit) {
          ok = false;
          break;
        }
      }
    if (!ok) ++bad;
  }
  out.omega_complement = Rational(bad, d);

  double m1 = f.sup_bound();
  double big = 1.0;
  for (const auto& [g, fn] : f.labels) big *= std::max(1.0, fn.sup_norm());
  double m2 = std::pow(big, (double)E.size());
  out.slack = out.omega_complement.to_double() * (m1 + m2);
  return out;
}

}  // namespace soficlab
