#include "soficlab/align.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "soficlab/rng.hpp"

namespace soficlab {

namespace {

struct SideData {
  std::vector<Permutation> perms;
  std::vector<Permutation> inverses;
};

SideData prepare(const ApproxHom& hom, std::span<const Element> window) {
  SideData s;
  s.perms = hom.evaluate_all(window);
  for (const auto& p : s.perms) s.inverses.push_back(p.inverse());
  return s;
}

void require_compatible(const ApproxHom& sigma, const ApproxHom& psi) {
  if (sigma.degree() != psi.degree())
    throw std::invalid_argument("alignment requires equal degrees");
  if (!sigma.group()->same_as(*psi.group()))
    throw std::invalid_argument("alignment requires the same group");
}

// One shared refinement round; returns new colors for both sides using a
// common relabeling table so colors stay comparable across sides.
void refine_round(const SideData& sa, const SideData& sb,
                  std::vector<long long>& ca, std::vector<long long>& cb) {
  std::map<std::vector<long long>, long long> table;
  auto next_color = [&table](const std::vector<long long>& key) {
    auto [it, fresh] = table.emplace(key, (long long)table.size());
    (void)fresh;
    return it->second;
  };
  uint32_t d = (uint32_t)ca.size();
  size_t ng = sa.perms.size();
  std::vector<long long> na(d), nb(d);
  std::vector<long long> key;
  for (uint32_t j = 0; j < d; ++j) {
    key.clear();
    key.push_back(ca[j]);
    std::vector<std::pair<long long, long long>> sig;
    for (size_t g = 0; g < ng; ++g)
      sig.emplace_back(ca[sa.perms[g](j)], ca[sa.inverses[g](j)]);
    std::sort(sig.begin(), sig.end());
    for (auto& [x, y] : sig) {
      key.push_back(x);
      key.push_back(y);
    }
    na[j] = next_color(key);
  }
  for (uint32_t j = 0; j < d; ++j) {
    key.clear();
    key.push_back(cb[j]);
    std::vector<std::pair<long long, long long>> sig;
    for (size_t g = 0; g < ng; ++g)
      sig.emplace_back(cb[sb.perms[g](j)], cb[sb.inverses[g](j)]);
    std::sort(sig.begin(), sig.end());
    for (auto& [x, y] : sig) {
      key.push_back(x);
      key.push_back(y);
    }
    nb[j] = next_color(key);
  }
  ca.swap(na);
  cb.swap(nb);
}

std::pair<std::vector<long long>, std::vector<long long>> refine(
    const SideData& sa, const SideData& sb, uint32_t d, int rounds,
    int* rounds_used) {
  std::vector<long long> ca(d, 0), cb(d, 0);
  long long classes = 1;
  int r = 0;
  for (; r < rounds; ++r) {
    refine_round(sa, sb, ca, cb);
    long long now = 0;
    for (long long c : ca) now = std::max(now, c + 1);
    for (long long c : cb) now = std::max(now, c + 1);
    if (now == classes) break;  // stable partition
    classes = now;
  }
  if (rounds_used) *rounds_used = r;
  return {ca, cb};
}

std::vector<uint32_t> match_by_colors(const std::vector<long long>& ca,
                                      const std::vector<long long>& cb) {
  uint32_t d = (uint32_t)ca.size();
  std::map<long long, std::vector<uint32_t>> groups_a, groups_b;
  for (uint32_t j = 0; j < d; ++j) groups_a[ca[j]].push_back(j);
  for (uint32_t j = 0; j < d; ++j) groups_b[cb[j]].push_back(j);
  std::vector<uint32_t> chi(d, UINT32_MAX);
  std::vector<uint32_t> left_a, left_b;
  for (auto& [color, as] : groups_a) {
    auto it = groups_b.find(color);
    if (it == groups_b.end()) {
      left_a.insert(left_a.end(), as.begin(), as.end());
      continue;
    }
    auto& bs = it->second;
    size_t n = std::min(as.size(), bs.size());
    for (size_t t = 0; t < n; ++t) chi[as[t]] = bs[t];
    for (size_t t = n; t < as.size(); ++t) left_a.push_back(as[t]);
    bs.erase(bs.begin(), bs.begin() + (long)n);
  }
  for (auto& [color, bs] : groups_b)
    left_b.insert(left_b.end(), bs.begin(), bs.end());
  std::sort(left_a.begin(), left_a.end());
  std::sort(left_b.begin(), left_b.end());
  for (size_t t = 0; t < left_a.size(); ++t) chi[left_a[t]] = left_b[t];
  return chi;
}

// Anchored Schreier walk: map j0 -> v0 and propagate along generator
// edges on both sides simultaneously. Recovers an exact conjugator on a
// transitive instance when the anchor pair is matched correctly.
std::vector<uint32_t> match_by_walk(const SideData& sa, const SideData& sb,
                                    uint32_t d, uint32_t v0) {
  std::vector<uint32_t> chi(d, UINT32_MAX);
  std::vector<char> used(d, 0);
  std::vector<uint32_t> queue;
  queue.reserve(d);
  uint32_t anchor = 0;
  uint32_t target = v0;
  while (true) {
    if (chi[anchor] == UINT32_MAX && !used[target]) {
      chi[anchor] = target;
      used[target] = 1;
      queue.push_back(anchor);
      size_t head = 0;
      while (head < queue.size()) {
        uint32_t j = queue[head++];
        uint32_t v = chi[j];
        for (size_t g = 0; g < sa.perms.size(); ++g) {
          uint32_t ja[2] = {sa.perms[g](j), sa.inverses[g](j)};
          uint32_t va[2] = {sb.perms[g](v), sb.inverses[g](v)};
          for (int t = 0; t < 2; ++t) {
            if (chi[ja[t]] == UINT32_MAX && !used[va[t]]) {
              chi[ja[t]] = va[t];
              used[va[t]] = 1;
              queue.push_back(ja[t]);
            }
          }
        }
      }
    }
    // next unmapped sigma-point / unused psi-point as fresh anchors
    while (anchor < d && chi[anchor] != UINT32_MAX) ++anchor;
    if (anchor >= d) break;
    target = 0;
    while (target < d && used[target]) ++target;
    if (target >= d) break;
  }
  for (uint32_t j = 0, v = 0; j < d; ++j) {
    if (chi[j] != UINT32_MAX) continue;
    while (used[v]) ++v;
    chi[j] = v;
    used[v] = 1;
  }
  return chi;
}

long long quick_objective(const SideData& sa, const SideData& sb,
                          const std::vector<uint32_t>& chi) {
  uint32_t d = (uint32_t)chi.size();
  std::vector<uint32_t> chi_inv(d);
  for (uint32_t j = 0; j < d; ++j) chi_inv[chi[j]] = j;
  long long num = 0;
  for (size_t g = 0; g < sa.perms.size(); ++g)
    for (uint32_t i = 0; i < d; ++i)
      if (chi[sa.perms[g](chi_inv[i])] != sb.perms[g](i)) ++num;
  return num;
}

// Cycle-type coupling on an anchor generator: conjugates one permutation
// exactly onto the other whenever the cycle types agree.
std::vector<uint32_t> match_by_cycles(const Permutation& p,
                                      const Permutation& q) {
  uint32_t d = p.degree();
  auto cycles_of = [d](const Permutation& perm) {
    std::map<size_t, std::vector<std::vector<uint32_t>>> by_len;
    std::vector<char> seen(d, 0);
    for (uint32_t j = 0; j < d; ++j) {
      if (seen[j]) continue;
      std::vector<uint32_t> cyc;
      uint32_t cur = j;
      while (!seen[cur]) {
        seen[cur] = 1;
        cyc.push_back(cur);
        cur = perm(cur);
      }
      by_len[cyc.size()].push_back(std::move(cyc));
    }
    return by_len;
  };
  auto pc = cycles_of(p);
  auto qc = cycles_of(q);
  std::vector<uint32_t> chi(d, UINT32_MAX);
  std::vector<uint32_t> left_p, left_q;
  for (auto& [len, ps] : pc) {
    auto it = qc.find(len);
    size_t n = it == qc.end() ? 0 : std::min(ps.size(), it->second.size());
    for (size_t t = 0; t < n; ++t)
      for (size_t u = 0; u < len; ++u) chi[ps[t][u]] = it->second[t][u];
    for (size_t t = n; t < ps.size(); ++t)
      left_p.insert(left_p.end(), ps[t].begin(), ps[t].end());
    if (it != qc.end()) it->second.erase(it->second.begin(), it->second.begin() + (long)n);
  }
  for (auto& [len, qs] : qc)
    for (auto& cyc : qs) left_q.insert(left_q.end(), cyc.begin(), cyc.end());
  std::sort(left_p.begin(), left_p.end());
  std::sort(left_q.begin(), left_q.end());
  for (size_t t = 0; t < left_p.size(); ++t) chi[left_p[t]] = left_q[t];
  return chi;
}

struct SearchState {
  uint32_t d = 0;
  const SideData* sigma = nullptr;
  const SideData* psi = nullptr;
  std::vector<uint32_t> chi, chi_inv;
  std::vector<std::vector<uint32_t>> A, A_inv;  // chi sigma(g) chi^-1
  std::vector<std::vector<char>> bad;
  long long total = 0;

  void init(std::vector<uint32_t> chi0) {
    chi = std::move(chi0);
    chi_inv.assign(d, 0);
    for (uint32_t j = 0; j < d; ++j) chi_inv[chi[j]] = j;
    size_t ng = sigma->perms.size();
    A.assign(ng, std::vector<uint32_t>(d));
    A_inv.assign(ng, std::vector<uint32_t>(d));
    bad.assign(ng, std::vector<char>(d, 0));
    total = 0;
    for (size_t g = 0; g < ng; ++g) {
      for (uint32_t i = 0; i < d; ++i)
        A[g][i] = chi[sigma->perms[g](chi_inv[i])];
      for (uint32_t i = 0; i < d; ++i) A_inv[g][A[g][i]] = i;
      for (uint32_t i = 0; i < d; ++i) {
        bad[g][i] = A[g][i] != psi->perms[g](i);
        total += bad[g][i];
      }
    }
  }

  static uint32_t tau(uint32_t p, uint32_t u, uint32_t v) {
    return p == u ? v : (p == v ? u : p);
  }

  long long delta(uint32_t u, uint32_t v) const {
    long long change = 0;
    for (size_t g = 0; g < A.size(); ++g) {
      uint32_t pos[4] = {u, v, A_inv[g][u], A_inv[g][v]};
      for (int t = 0; t < 4; ++t) {
        uint32_t p = pos[t];
        bool dup = false;
        for (int s = 0; s < t; ++s)
          if (pos[s] == p) dup = true;
        if (dup) continue;
        uint32_t nv = tau(A[g][tau(p, u, v)], u, v);
        bool nb = nv != psi->perms[g](p);
        change += (long long)nb - (long long)bad[g][p];
      }
    }
    return change;
  }

  void apply(uint32_t u, uint32_t v) {
    uint32_t j1 = chi_inv[u], j2 = chi_inv[v];
    chi[j1] = v;
    chi[j2] = u;
    chi_inv[u] = j2;
    chi_inv[v] = j1;
    for (size_t g = 0; g < A.size(); ++g) {
      uint32_t pos[4] = {u, v, A_inv[g][u], A_inv[g][v]};
      uint32_t uniq[4];
      int n = 0;
      for (int t = 0; t < 4; ++t) {
        bool dup = false;
        for (int s = 0; s < n; ++s)
          if (uniq[s] == pos[t]) dup = true;
        if (!dup) uniq[n++] = pos[t];
      }
      uint32_t nv[4];
      for (int t = 0; t < n; ++t)
        nv[t] = tau(A[g][tau(uniq[t], u, v)], u, v);
      for (int t = 0; t < n; ++t) {
        uint32_t p = uniq[t];
        total -= bad[g][p];
        A[g][p] = nv[t];
        bool nb = nv[t] != psi->perms[g](p);
        bad[g][p] = nb;
        total += nb;
      }
      for (int t = 0; t < n; ++t) A_inv[g][A[g][uniq[t]]] = uniq[t];
    }
  }
};

}  // namespace

Rational alignment_objective(const ApproxHom& sigma, const ApproxHom& psi,
                             const Permutation& chi,
                             std::span<const Element> window) {
  require_compatible(sigma, psi);
  if (chi.degree() != sigma.degree())
    throw std::invalid_argument("conjugator degree mismatch");
  Permutation chi_inv = chi.inverse();
  long long num = 0;
  for (const Element& g : window) {
    Permutation conj = compose(compose(chi, sigma.evaluate(g)), chi_inv);
    Permutation target = psi.evaluate(g);
    for (uint32_t j = 0; j < sigma.degree(); ++j)
      if (conj(j) != target(j)) ++num;
  }
  return Rational(num, sigma.degree());
}

AlignmentResult brute_force_align(const ApproxHom& sigma, const ApproxHom& psi,
                                  std::span<const Element> window) {
  require_compatible(sigma, psi);
  uint32_t d = sigma.degree();
  if (d > 8) throw std::invalid_argument("brute force capped at degree 8");
  SideData ss = prepare(sigma, window);
  SideData ps = prepare(psi, window);

  std::vector<uint32_t> chi(d);
  std::iota(chi.begin(), chi.end(), 0u);
  std::vector<uint32_t> best = chi;
  long long best_num = -1;
  std::vector<uint32_t> chi_inv(d);
  do {
    for (uint32_t j = 0; j < d; ++j) chi_inv[chi[j]] = j;
    long long num = 0;
    for (size_t g = 0; g < ss.perms.size(); ++g)
      for (uint32_t i = 0; i < d; ++i)
        if (chi[ss.perms[g](chi_inv[i])] != ps.perms[g](i)) ++num;
    if (best_num < 0 || num < best_num) {
      best_num = num;
      best = chi;
    }
  } while (std::next_permutation(chi.begin(), chi.end()));

  AlignmentResult res;
  res.chi = Permutation(best);
  res.objective = Rational(best_num, d);
  res.trace.chosen_start = "exhaustive";
  res.trace.amenable_group = sigma.group()->is_amenable();
  return res;
}

std::pair<std::vector<size_t>, std::vector<size_t>> refinement_class_sizes(
    const ApproxHom& sigma, const ApproxHom& psi,
    std::span<const Element> window, int rounds) {
  require_compatible(sigma, psi);
  SideData ss = prepare(sigma, window);
  SideData ps = prepare(psi, window);
  auto [ca, cb] = refine(ss, ps, sigma.degree(), rounds, nullptr);
  auto sizes = [](const std::vector<long long>& colors) {
    std::map<long long, size_t> m;
    for (long long c : colors) ++m[c];
    std::vector<size_t> out;
    for (auto& [c, n] : m) out.push_back(n);
    std::sort(out.begin(), out.end());
    return out;
  };
  return {sizes(ca), sizes(cb)};
}

AlignmentResult align(const AlignmentProblem& problem) {
  const ApproxHom& sigma = *problem.sigma;
  const ApproxHom& psi = *problem.psi;
  require_compatible(sigma, psi);
  uint32_t d = sigma.degree();
  SideData ss = prepare(sigma, problem.window);
  SideData ps = prepare(psi, problem.window);

  AlignTrace trace;
  trace.amenable_group = sigma.group()->is_amenable();

  auto [ca, cb] = refine(ss, ps, d, problem.refinement_rounds,
                         &trace.refinement_rounds_used);
  {
    std::map<long long, size_t> ma, mb;
    for (long long c : ca) ++ma[c];
    for (long long c : cb) ++mb[c];
    trace.color_classes_sigma = ma.size();
    trace.color_classes_psi = mb.size();
    std::vector<size_t> sa, sb;
    for (auto& [c, n] : ma) sa.push_back(n);
    for (auto& [c, n] : mb) sb.push_back(n);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    trace.class_size_multisets_equal = sa == sb;
  }

  std::vector<std::pair<std::string, std::vector<uint32_t>>> starts;
  {
    std::vector<uint32_t> id(d);
    std::iota(id.begin(), id.end(), 0u);
    starts.emplace_back("identity", std::move(id));
  }
  starts.emplace_back("refinement", match_by_colors(ca, cb));
  for (size_t g = 0; g < ss.perms.size(); ++g) {
    if (!ss.perms[g].is_identity() || !ps.perms[g].is_identity()) {
      starts.emplace_back("cycle-type",
                          match_by_cycles(ss.perms[g], ps.perms[g]));
      break;
    }
  }
  if (!ss.perms.empty()) {
    // anchored Schreier walks: exhaustive anchors at small degree,
    // seeded anchors otherwise; keep the best one
    std::vector<uint32_t> anchors;
    if (d <= 2048) {
      anchors.resize(d);
      std::iota(anchors.begin(), anchors.end(), 0u);
    } else {
      CounterRng rng = CounterRng::stream(problem.seed, 0x57414C4BULL);
      anchors.push_back(0);
      for (int t = 0; t < 16; ++t)
        anchors.push_back((uint32_t)rng.below(d));
    }
    long long best_walk = -1;
    std::vector<uint32_t> best_chi_walk;
    for (uint32_t v0 : anchors) {
      std::vector<uint32_t> chi = match_by_walk(ss, ps, d, v0);
      long long num = quick_objective(ss, ps, chi);
      if (best_walk < 0 || num < best_walk) {
        best_walk = num;
        best_chi_walk = std::move(chi);
      }
      if (best_walk == 0) break;
    }
    starts.emplace_back("schreier-walk", std::move(best_chi_walk));
  }
  int restarts = problem.restarts >= 0 ? problem.restarts
                                       : (d <= 2048 ? 6 : 1);
  for (int r = 0; r < restarts; ++r) {
    std::vector<uint32_t> chi(d);
    std::iota(chi.begin(), chi.end(), 0u);
    CounterRng rng = CounterRng::stream(problem.seed, 0x52534152ULL + r);
    rng.shuffle(chi.data(), chi.size());
    starts.emplace_back("random#" + std::to_string(r), std::move(chi));
  }

  SearchState state;
  state.d = d;
  state.sigma = &ss;
  state.psi = &ps;

  std::vector<uint32_t> best_chi;
  long long best_num = -1;
  std::string best_start;
  for (auto& [name, chi0] : starts) {
    state.init(std::move(chi0));
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps < problem.max_sweeps &&
           trace.proposals < problem.max_evals && state.total > 0) {
      improved = false;
      ++sweeps;
      for (size_t g = 0; g < ss.perms.size() && state.total > 0; ++g) {
        for (uint32_t i = 0; i < d; ++i) {
          if (!state.bad[g][i]) continue;
          uint32_t u = state.A[g][i];
          uint32_t v = ps.perms[g](i);
          if (u == v) continue;
          ++trace.proposals;
          if (trace.proposals >= problem.max_evals) break;
          if (state.delta(u, v) < 0) {
            state.apply(u, v);
            ++trace.accepted_moves;
            improved = true;
          }
        }
      }
    }
    trace.start_objectives.emplace_back(
        name, (double)state.total / (double)d);
    if (best_num < 0 || state.total < best_num) {
      best_num = state.total;
      best_chi = state.chi;
      best_start = name;
    }
  }

  trace.chosen_start = best_start;
  AlignmentResult res;
  res.chi = Permutation(best_chi);
  res.objective = Rational(best_num, d);
  res.trace = std::move(trace);
  return res;
}

std::vector<TrendRow> conjugacy_trend(std::span<const TrendInstance> instances,
                                      double stats_tol,
                                      const AlignmentProblem& params_template) {
  std::vector<TrendRow> rows;
  for (const TrendInstance& inst : instances) {
    TrendRow row;
    row.size_param = inst.size_param;
    row.degree = inst.sigma->degree();
    StatsMatchReport stats =
        stats_match(*inst.sigma, *inst.psi, inst.stats_family, stats_tol);
    row.max_stat_diff = stats.max_diff;
    row.stats_pass = stats.all_pass;
    AlignmentProblem p = params_template;
    p.sigma = inst.sigma;
    p.psi = inst.psi;
    p.window = inst.align_window;
    AlignmentResult res = align(p);
    row.objective = res.objective;
    row.chi = std::move(res.chi);
    row.chosen_start = res.trace.chosen_start;
    row.amenable_group = res.trace.amenable_group;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace soficlab
