#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "soficlab/approx_hom.hpp"
#include "soficlab/irs.hpp"

namespace soficlab {

// Minimize sum_{g in E} d_Hamm(chi sigma(g) chi^-1, psi(g)) over chi.

struct AlignmentProblem {
  const ApproxHom* sigma = nullptr;
  const ApproxHom* psi = nullptr;
  std::vector<Element> window;  // comparison window E
  int refinement_rounds = 6;
  int max_sweeps = 200;
  long long max_evals = 50'000'000;
  int restarts = -1;  // extra seeded random starts; -1 picks by degree
  uint64_t seed = 0;
};

struct AlignTrace {
  std::vector<std::pair<std::string, double>> start_objectives;  // after search
  std::string chosen_start;
  int refinement_rounds_used = 0;
  size_t color_classes_sigma = 0;
  size_t color_classes_psi = 0;
  bool class_size_multisets_equal = false;
  long long accepted_moves = 0;
  long long proposals = 0;
  bool amenable_group = true;
};

struct AlignmentResult {
  Permutation chi;
  Rational objective{0, 1};
  AlignTrace trace;
};

Rational alignment_objective(const ApproxHom& sigma, const ApproxHom& psi,
                             const Permutation& chi,
                             std::span<const Element> window);

// Exhaustive minimum over Sym(d), d <= 8; ties broken by lexicographic
// image sequence.
AlignmentResult brute_force_align(const ApproxHom& sigma, const ApproxHom& psi,
                                  std::span<const Element> window);

// Color refinement on the Schreier-type graphs, class matching, then
// transposition local search with incremental deltas; deterministic given
// the seed.
AlignmentResult align(const AlignmentProblem& problem);

// Shared color refinement: final class-size multisets per side (sorted),
// for the conjugation-soundness checks.
std::pair<std::vector<size_t>, std::vector<size_t>> refinement_class_sizes(
    const ApproxHom& sigma, const ApproxHom& psi,
    std::span<const Element> window, int rounds);

struct TrendInstance {
  long long size_param = 0;
  const ApproxHom* sigma = nullptr;
  const ApproxHom* psi = nullptr;
  std::vector<Element> align_window;
  std::vector<std::vector<Element>> stats_family;
};

struct TrendRow {
  long long size_param = 0;
  uint32_t degree = 0;
  Rational max_stat_diff{0, 1};
  bool stats_pass = false;
  Rational objective{0, 1};
  Permutation chi;
  std::string chosen_start;
  bool amenable_group = true;
};

std::vector<TrendRow> conjugacy_trend(std::span<const TrendInstance> instances,
                                      double stats_tol,
                                      const AlignmentProblem& params_template);

}  // namespace soficlab
