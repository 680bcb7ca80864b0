#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "soficlab/approx_hom.hpp"
#include "soficlab/cylinder.hpp"
#include "soficlab/group.hpp"
#include "soficlab/rational.hpp"

namespace soficlab {

using json = nlohmann::json;

json group_spec_to_json(const GroupSpec& spec);
GroupSpec group_spec_from_json(const json& j);

Element element_from_json(const Group& gr, const json& j);
json element_to_json(const Element& e);

// Size expressions in action templates: an integer, or one of
// "n", "c*n", "n^k", "c*n^k", "n/c".
long long eval_size_expr(const json& v, long long n);

// Action template with size expressions resolved at n.
ActionSpec action_from_json(const Group& gr, const json& j, long long n);

struct ConstructionSpec {
  std::string name;
  json action_template;
  double perturb_rate = 0.0;
};

struct ExperimentConfig {
  GroupSpec group;
  std::vector<ConstructionSpec> constructions;
  std::vector<long long> sizes;
  std::vector<int> window_radii{1, 2, 3};
  int eval_length_cap = 16;

  std::string cylinder_family = "standard";  // "standard" | "explicit"
  json explicit_cylinders;                   // parsed lazily against the group
  int cylinder_bins = 2;
  int relation_bins = 4;

  std::string theta_source = "empirical";  // "empirical" | "patterns"
  int theta_window_radius = 2;
  std::vector<std::pair<std::string, std::string>> theta_patterns;  // bits, weight

  struct Tolerances {
    double defect = 0.0;
    double trace = 0.05;
    double good_sample = 0.0;  // 0 = automatic 10*sqrt(sum of variances)
    double alignment = 0.05;
    double stats = 1e-9;
  } tolerances;

  struct Seeds {
    uint64_t labels = 1;
    uint64_t perturb = 2;
    uint64_t align = 3;
    uint64_t mc = 4;
  } seeds;

  int mc_samples = 1024;
  int good_sample_max_tries = 10;

  struct AlignParams {
    int refinement_rounds = 6;
    int max_sweeps = 200;
    int restarts = -1;
    int window_radius = 3;
  } align;

  std::vector<std::string> pipelines;
  std::string output_dir = "out";
  uint32_t degree_cap = ApproxHom::kDefaultDegreeCap;
  bool dump_sigma = false;  // write binary ApproxHom dumps from the defect stage
  bool dump_chi = false;    // write conjugator image sequences from align

  static ExperimentConfig from_json(const json& j);
  static ExperimentConfig load(const std::string& path);
  json echo() const;  // normalized config echo for the run report
};

// Small canonical cylinder family over ball(1): used by the bernoulli
// pipeline defaults and the acceptance experiments.
std::vector<CylinderFunction> standard_cylinder_family(const Group& gr);

std::vector<CylinderFunction> cylinders_from_json(const Group& gr,
                                                  const json& j);

// Validation summary: window closures, degree estimates, warnings.
// Throws on hard validation failures.
std::string describe_config(const ExperimentConfig& cfg);

}  // namespace soficlab
