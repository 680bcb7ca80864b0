#include "soficlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "soficlab/bernoulli.hpp"

namespace soficlab {

json group_spec_to_json(const GroupSpec& spec) {
  json j;
  switch (spec.kind) {
    case GroupKind::Lattice:
      j["kind"] = "lattice";
      j["rank"] = spec.rank;
      break;
    case GroupKind::FiniteAbelian:
      j["kind"] = "finite_abelian";
      j["moduli"] = spec.moduli;
      break;
    case GroupKind::Heisenberg:
      j["kind"] = "heisenberg";
      break;
    case GroupKind::Free:
      j["kind"] = "free";
      j["rank"] = spec.rank;
      break;
  }
  return j;
}

GroupSpec group_spec_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  GroupSpec spec;
  if (kind == "lattice") {
    spec.kind = GroupKind::Lattice;
    spec.rank = j.at("rank").get<int>();
  } else if (kind == "finite_abelian") {
    spec.kind = GroupKind::FiniteAbelian;
    spec.moduli = j.at("moduli").get<std::vector<long long>>();
    spec.rank = (int)spec.moduli.size();
  } else if (kind == "heisenberg") {
    spec.kind = GroupKind::Heisenberg;
    spec.rank = 3;
  } else if (kind == "free") {
    spec.kind = GroupKind::Free;
    spec.rank = j.at("rank").get<int>();
  } else {
    throw std::invalid_argument("unknown group kind: " + kind);
  }
  return spec;
}

Element element_from_json(const Group& gr, const json& j) {
  Element e{j.get<std::vector<long long>>()};
  gr.validate(e);
  return e;
}

json element_to_json(const Element& e) { return json(e.v); }

long long eval_size_expr(const json& v, long long n) {
  if (v.is_number_integer()) return v.get<long long>();
  if (!v.is_string())
    throw std::invalid_argument("size expression must be int or string");
  std::string s = v.get<std::string>();
  long long coeff = 1;
  size_t pos = 0;
  auto read_int = [&]() {
    size_t start = pos;
    while (pos < s.size() && (isdigit((unsigned char)s[pos]) || s[pos] == '-'))
      ++pos;
    return std::stoll(s.substr(start, pos - start));
  };
  if (pos < s.size() && (isdigit((unsigned char)s[pos]) || s[pos] == '-')) {
    coeff = read_int();
    if (pos == s.size()) return coeff;
    if (s[pos] == '*') ++pos;
  }
  if (pos >= s.size() || s[pos] != 'n')
    throw std::invalid_argument("bad size expression: " + s);
  ++pos;
  long long val = n;
  if (pos < s.size() && s[pos] == '^') {
    ++pos;
    long long k = read_int();
    val = 1;
    for (long long i = 0; i < k; ++i) val *= n;
  } else if (pos < s.size() && s[pos] == '/') {
    ++pos;
    long long c = read_int();
    val = n / c;
  }
  if (pos != s.size())
    throw std::invalid_argument("bad size expression: " + s);
  return coeff * val;
}

ActionSpec action_from_json(const Group& gr, const json& j, long long n) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "cyclic") {
    std::vector<long long> offsets;
    for (const auto& o : j.at("offsets")) offsets.push_back(eval_size_expr(o, n));
    return ActionSpec::cyclic(eval_size_expr(j.at("modulus"), n),
                              std::move(offsets));
  }
  if (kind == "torus") return ActionSpec::torus(eval_size_expr(j.at("n"), n));
  if (kind == "regular") return ActionSpec::regular();
  if (kind == "lattice_coset") {
    std::vector<std::vector<long long>> basis;
    for (const auto& row : j.at("basis")) {
      basis.emplace_back();
      for (const auto& v : row) basis.back().push_back(eval_size_expr(v, n));
    }
    return ActionSpec::lattice_coset(std::move(basis));
  }
  if (kind == "heis_mod") return ActionSpec::heis_mod(eval_size_expr(j.at("n"), n));
  if (kind == "generator_images") {
    if (j.contains("images")) {
      std::vector<std::vector<uint32_t>> images;
      for (const auto& img : j.at("images"))
        images.push_back(img.get<std::vector<uint32_t>>());
      return ActionSpec::explicit_images(std::move(images));
    }
    return ActionSpec::seeded_images(eval_size_expr(j.at("degree"), n),
                                     j.at("seed").get<uint64_t>());
  }
  if (kind == "trivial")
    return ActionSpec::trivial(eval_size_expr(j.at("degree"), n));
  (void)gr;
  throw std::invalid_argument("unknown action kind: " + kind);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.group = group_spec_from_json(j.at("group"));
  for (const auto& c : j.at("constructions")) {
    ConstructionSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.action_template = c.at("action");
    spec.perturb_rate = c.value("perturb_rate", 0.0);
    cfg.constructions.push_back(std::move(spec));
  }
  cfg.sizes = j.at("sizes").get<std::vector<long long>>();
  if (j.contains("window_radii"))
    cfg.window_radii = j.at("window_radii").get<std::vector<int>>();
  if (cfg.window_radii.empty())
    throw std::invalid_argument("window_radii must be nonempty");
  cfg.eval_length_cap = j.value("eval_length_cap", 16);
  cfg.cylinder_family = j.value("cylinder_family", std::string("standard"));
  if (j.contains("cylinders")) cfg.explicit_cylinders = j.at("cylinders");
  cfg.cylinder_bins = j.value("cylinder_bins", 2);
  cfg.relation_bins = j.value("relation_bins", 4);
  cfg.theta_source = j.value("theta_source", std::string("empirical"));
  cfg.theta_window_radius = j.value("theta_window_radius", 2);
  if (j.contains("theta_patterns"))
    for (const auto& p : j.at("theta_patterns"))
      cfg.theta_patterns.emplace_back(p.at("bits").get<std::string>(),
                                      p.at("weight").get<std::string>());
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    cfg.tolerances.defect = t.value("defect", cfg.tolerances.defect);
    cfg.tolerances.trace = t.value("trace", cfg.tolerances.trace);
    cfg.tolerances.good_sample =
        t.value("good_sample", cfg.tolerances.good_sample);
    cfg.tolerances.alignment = t.value("alignment", cfg.tolerances.alignment);
    cfg.tolerances.stats = t.value("stats", cfg.tolerances.stats);
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    cfg.seeds.labels = s.value("labels", cfg.seeds.labels);
    cfg.seeds.perturb = s.value("perturb", cfg.seeds.perturb);
    cfg.seeds.align = s.value("align", cfg.seeds.align);
    cfg.seeds.mc = s.value("mc", cfg.seeds.mc);
  }
  cfg.mc_samples = j.value("mc_samples", 1024);
  cfg.good_sample_max_tries = j.value("good_sample_max_tries", 10);
  if (j.contains("align")) {
    const auto& a = j.at("align");
    cfg.align.refinement_rounds =
        a.value("refinement_rounds", cfg.align.refinement_rounds);
    cfg.align.max_sweeps = a.value("max_sweeps", cfg.align.max_sweeps);
    cfg.align.restarts = a.value("restarts", cfg.align.restarts);
    cfg.align.window_radius = a.value("window_radius", cfg.align.window_radius);
  }
  cfg.pipelines = j.at("pipelines").get<std::vector<std::string>>();
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.degree_cap = j.value("degree_cap", ApproxHom::kDefaultDegreeCap);
  cfg.dump_sigma = j.value("dump_sigma", false);
  cfg.dump_chi = j.value("dump_chi", false);
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return from_json(j);
}

json ExperimentConfig::echo() const {
  json j;
  j["group"] = group_spec_to_json(group);
  json cons = json::array();
  for (const auto& c : constructions) {
    json cj;
    cj["name"] = c.name;
    cj["action"] = c.action_template;
    cj["perturb_rate"] = c.perturb_rate;
    cons.push_back(cj);
  }
  j["constructions"] = cons;
  j["sizes"] = sizes;
  j["window_radii"] = window_radii;
  j["eval_length_cap"] = eval_length_cap;
  j["cylinder_family"] = cylinder_family;
  if (!explicit_cylinders.is_null()) j["cylinders"] = explicit_cylinders;
  j["cylinder_bins"] = cylinder_bins;
  j["relation_bins"] = relation_bins;
  j["theta_source"] = theta_source;
  j["theta_window_radius"] = theta_window_radius;
  if (!theta_patterns.empty()) {
    json pats = json::array();
    for (const auto& [bits, weight] : theta_patterns)
      pats.push_back(json{{"bits", bits}, {"weight", weight}});
    j["theta_patterns"] = pats;
  }
  j["tolerances"] = json{{"defect", tolerances.defect},
                         {"trace", tolerances.trace},
                         {"good_sample", tolerances.good_sample},
                         {"alignment", tolerances.alignment},
                         {"stats", tolerances.stats}};
  j["seeds"] = json{{"labels", seeds.labels},
                    {"perturb", seeds.perturb},
                    {"align", seeds.align},
                    {"mc", seeds.mc}};
  j["mc_samples"] = mc_samples;
  j["good_sample_max_tries"] = good_sample_max_tries;
  j["align"] = json{{"refinement_rounds", align.refinement_rounds},
                    {"max_sweeps", align.max_sweeps},
                    {"restarts", align.restarts},
                    {"window_radius", align.window_radius}};
  j["pipelines"] = pipelines;
  j["output_dir"] = output_dir;
  j["degree_cap"] = degree_cap;
  j["dump_sigma"] = dump_sigma;
  j["dump_chi"] = dump_chi;
  return j;
}

std::vector<CylinderFunction> standard_cylinder_family(const Group& gr) {
  std::vector<CylinderFunction> fs;
  Element e = gr.identity();
  Element s = gr.generators()[0];
  Element sinv = gr.inverse(s);

  CylinderFunction f1;
  f1.name = "half@e";
  f1.labels.emplace_back(e, StepFunction::lower_indicator(2, 1));
  fs.push_back(f1);

  CylinderFunction f2;
  f2.name = "half@e*half@s";
  f2.labels.emplace_back(e, StepFunction::lower_indicator(2, 1));
  f2.labels.emplace_back(s, StepFunction::lower_indicator(2, 1));
  fs.push_back(f2);

  CylinderFunction f3;
  f3.name = "bit@s";
  f3.bits.push_back(s);
  fs.push_back(f3);

  CylinderFunction f4;
  f4.name = "steps@s";
  f4.labels.emplace_back(s, StepFunction(4, {1.0, 0.5, 0.25, 0.0}));
  fs.push_back(f4);

  CylinderFunction f5;
  f5.name = "half@sinv*bit@e";
  f5.labels.emplace_back(sinv, StepFunction::lower_indicator(2, 1));
  f5.bits.push_back(e);
  fs.push_back(f5);
  return fs;
}

std::vector<CylinderFunction> cylinders_from_json(const Group& gr,
                                                  const json& j) {
  std::vector<CylinderFunction> fs;
  for (const auto& cj : j) {
    CylinderFunction f;
    f.name = cj.value("name", std::string());
    if (cj.contains("labels")) {
      for (const auto& lj : cj.at("labels")) {
        Element g = element_from_json(gr, lj.at("element"));
        StepFunction fn(lj.at("bins").get<int>(),
                        lj.at("values").get<std::vector<double>>());
        f.labels.emplace_back(std::move(g), std::move(fn));
      }
    }
    if (cj.contains("bits"))
      for (const auto& bj : cj.at("bits"))
        f.bits.push_back(element_from_json(gr, bj));
    f.require_distinct();
    fs.push_back(std::move(f));
  }
  return fs;
}

std::string describe_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto gr = Group::from_spec(cfg.group);
  os << "group: " << cfg.group.describe() << "\n";
  os << "constructions:";
  for (const auto& c : cfg.constructions) os << " " << c.name;
  os << "\nsizes:";
  for (long long s : cfg.sizes) os << " " << s;
  os << "\n";

  int max_radius = 0;
  for (int r : cfg.window_radii) max_radius = std::max(max_radius, r);
  max_radius = std::max(max_radius, cfg.theta_window_radius);
  max_radius = std::max(max_radius, cfg.align.window_radius);
  Window w = gr->ball(max_radius);
  os << "max window radius " << max_radius << ": " << w.size()
     << " elements\n";

  std::vector<CylinderFunction> fs =
      cfg.cylinder_family == "standard"
          ? standard_cylinder_family(*gr)
          : cylinders_from_json(*gr, cfg.explicit_cylinders);
  Window theta_w = gr->ball(cfg.theta_window_radius);
  for (const auto& f : fs) {
    std::vector<Element> E;
    for (const auto& [g, fn] : f.labels) E.push_back(g);
    ClosureReport rep = check_pair_products(theta_w, E);
    if (!rep.pass) {
      os << "closure FAILURE for cylinder '" << f.name
         << "': E*E^-1 leaves the theta window; missing:";
      for (const auto& m : rep.missing) os << " " << gr->to_string(m);
      os << "\n";
      throw std::invalid_argument(
          "cylinder family violates the theta-window closure requirement; "
          "increase theta_window_radius");
    }
  }
  os << "closure checks: all cylinder label windows satisfy E*E^-1 within "
        "ball("
     << cfg.theta_window_radius << ")\n";

  for (const auto& c : cfg.constructions) {
    for (long long n : cfg.sizes) {
      ActionSpec a = action_from_json(*gr, c.action_template, n);
      uint32_t d = action_degree(*gr, a);
      if (d > cfg.degree_cap)
        os << "WARNING: construction " << c.name << " at size " << n
           << " has degree " << d << " above the cap " << cfg.degree_cap
           << "\n";
      double mem_mb =
          (double)d * (double)w.size() * sizeof(uint32_t) / (1024.0 * 1024.0);
      // crude cost model: dominant loops touch every point once per
      // window element and pipeline stage
      double ops = (double)d * (double)w.size() *
                   (double)std::max<size_t>(cfg.pipelines.size(), 1);
      os << "  " << c.name << " @ n=" << n << ": degree " << d
         << ", image storage ~" << (long long)(mem_mb + 0.5)
         << " MiB, ~" << (long long)(ops / 1e6 + 0.5) << "M point-ops\n";
    }
  }
  os << "pipelines:";
  for (const auto& p : cfg.pipelines) os << " " << p;
  os << "\n";
  return os.str();
}

}  // namespace soficlab
