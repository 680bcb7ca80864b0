#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "soficlab/config.hpp"
#include "soficlab/io.hpp"
#include "soficlab/runner.hpp"

using namespace soficlab;
namespace fs = std::filesystem;

namespace {

json small_config(const std::string& outdir) {
  return json::parse(R"({
    "group": {"kind": "lattice", "rank": 1},
    "constructions": [
      {"name": "rot", "action": {"kind": "cyclic", "modulus": "n", "offsets": [1]}},
      {"name": "rot7", "action": {"kind": "cyclic", "modulus": "n", "offsets": [7]}}
    ],
    "sizes": [60, 120],
    "window_radii": [1, 2],
    "theta_window_radius": 2,
    "mc_samples": 64,
    "pipelines": ["defect", "irs", "bernoulli", "align"],
    "align": {"window_radius": 2},
    "seeds": {"labels": 5, "perturb": 6, "align": 7, "mc": 8},
    "output_dir": ")" + outdir + R"("
  })");
}

}  // namespace

TEST_CASE("size expressions") {
  CHECK(eval_size_expr(json(12), 5) == 12);
  CHECK(eval_size_expr(json("n"), 5) == 5);
  CHECK(eval_size_expr(json("n^2"), 5) == 25);
  CHECK(eval_size_expr(json("3*n"), 5) == 15);
  CHECK(eval_size_expr(json("2*n^3"), 2) == 16);
  CHECK(eval_size_expr(json("n/2"), 9) == 4);
  CHECK(eval_size_expr(json("7"), 9) == 7);
  CHECK_THROWS(eval_size_expr(json("x"), 9));
}

TEST_CASE("group and element json round trips") {
  for (const GroupSpec& spec :
       {GroupSpec{GroupKind::Lattice, 2, {}},
        GroupSpec{GroupKind::FiniteAbelian, 2, {2, 6}},
        GroupSpec{GroupKind::Heisenberg, 3, {}},
        GroupSpec{GroupKind::Free, 2, {}}}) {
    CHECK(group_spec_from_json(group_spec_to_json(spec)) == spec);
  }
  auto h3 = Group::heisenberg();
  Element e = element_from_json(*h3, json::parse("[1,-2,3]"));
  CHECK(element_to_json(e) == json::parse("[1,-2,3]"));
  CHECK_THROWS(element_from_json(*h3, json::parse("[1,2]")));
}

TEST_CASE("config parse, echo and describe") {
  ExperimentConfig cfg = ExperimentConfig::from_json(small_config("outx"));
  CHECK(cfg.constructions.size() == 2);
  CHECK(cfg.sizes == std::vector<long long>{60, 120});
  CHECK(cfg.seeds.labels == 5);
  // echo -> parse -> echo is stable
  ExperimentConfig cfg2 = ExperimentConfig::from_json(cfg.echo());
  CHECK(cfg2.echo() == cfg.echo());

  std::string summary = describe_config(cfg);
  CHECK(summary.find("Z^1") != std::string::npos);
  CHECK(summary.find("closure checks") != std::string::npos);

  // cylinder windows must satisfy E*E^-1 closure within the theta window
  ExperimentConfig bad = cfg;
  bad.theta_window_radius = 0;
  CHECK_THROWS(describe_config(bad));

  // degrees above the cap are warned about, not silently accepted
  ExperimentConfig capped = cfg;
  capped.degree_cap = 100;
  std::string warned = describe_config(capped);
  CHECK(warned.find("WARNING") != std::string::npos);
}

TEST_CASE("standard cylinder family") {
  auto z = Group::lattice(1);
  auto fs = standard_cylinder_family(*z);
  CHECK(fs.size() == 5);
  for (const auto& f : fs) f.require_distinct();
  // explicit cylinder parsing
  json cj = json::parse(R"([{
    "name": "custom",
    "labels": [{"element": [0], "bins": 2, "values": [1.0, 0.0]}],
    "bits": [[1]]
  }])");
  auto parsed = cylinders_from_json(*z, cj);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].labels.size() == 1);
  CHECK(parsed[0].bits.size() == 1);
}

TEST_CASE("approx hom dump round trip") {
  auto z2 = Group::lattice(2);
  Window W = z2->ball(1);
  ApproxHom sigma = ApproxHom::from_action(z2, ActionSpec::torus(4), W, 6);
  std::stringstream buf;
  dump_approx_hom(sigma, buf);
  ApproxHom loaded = load_approx_hom(buf, 6);
  CHECK(loaded.degree() == sigma.degree());
  CHECK(loaded.group()->same_as(*sigma.group()));
  REQUIRE(loaded.window().size() == sigma.window().size());
  for (size_t i = 0; i < W.size(); ++i) {
    CHECK(loaded.window()[i] == sigma.window()[i]);
    CHECK(loaded.stored_image(i) == sigma.stored_image(i));
  }
  // evaluation outside the window still works after a reload
  CHECK(loaded.evaluate(Element{{1, 1}}) == sigma.evaluate(Element{{1, 1}}));
}

TEST_CASE("runner determinism and exit semantics") {
  fs::path tmp = fs::temp_directory_path() / "soficlab_test_run";
  fs::remove_all(tmp);
  ExperimentConfig cfg =
      ExperimentConfig::from_json(small_config((tmp / "a").string()));
  RunReport r1 = run_experiment(cfg);
  CHECK(r1.all_pass);

  cfg.output_dir = (tmp / "b").string();
  RunReport r2 = run_experiment(cfg);
  json d1 = r1.deterministic_body();
  json d2 = r2.deterministic_body();
  d1["config"].erase("output_dir");
  d2["config"].erase("output_dir");
  CHECK(d1 == d2);

  CHECK(fs::exists(tmp / "a" / "report.json"));
  CHECK(fs::exists(tmp / "a" / "defect.csv"));
  CHECK(fs::exists(tmp / "a" / "align_trend.csv"));
  CHECK(fs::exists(tmp / "a" / "align_trend.gp"));

  // a construction pair with different IRS statistics fails the run
  json bad = small_config((tmp / "c").string());
  bad["constructions"][1] = json::parse(
      R"({"name": "still", "action": {"kind": "trivial", "degree": "n"}})");
  bad["pipelines"] = json::array({"irs"});
  RunReport r3 = run_experiment(ExperimentConfig::from_json(bad));
  CHECK(!r3.all_pass);
  fs::remove_all(tmp);
}

TEST_CASE("empty pipeline list runs vacuously") {
  fs::path tmp = fs::temp_directory_path() / "soficlab_empty_run";
  fs::remove_all(tmp);
  json j = small_config((tmp / "o").string());
  j["pipelines"] = json::array();
  RunReport r = run_experiment(ExperimentConfig::from_json(j));
  CHECK(r.all_pass);
  CHECK(r.body["stages"].empty());
  fs::remove_all(tmp);
}

TEST_CASE("csv escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
