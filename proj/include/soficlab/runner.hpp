#pragma once

#include <string>

#include "soficlab/config.hpp"

namespace soficlab {

struct RunReport {
  json body;       // schema tag, config echo, per-stage tables
  bool all_pass = true;
  double seconds = 0.0;

  // Deterministic content: the body without the volatile timing fields.
  json deterministic_body() const;
};

// Executes the configured pipelines, writing CSV tables, gnuplot data and
// a JSON summary under the config's output directory.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace soficlab
