#ifndef GENREL_CONFIG_HPP
#define GENREL_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "core/estimators.hpp"
#include "core/learners.hpp"
#include "core/link.hpp"
#include "core/simulation.hpp"

namespace genrel {

// Everything a run needs: data source (file or DGP), learners, links and
// run-level settings. Populated from defaults, then a config file or preset,
// then individual key overrides; unknown keys are errors.
struct RunConfig {
  std::optional<std::string> data_path;
  std::optional<DgpSpec> dgp;
  LearnerSpec learner_m;
  LearnerSpec learner_h;
  Link g1, g2;
  Target target = Target::covariance;
  Method method = Method::crossfit;
  VarianceVariant variance_variant = VarianceVariant::proposition2;
  double alpha = 0.05;
  std::uint64_t seed = 1729;
  long reps = 500;
  long draws = 1'000'000;
  std::optional<std::string> out_path;
};

// Sectioned key = value text, strict: unknown sections, keys or malformed
// values are ConfigError.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);
void apply_config_file(RunConfig& config, const std::string& path);

// Set one key using its dotted name, e.g. "run.alpha" or "learner_m.kind".
void set_config_key(RunConfig& config, const std::string& dotted_key, const std::string& value);

// Desk-scale presets mirroring the study configurations.
bool is_preset(const std::string& name);
void apply_preset(RunConfig& config, const std::string& name);
std::vector<std::string> preset_names();

// Loads `source` as a config file path, or as a preset name when no such
// file exists.
void load_config_or_preset(RunConfig& config, const std::string& source);

EstimatorConfig estimator_config(const RunConfig& config);

}  // namespace genrel

#endif
