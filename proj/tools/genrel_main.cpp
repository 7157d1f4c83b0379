// genrel command line: estimate genetic covariance/correlation from a trait
// table, run the Monte Carlo lab, or query the truth oracle. Everything goes
// through the C API of the shared library.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genrel/genrel.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRunError = 2;

struct OptionsDeleter {
  void operator()(genrel_options* o) const { genrel_options_free(o); }
};
struct DatasetDeleter {
  void operator()(genrel_dataset* d) const { genrel_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(genrel_report* r) const { genrel_report_free(r); }
};
struct TableDeleter {
  void operator()(genrel_mc_table* t) const { genrel_mc_table_free(t); }
};

using OptionsPtr = std::unique_ptr<genrel_options, OptionsDeleter>;

int fail(genrel_status status) {
  std::fprintf(stderr, "error: %s: %s\n", genrel_status_name(status), genrel_last_error());
  return kExitRunError;
}

#define CHECK(call)                         \
  do {                                      \
    const genrel_status s_ = (call);        \
    if (s_ != GENREL_OK) return fail(s_);   \
  } while (0)

struct CommonFlags {
  std::string config, data, learner_m, learner_h, link1, link2, target, method, out;
  std::string alpha, seed, reps, draws;

  void attach(CLI::App* app, bool with_reps, bool with_draws) {
    app->add_option("--config", config, "config file path or preset name");
    app->add_option("--data", data, "CSV trait table (columns x1..xp, y, z, t_y, t_z)");
    app->add_option("--learner-m", learner_m, "learner for m(X): lasso|ridge|mlp|oracle|constant");
    app->add_option("--learner-h", learner_h, "learner for h(X)");
    app->add_option("--link1", link1, "link g1: identity|logit");
    app->add_option("--link2", link2, "link g2: identity|logit");
    app->add_option("--target", target, "covariance|correlation");
    app->add_option("--method", method, "crossfit|fullsample|naive");
    app->add_option("--alpha", alpha, "confidence level is 1 - alpha (default 0.05)");
    app->add_option("--seed", seed, "base seed");
    if (with_reps) app->add_option("--reps", reps, "Monte Carlo replications");
    if (with_draws) app->add_option("--draws", draws, "oracle draws (default 1e6)");
    app->add_option("--out", out, "write the structured report here");
  }

  genrel_status apply(genrel_options* options) const {
    struct KV {
      const char* key;
      const std::string& value;
    };
    const KV pairs[] = {
        {"data.path", data},       {"learner_m.kind", learner_m},
        {"learner_h.kind", learner_h}, {"links.g1", link1},
        {"links.g2", link2},       {"run.target", target},
        {"run.method", method},    {"run.alpha", alpha},
        {"run.seed", seed},        {"run.reps", reps},
        {"run.draws", draws},      {"run.out", out},
    };
    if (!config.empty()) {
      if (const genrel_status s = genrel_options_load(options, config.c_str())) return s;
    }
    for (const KV& kv : pairs) {
      if (kv.value.empty()) continue;
      if (const genrel_status s = genrel_options_set(options, kv.key, kv.value.c_str())) {
        return s;
      }
    }
    return GENREL_OK;
  }
};

int run_estimate(const CommonFlags& flags) {
  OptionsPtr options;
  {
    genrel_options* raw = nullptr;
    CHECK(genrel_options_create(&raw));
    options.reset(raw);
  }
  CHECK(flags.apply(options.get()));

  std::unique_ptr<genrel_dataset, DatasetDeleter> dataset;
  {
    genrel_dataset* raw = nullptr;
    CHECK(genrel_load_data(options.get(), &raw));
    dataset.reset(raw);
  }

  const char* method = flags.method.empty() ? "crossfit" : flags.method.c_str();
  if (std::string(method) == "crossfit") {
    std::unique_ptr<genrel_report, ReportDeleter> report;
    genrel_report* raw = nullptr;
    CHECK(genrel_estimate(dataset.get(), options.get(), &raw));
    report.reset(raw);
    std::printf("%s\n", genrel_report_summary(report.get()));
    if (const char* out = genrel_options_out_path(options.get())) {
      CHECK(genrel_report_write(report.get(), out));
    }
    return 0;
  }
  double point = 0.0;
  CHECK(genrel_estimate_point(dataset.get(), options.get(), method, &point));
  std::printf("I = %.12g (point estimate only; %s has no standard error)\n", point, method);
  return 0;
}

int run_simulate(const CommonFlags& flags) {
  OptionsPtr options;
  {
    genrel_options* raw = nullptr;
    CHECK(genrel_options_create(&raw));
    options.reset(raw);
  }
  CHECK(flags.apply(options.get()));

  std::unique_ptr<genrel_mc_table, TableDeleter> table;
  {
    genrel_mc_table* raw = nullptr;
    CHECK(genrel_simulate(options.get(), &raw));
    table.reset(raw);
  }
  std::printf("%s", genrel_mc_table_text(table.get()));
  if (const char* out = genrel_options_out_path(options.get())) {
    CHECK(genrel_mc_table_write(table.get(), out));
  }
  return 0;
}

int run_oracle(const CommonFlags& flags) {
  OptionsPtr options;
  {
    genrel_options* raw = nullptr;
    CHECK(genrel_options_create(&raw));
    options.reset(raw);
  }
  CHECK(flags.apply(options.get()));

  double truth = 0.0, mc_se = 0.0;
  CHECK(genrel_oracle(options.get(), 0, &truth, &mc_se));
  std::printf("truth = %.12g +/- %.12g (mc standard error)\n", truth, mc_se);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genrel: semiparametric genetic covariance and correlation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", genrel_version());

  CommonFlags estimate_flags, simulate_flags, oracle_flags;
  CLI::App* estimate = app.add_subcommand("estimate", "estimate from a dataset");
  estimate_flags.attach(estimate, false, false);
  CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo study");
  simulate_flags.attach(simulate, true, false);
  CLI::App* oracle = app.add_subcommand("oracle", "Monte Carlo truth for a DGP");
  oracle_flags.attach(oracle, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (estimate->parsed()) return run_estimate(estimate_flags);
  if (simulate->parsed()) return run_simulate(simulate_flags);
  if (oracle->parsed()) return run_oracle(oracle_flags);
  return kExitUsage;
}
