// Command-line front end over the effbench C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "effbench/effbench.h"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> l1;
  std::optional<int> l2;
  std::optional<unsigned> threads;
  bool decimal_comma = false;
  std::string out;
  bool quiet = false;
};

int report_failure(int code) {
  std::fprintf(stderr, "effbench: %s\n", eb_last_error());
  return code;
}

void print_number(const char* label, double v) {
  if (std::isfinite(v)) std::printf("%-22s %.4f\n", label, v);
}

int run(const RunArgs& a, eb_stage stage) {
  eb_config* cfg = nullptr;
  int rc = eb_config_load(a.config.c_str(), &cfg);
  if (rc != EB_OK) return report_failure(rc);
  if (rc == EB_OK && a.seed) rc = eb_config_set_seed(cfg, *a.seed);
  if (rc == EB_OK && (a.l1 || a.l2)) rc = eb_config_set_bootstrap(cfg, a.l1.value_or(-1), a.l2.value_or(-1));
  if (rc == EB_OK && a.threads) rc = eb_config_set_threads(cfg, *a.threads);
  if (rc == EB_OK && a.decimal_comma) rc = eb_config_set_decimal_comma(cfg, 1);
  if (rc == EB_OK && !a.out.empty()) rc = eb_config_set_output_dir(cfg, a.out.c_str());
  if (rc != EB_OK) {
    eb_config_free(cfg);
    return report_failure(rc);
  }

  eb_result* res = nullptr;
  rc = eb_run(cfg, stage, &res);
  const std::string out_dir = eb_config_output_dir(cfg);
  eb_config_free(cfg);
  if (rc != EB_OK) return report_failure(rc);

  rc = eb_result_write(res, out_dir.c_str());
  if (rc != EB_OK) {
    eb_result_free(res);
    return report_failure(rc);
  }

  if (!a.quiet) {
    const size_t n = eb_result_artifact_count(res);
    if (stage != EB_STAGE_PIPELINE) {
      for (size_t i = 0; i < n; ++i) {
        const std::string name = eb_result_artifact_name(res, i);
        if (name.size() > 4 && name.compare(name.size() - 4, 4, ".txt") == 0 &&
            name.find("_bars") == std::string::npos) {
          std::printf("%s\n", eb_result_artifact_content(res, i));
        }
      }
    }
    eb_summary s;
    if (eb_result_summary(res, &s) == EB_OK) {
      std::printf("%-22s %zu x %zu\n", "panel", s.n_dmus, s.n_periods);
      print_number("mean SFA TE", s.mean_sfa_te);
      print_number("SFA eta", s.sfa_eta);
      print_number("mean DEA score", s.mean_dea_score);
      if (std::isfinite(s.mean_dea_score)) std::printf("%-22s %zu\n", "DEA efficient cells", s.n_dea_efficient);
      print_number("SFA-DEA correlation", s.score_correlation);
    }
    std::printf("%-22s %zu files in %s\n", "wrote", n, out_dir.c_str());
  }
  eb_result_free(res);
  return EB_OK;
}

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("-c,--config", a.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "RNG seed for SFA starts and the bootstrap");
  cmd->add_option("--l1", a.l1, "Bias-correction replicates (Simar-Wilson algorithm 2)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--l2", a.l2, "Confidence-interval replicates")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", a.threads, "Worker threads for DEA and the bootstrap");
  cmd->add_flag("--decimal-comma", a.decimal_comma, "Read ';'-separated CSV with ',' decimals; print ',' decimals");
  cmd->add_option("-o,--out", a.out, "Output directory (overrides the configuration)");
  cmd->add_flag("-q,--quiet", a.quiet, "Print nothing on success");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Airport efficiency benchmarking: SFA, DEA and second-stage regressions"};
  app.set_version_flag("--version", eb_version());
  app.require_subcommand(1);

  RunArgs args;
  struct Cmd {
    const char* name;
    const char* help;
    eb_stage stage;
  };
  const Cmd cmds[] = {
      {"describe", "Descriptive statistics and correlations of the frontier variables", EB_STAGE_DESCRIBE},
      {"sfa", "Translog output distance function with time-varying inefficiency", EB_STAGE_SFA},
      {"dea", "Output-oriented DEA scores per period", EB_STAGE_DEA},
      {"second-stage", "Tobit on SFA efficiency and Simar-Wilson on DEA efficiency", EB_STAGE_SECOND_STAGE},
      {"pipeline", "Every enabled stage plus the comparison tables", EB_STAGE_PIPELINE},
  };
  std::optional<eb_stage> chosen;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_run_options(sub, args);
    sub->callback([&chosen, stage = c.stage] { chosen = stage; });
  }

  std::uint64_t synth_seed = 2014;
  std::string synth_out;
  bool synth_cmd = false;
  auto* synth = app.add_subcommand("synth", "Write the synthetic airport sample and its configuration");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->callback([&synth_cmd] { synth_cmd = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : EB_ERR_VALIDATION;
  }

  if (synth_cmd) {
    const int rc = eb_synth_aena(synth_seed, synth_out.c_str());
    if (rc != EB_OK) return report_failure(rc);
    std::printf("wrote synthetic sample (seed %llu) to %s\n", static_cast<unsigned long long>(synth_seed),
                synth_out.c_str());
    return EB_OK;
  }
  return run(args, *chosen);
}
