#include "effbench/effbench.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "effbench/error.hpp"
#include "effbench/report.hpp"
#include "effbench/synth.hpp"

struct eb_config {
  effbench::RunConfig config;
  std::string output_dir;
  std::string json;
};

struct eb_result {
  effbench::PipelineResult result;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& message) {
  last_error = message;
  return code;
}

template <typename F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return EB_OK;
  } catch (const effbench::Error& e) {
    if (effbench::is_convergence_error(e.code())) return fail(EB_ERR_CONVERGENCE, e.what());
    if (effbench::is_validation_error(e.code())) return fail(EB_ERR_VALIDATION, e.what());
    return fail(EB_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(EB_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EB_ERR_INTERNAL, "unknown error");
  }
}

int null_arg(const char* what) { return fail(EB_ERR_VALIDATION, std::string("null argument: ") + what); }

void refresh(eb_config* c) {
  c->output_dir = c->config.output_dir.string();
  c->json = effbench::config_to_json(c->config);
}

effbench::Stage to_stage(eb_stage s) {
  switch (s) {
    case EB_STAGE_DESCRIBE: return effbench::Stage::Describe;
    case EB_STAGE_SFA: return effbench::Stage::Sfa;
    case EB_STAGE_DEA: return effbench::Stage::Dea;
    case EB_STAGE_SECOND_STAGE: return effbench::Stage::SecondStage;
    case EB_STAGE_PIPELINE: return effbench::Stage::Pipeline;
  }
  throw effbench::Error(effbench::ErrorCode::InvalidArgument, "unknown stage");
}

}  // namespace

extern "C" {

const char* eb_version(void) { return "0.1.0"; }

const char* eb_last_error(void) { return last_error.c_str(); }

int eb_config_load(const char* path, eb_config** out) {
  if (!path || !out) return null_arg("path/out");
  *out = nullptr;
  return guarded([&] {
    auto* c = new eb_config{effbench::load_config(path), {}, {}};
    refresh(c);
    *out = c;
  });
}

int eb_config_parse(const char* json, const char* base_dir, eb_config** out) {
  if (!json || !out) return null_arg("json/out");
  *out = nullptr;
  return guarded([&] {
    auto* c = new eb_config{effbench::parse_config(json, base_dir ? base_dir : ""), {}, {}};
    refresh(c);
    *out = c;
  });
}

void eb_config_free(eb_config* config) { delete config; }

int eb_config_set_seed(eb_config* config, uint64_t seed) {
  if (!config) return null_arg("config");
  return guarded([&] {
    config->config.seed = seed;
    config->config.sfa.seed = seed;
    config->config.simar_wilson.seed = seed;
    refresh(config);
  });
}

int eb_config_set_bootstrap(eb_config* config, int l1, int l2) {
  if (!config) return null_arg("config");
  return guarded([&] {
    effbench::RunConfig next = config->config;
    if (l1 >= 0) next.simar_wilson.l1 = l1;
    if (l2 >= 0) next.simar_wilson.l2 = l2;
    next.validate();
    config->config = std::move(next);
    refresh(config);
  });
}

int eb_config_set_threads(eb_config* config, unsigned threads) {
  if (!config) return null_arg("config");
  return guarded([&] {
    const unsigned t = threads == 0 ? 1 : threads;
    config->config.simar_wilson.threads = t;
    config->config.sfa.threads = t;
    refresh(config);
  });
}

int eb_config_set_decimal_comma(eb_config* config, int enabled) {
  if (!config) return null_arg("config");
  return guarded([&] {
    config->config.decimal_comma = enabled != 0;
    refresh(config);
  });
}

int eb_config_set_output_dir(eb_config* config, const char* dir) {
  if (!config || !dir) return null_arg("config/dir");
  return guarded([&] {
    config->config.output_dir = dir;
    refresh(config);
  });
}

const char* eb_config_output_dir(const eb_config* config) { return config ? config->output_dir.c_str() : nullptr; }

const char* eb_config_json(const eb_config* config) { return config ? config->json.c_str() : nullptr; }

int eb_run(const eb_config* config, enum eb_stage stage, eb_result** out) {
  if (!config || !out) return null_arg("config/out");
  *out = nullptr;
  return guarded([&] { *out = new eb_result{effbench::run_stage(config->config, to_stage(stage))}; });
}

void eb_result_free(eb_result* result) { delete result; }

size_t eb_result_artifact_count(const eb_result* result) { return result ? result->result.artifacts.size() : 0; }

const char* eb_result_artifact_name(const eb_result* result, size_t index) {
  if (!result || index >= result->result.artifacts.size()) return nullptr;
  return result->result.artifacts[index].name.c_str();
}

const char* eb_result_artifact_content(const eb_result* result, size_t index) {
  if (!result || index >= result->result.artifacts.size()) return nullptr;
  return result->result.artifacts[index].content.c_str();
}

int eb_result_summary(const eb_result* result, eb_summary* out) {
  if (!result || !out) return null_arg("result/out");
  return guarded([&] {
    const auto& r = result->result;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    eb_summary s{r.panel.n_dmus(), r.panel.n_periods(), nan, nan, nan, 0, nan};
    if (r.sfa_scores) s.mean_sfa_te = r.sfa_scores->overall_mean();
    if (r.sfa) s.sfa_eta = r.sfa->params.eta;
    if (r.dea_scores) s.mean_dea_score = r.dea_scores->overall_mean();
    if (r.dea) {
      for (const auto& cell : r.dea->cells) s.n_dea_efficient += cell.is_efficient ? 1 : 0;
    }
    if (r.score_correlation) s.score_correlation = *r.score_correlation;
    *out = s;
  });
}

int eb_result_write(const eb_result* result, const char* dir) {
  if (!result || !dir) return null_arg("result/dir");
  return guarded([&] { effbench::write_bundle(result->result.artifacts, dir); });
}

int eb_synth_aena(uint64_t seed, const char* dir) {
  if (!dir) return null_arg("dir");
  return guarded([&] {
    effbench::AenaSpec spec;
    spec.seed = seed;
    effbench::write_bundle(effbench::aena_bundle(effbench::gen_aena_sample(spec), seed), dir);
  });
}

}  // extern "C"
