#include "effbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "effbench/error.hpp"

namespace effbench {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::InvalidArgument, "config: " + what); }

Role parse_role(const std::string& s) {
  if (s == "output") return Role::Output;
  if (s == "input") return Role::Input;
  if (s == "covariate") return Role::Covariate;
  bad_config("unknown role '" + s + "'");
}

CovariateKind parse_kind(const std::string& s) {
  if (s == "continuous") return CovariateKind::Continuous;
  if (s == "dummy") return CovariateKind::Dummy;
  if (s == "count") return CovariateKind::Count;
  bad_config("unknown covariate kind '" + s + "'");
}

std::string role_name(Role r) { return std::string(to_string(r)); }

std::vector<VariableSpec> parse_variables(const json& arr, Role default_role) {
  std::vector<VariableSpec> out;
  for (const auto& v : arr) {
    VariableSpec spec;
    if (v.is_string()) {
      spec.column = v.get<std::string>();
      spec.role = default_role;
    } else {
      spec.column = v.at("column").get<std::string>();
      spec.role = v.contains("role") ? parse_role(v["role"].get<std::string>()) : default_role;
      spec.units = v.value("units", "");
      spec.deflate = v.value("deflate", false);
      if (v.contains("kind")) spec.kind = parse_kind(v["kind"].get<std::string>());
      if (v.contains("lower")) spec.lower = v["lower"].get<double>();
      if (v.contains("upper")) spec.upper = v["upper"].get<double>();
    }
    out.push_back(std::move(spec));
  }
  return out;
}

json variables_to_json(const std::vector<VariableSpec>& vars) {
  json arr = json::array();
  for (const auto& v : vars) {
    json j = {{"column", v.column}, {"role", role_name(v.role)}};
    if (!v.units.empty()) j["units"] = v.units;
    if (v.deflate) j["deflate"] = true;
    if (v.kind != CovariateKind::Continuous) j["kind"] = std::string(to_string(v.kind));
    if (v.lower) j["lower"] = *v.lower;
    if (v.upper) j["upper"] = *v.upper;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string cell_machine(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  return std::isfinite(v) ? format_full(v) : "NA";
}

std::string cell_human(const Cell& c, bool decimal_comma) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_human(std::get<double>(c), decimal_comma);
}

std::string stars_text(int stars) { return std::string(static_cast<std::size_t>(std::max(0, stars)), '*'); }

std::string csv_text(const Table& t) { return to_csv(to_machine(t)); }

template <typename F>
auto in_module(std::string_view module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(module) + ": " + e.detail());
  }
}

void add_table(std::vector<Artifact>& out, const std::string& stem, const Table& t, bool decimal_comma) {
  out.push_back({stem + ".csv", csv_text(t)});
  out.push_back({stem + ".txt", to_human(t, decimal_comma)});
}

void add_ranking(std::vector<Artifact>& out, const std::string& stem, const ScoreTable& scores,
                 const std::string& method, bool decimal_comma) {
  const std::size_t last = scores.periods.size() - 1;
  const auto ranking = rank_report(scores, last);
  const std::string title = "Ranking by " + method + " in " + std::to_string(scores.periods[last]);
  add_table(out, stem, ranking_table(ranking, title), decimal_comma);
  out.push_back({stem + ".dat", ranking_dat(ranking)});
  out.push_back({stem + "_bars.txt", title + "\n" + ranking_bars(ranking, decimal_comma)});
}

std::vector<std::string> determinant_names(const RunConfig& c, const PanelDataset& panel) {
  std::vector<std::string> names = c.determinants;
  if (c.time_dummies) {
    for (std::size_t t = 0; t + 1 < panel.n_periods(); ++t) {
      const int yy = ((panel.periods()[t] % 100) + 100) % 100;
      names.push_back((yy < 10 ? "T0" : "T") + std::to_string(yy));
    }
  }
  return names;
}

std::vector<std::string> frontier_variables(const FrontierSpec& f) {
  std::vector<std::string> names = f.outputs;
  names.insert(names.end(), f.inputs.begin(), f.inputs.end());
  return names;
}

}  // namespace

// ---- configuration ----------------------------------------------------------

void RunConfig::validate() const {
  if (panel_csv.empty()) bad_config("'panel' is required");
  if (!(methods.sfa || methods.dea || methods.tobit || methods.simar_wilson)) {
    bad_config("at least one method must be enabled");
  }
  if (methods.tobit && !methods.sfa) bad_config("tobit needs the sfa method");
  if (methods.simar_wilson && !methods.dea) bad_config("simar_wilson needs the dea method");
  if (frontier.outputs.empty() || frontier.inputs.empty()) bad_config("frontier needs outputs and inputs");
  if ((methods.tobit || methods.simar_wilson) && determinants.empty() && !time_dummies) {
    bad_config("second stage needs determinants");
  }
  if (methods.simar_wilson && (simar_wilson.l2 > 0 || simar_wilson.l1 > 0) && !seed) {
    bad_config("a seed is required when the bootstrap is enabled");
  }
  if (simar_wilson.l1 < 0 || simar_wilson.l2 < 0) bad_config("bootstrap sizes must be non-negative");
  if (!(simar_wilson.level > 0.0 && simar_wilson.level < 1.0)) bad_config("level must be in (0, 1)");
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad_config(std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  try {
    c.panel_csv = j.at("panel").get<std::string>();
    c.covariate_csv = j.value("covariate_file", "");
    c.price_index_csv = j.value("price_index", "");
    c.output_dir = j.value("output_dir", "effbench_out");
    if (j.contains("base_year")) c.base_year = j["base_year"].get<int>();
    c.panel_schema.id_column = j.value("id_column", "dmu");
    c.panel_schema.period_column = j.value("period_column", "year");
    c.panel_schema.variables = parse_variables(j.at("variables"), Role::Covariate);
    if (j.contains("covariate_variables")) {
      c.covariate_variables = parse_variables(j["covariate_variables"], Role::Covariate);
    }
    const auto& f = j.at("frontier");
    c.frontier.outputs = f.at("outputs").get<std::vector<std::string>>();
    c.frontier.inputs = f.at("inputs").get<std::vector<std::string>>();
    c.frontier.normalizing_output = f.value("normalizing_output", c.frontier.outputs.back());
    const std::string rts = f.value("returns_to_scale", "variable");
    if (rts == "variable") {
      c.frontier.returns_to_scale = ReturnsToScale::Variable;
    } else if (rts == "constant") {
      c.frontier.returns_to_scale = ReturnsToScale::Constant;
    } else {
      bad_config("returns_to_scale must be 'variable' or 'constant'");
    }
    c.determinants = j.value("determinants", std::vector<std::string>{});
    c.time_dummies = j.value("time_dummies", true);
    if (j.contains("methods")) {
      const auto& m = j["methods"];
      c.methods.sfa = m.value("sfa", true);
      c.methods.dea = m.value("dea", true);
      c.methods.tobit = m.value("tobit", true);
      c.methods.simar_wilson = m.value("simar_wilson", true);
    }
    if (j.contains("sfa")) {
      const auto& s = j["sfa"];
      const std::string dist = s.value("distribution", "truncated-normal");
      if (dist == "half-normal") {
        c.sfa.half_normal = true;
      } else if (dist != "truncated-normal") {
        bad_config("sfa.distribution must be 'half-normal' or 'truncated-normal'");
      }
      c.sfa.starts = s.value("starts", c.sfa.starts);
      c.sfa.max_iterations = s.value("max_iterations", c.sfa.max_iterations);
    }
    if (j.contains("tobit")) c.tobit.cluster = j["tobit"].value("cluster", false);
    if (j.contains("simar_wilson")) {
      const auto& s = j["simar_wilson"];
      const int alg = s.value("algorithm", 2);
      if (alg != 1 && alg != 2) bad_config("simar_wilson.algorithm must be 1 or 2");
      c.simar_wilson.algorithm = alg == 1 ? SwAlgorithm::Alg1 : SwAlgorithm::Alg2;
      c.simar_wilson.l1 = s.value("l1", c.simar_wilson.l1);
      c.simar_wilson.l2 = s.value("l2", c.simar_wilson.l2);
      c.simar_wilson.level = s.value("level", c.simar_wilson.level);
      c.simar_wilson.threads = s.value("threads", c.simar_wilson.threads);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.decimal_comma = j.value("decimal_comma", false);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  if (c.seed) {
    c.sfa.seed = *c.seed;
    c.simar_wilson.seed = *c.seed;
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["panel"] = c.panel_csv.generic_string();
  if (!c.covariate_csv.empty()) j["covariate_file"] = c.covariate_csv.generic_string();
  if (!c.price_index_csv.empty()) j["price_index"] = c.price_index_csv.generic_string();
  if (c.base_year) j["base_year"] = *c.base_year;
  j["output_dir"] = c.output_dir.generic_string();
  j["id_column"] = c.panel_schema.id_column;
  j["period_column"] = c.panel_schema.period_column;
  j["variables"] = variables_to_json(c.panel_schema.variables);
  if (!c.covariate_variables.empty()) j["covariate_variables"] = variables_to_json(c.covariate_variables);
  j["frontier"] = {{"outputs", c.frontier.outputs},
                   {"inputs", c.frontier.inputs},
                   {"normalizing_output", c.frontier.normalizing_output},
                   {"returns_to_scale", c.frontier.returns_to_scale == ReturnsToScale::Variable ? "variable" : "constant"}};
  j["determinants"] = c.determinants;
  j["time_dummies"] = c.time_dummies;
  j["methods"] = {{"sfa", c.methods.sfa},
                  {"dea", c.methods.dea},
                  {"tobit", c.methods.tobit},
                  {"simar_wilson", c.methods.simar_wilson}};
  j["sfa"] = {{"distribution", c.sfa.half_normal ? "half-normal" : "truncated-normal"},
              {"starts", c.sfa.starts},
              {"max_iterations", c.sfa.max_iterations}};
  j["tobit"] = {{"cluster", c.tobit.cluster}};
  j["simar_wilson"] = {{"algorithm", c.simar_wilson.algorithm == SwAlgorithm::Alg1 ? 1 : 2},
                       {"l1", c.simar_wilson.l1},
                       {"l2", c.simar_wilson.l2},
                       {"level", c.simar_wilson.level},
                       {"threads", c.simar_wilson.threads}};
  if (c.seed) j["seed"] = *c.seed;
  j["decimal_comma"] = c.decimal_comma;
  return j.dump(2) + "\n";
}

// ---- tables -----------------------------------------------------------------

std::string format_human(double value, bool decimal_comma) {
  if (!std::isfinite(value)) return "NA";
  std::string s = format_fixed(value, 3);
  if (s == "-0.000") s = "0.000";
  if (decimal_comma) std::replace(s.begin(), s.end(), '.', ',');
  return s;
}

CsvTable to_machine(const Table& t) {
  CsvTable out;
  out.header = t.header;
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(cell_machine(c));
    out.rows.push_back(std::move(cells));
  }
  return out;
}

std::string to_human(const Table& t, bool decimal_comma) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back(t.header);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(cell_human(c, decimal_comma));
    grid.push_back(std::move(cells));
  }
  std::vector<std::size_t> width(t.header.size(), 0);
  for (const auto& row : grid) {
    for (std::size_t j = 0; j < row.size() && j < width.size(); ++j) width[j] = std::max(width[j], row[j].size());
  }
  std::string out;
  if (!t.title.empty()) out += t.title + "\n\n";
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string line;
    for (std::size_t j = 0; j < grid[r].size() && j < width.size(); ++j) {
      const std::string& cell = grid[r][j];
      const std::string pad(width[j] - cell.size(), ' ');
      if (j > 0) line += "  ";
      line += j == 0 ? cell + pad : pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
    }
  }
  for (const auto& n : t.notes) out += n + "\n";
  return out;
}

Table describe_table(const DescriptiveStats& stats, std::string title) {
  Table t{std::move(title), {"variable", "n", "mean", "std_dev", "min", "max"}, {}, {}};
  for (const auto& v : stats.variables) {
    t.rows.push_back({v.name, std::to_string(v.n), v.mean, v.std_dev, v.min, v.max});
  }
  return t;
}

Table correlation_table(const CorrelationMatrix& corr) {
  Table t{"Pearson correlation", {"variable"}, {}, {}};
  for (const auto& n : corr.names) t.header.push_back(n);
  for (std::size_t i = 0; i < corr.names.size(); ++i) {
    std::vector<Cell> row{corr.names[i]};
    for (std::size_t j = 0; j < corr.names.size(); ++j) {
      row.emplace_back(corr.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table sfa_coefficient_table(const SfaFit& fit) {
  Table t{"Stochastic frontier (translog output distance function)", {"parameter", "estimate", "std_error", "stars"},
          {}, {}};
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    t.rows.push_back({fit.names[j], fit.estimates[k], fit.std_errors[k],
                      stars_text(stars_from_z(fit.estimates[k], fit.std_errors[k]))});
  }
  t.notes.push_back("");
  t.notes.push_back("log-likelihood " + format_human(fit.log_likelihood) + ", observations " +
                    std::to_string(fit.n_obs) + ", iterations " + std::to_string(fit.convergence.iterations));
  t.notes.push_back("*, ** and *** denote significance at 10%, 5% and 1%.");
  return t;
}

Table score_table(const ScoreTable& s, std::string title) {
  Table t{std::move(title), {"dmu"}, {}, {}};
  for (int p : s.periods) t.header.push_back(std::to_string(p));
  t.header.push_back("Mean");
  t.header.push_back("%Var");
  for (std::size_t i = 0; i < s.dmus.size(); ++i) {
    std::vector<Cell> row{s.dmus[i]};
    for (std::size_t p = 0; p < s.periods.size(); ++p) row.emplace_back(s.at(i, p));
    row.emplace_back(s.dmu_mean(i));
    row.emplace_back(s.pct_var(i));
    t.rows.push_back(std::move(row));
  }
  std::vector<Cell> avg{std::string("Average")};
  for (std::size_t p = 0; p < s.periods.size(); ++p) avg.emplace_back(s.period_mean(p));
  avg.emplace_back(s.overall_mean());
  avg.emplace_back(s.mean_pct_var());
  t.rows.push_back(std::move(avg));
  return t;
}

Table determinants_table(const DeterminantsTable& d) {
  Table t{"Second stage regression", {"variable"}, {}, {}};
  for (const auto& c : d.columns) {
    t.header.push_back(c.title);
    t.header.push_back("");
  }
  for (std::size_t i = 0; i < d.names.size(); ++i) {
    std::vector<Cell> row{d.names[i]};
    for (const auto& c : d.columns) {
      row.emplace_back(c.estimates[i]);
      row.emplace_back(stars_text(c.stars[i]));
    }
    t.rows.push_back(std::move(row));
  }
  t.notes.push_back("");
  t.notes.push_back("*, ** and *** denote significance at 10%, 5% and 1%.");
  return t;
}

Table tobit_table(const TobitFit& fit) {
  Table t{"Two-limit Tobit on SFA efficiency", {"variable", "estimate", "std_error", "stars"}, {}, {}};
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    t.rows.push_back({fit.names[j], fit.beta[k], fit.std_errors[k],
                      stars_text(stars_from_z(fit.beta[k], fit.std_errors[k]))});
  }
  const auto k = static_cast<Eigen::Index>(fit.names.size());
  t.rows.push_back({std::string("sigma"), fit.sigma, fit.std_errors[k], std::string()});
  t.notes.push_back("");
  t.notes.push_back("log-likelihood " + format_human(fit.log_likelihood) + "; censored at 0: " +
                    std::to_string(fit.n_lower) + ", at 1: " + std::to_string(fit.n_upper) + ", uncensored: " +
                    std::to_string(fit.n_uncensored) + (fit.clustered ? "; DMU-clustered errors" : ""));
  return t;
}

Table simar_wilson_table(const SimarWilsonFit& fit) {
  const std::string pct = format_fixed(fit.level * 100.0, 0);
  Table t{"Simar-Wilson truncated regression on DEA efficiency",
          {"variable", "estimate", "bootstrap_se", "ci_lower_" + pct, "ci_upper_" + pct, "stars"},
          {},
          {}};
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    t.rows.push_back({fit.names[j], fit.delta[k], fit.bootstrap_se[k], fit.ci[j].lower, fit.ci[j].upper,
                      stars_text(fit.stars[j])});
  }
  t.rows.push_back({std::string("sigma"), fit.sigma, std::nan(""), std::nan(""), std::nan(""), std::string()});
  t.notes.push_back("");
  t.notes.push_back(std::string("Algorithm ") + (fit.algorithm == SwAlgorithm::Alg1 ? "1" : "2") + ", L1 = " +
                    std::to_string(fit.l1) + ", L2 = " + std::to_string(fit.l2) + ", seed " +
                    std::to_string(fit.seed) + ", observations " + std::to_string(fit.n_obs) +
                    ", failed replicates " + std::to_string(fit.failed_replicates));
  return t;
}

// ---- rankings ---------------------------------------------------------------

std::vector<RankEntry> rank_report(const std::vector<std::string>& dmus, const std::vector<double>& scores) {
  if (dmus.size() != scores.size()) throw Error(ErrorCode::InvalidArgument, "ranking needs one score per DMU");
  std::vector<std::size_t> idx(dmus.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return dmus[a] < dmus[b];
  });
  std::vector<RankEntry> out;
  for (std::size_t r = 0; r < idx.size(); ++r) out.push_back({r + 1, dmus[idx[r]], scores[idx[r]]});
  return out;
}

std::vector<RankEntry> rank_report(const ScoreTable& s, std::size_t period) {
  if (period >= s.periods.size()) throw Error(ErrorCode::InvalidArgument, "period index out of range");
  std::vector<double> col(s.dmus.size());
  for (std::size_t i = 0; i < col.size(); ++i) col[i] = s.at(i, period);
  return rank_report(s.dmus, col);
}

Table ranking_table(const std::vector<RankEntry>& ranking, std::string title) {
  Table t{std::move(title), {"rank", "dmu", "score"}, {}, {}};
  for (const auto& e : ranking) t.rows.push_back({std::to_string(e.rank), e.dmu, e.score});
  return t;
}

std::string ranking_dat(const std::vector<RankEntry>& ranking) {
  std::string out = "# rank score dmu\n";
  for (const auto& e : ranking) out += std::to_string(e.rank) + " " + format_full(e.score) + " " + e.dmu + "\n";
  return out;
}

std::string ranking_bars(const std::vector<RankEntry>& ranking, bool decimal_comma, int width) {
  std::size_t label = 0;
  for (const auto& e : ranking) label = std::max(label, e.dmu.size());
  std::string out;
  for (const auto& e : ranking) {
    const auto n = static_cast<std::size_t>(std::lround(std::clamp(e.score, 0.0, 1.0) * width));
    out += e.dmu + std::string(label - e.dmu.size(), ' ') + " |" + std::string(n, '#') +
           std::string(static_cast<std::size_t>(width) - n, ' ') + "| " + format_human(e.score, decimal_comma) + "\n";
  }
  return out;
}

// ---- pipeline ---------------------------------------------------------------

PanelDataset load_run_panel(const RunConfig& c) {
  return in_module("panel-core", [&] {
    LoadOptions lo;
    lo.decimal_comma = c.decimal_comma;
    lo.base_year = c.base_year;
    if (!c.price_index_csv.empty()) lo.price_index = load_price_index(c.resolve(c.price_index_csv), c.decimal_comma);
    PanelDataset panel = load_panel(c.resolve(c.panel_csv), c.panel_schema, lo);
    if (!c.covariate_csv.empty()) {
      PanelSchema cov_schema = c.panel_schema;
      cov_schema.variables = c.covariate_variables;
      const CsvTable table = read_csv(c.resolve(c.covariate_csv), CsvOptions{c.decimal_comma});
      panel = attach_covariates(panel, table, cov_schema, lo);
    }
    if (c.time_dummies) panel = add_time_dummies(panel);
    c.frontier.validate(panel);
    return panel;
  });
}

PipelineResult run_stage(const RunConfig& c, Stage stage) {
  c.validate();
  PipelineResult res{load_run_panel(c), {}, {}, {}, {}, {}, {}, {}, {}};
  const PanelDataset& panel = res.panel;
  const bool dc = c.decimal_comma;
  auto& out = res.artifacts;
  const bool all = stage == Stage::Pipeline;

  if (stage == Stage::Describe || all) {
    in_module("panel-core", [&] {
      const auto vars = frontier_variables(c.frontier);
      add_table(out, "describe", describe_table(describe(panel, vars), "Descriptive statistics"), dc);
      add_table(out, "correlation", correlation_table(pearson(panel, vars)), dc);
    });
  }

  const bool second = stage == Stage::SecondStage || all;
  const bool need_sfa = c.methods.sfa && (stage == Stage::Sfa || all || (second && c.methods.tobit));
  const bool need_dea = c.methods.dea && (stage == Stage::Dea || all || (second && c.methods.simar_wilson));
  if ((stage == Stage::Sfa && !c.methods.sfa) || (stage == Stage::Dea && !c.methods.dea) ||
      (stage == Stage::SecondStage && !c.methods.tobit && !c.methods.simar_wilson)) {
    throw Error(ErrorCode::InvalidArgument, "config: the requested method is disabled");
  }

  if (need_sfa) {
    in_module("sfa-engine", [&] {
      const auto design = build_design(panel, c.frontier);
      res.sfa = fit_sfa(design, c.sfa);
      res.sfa_scores = ScoreTable{panel.dmus(), panel.periods(), res.sfa->te};
    });
    if (stage == Stage::Sfa || all) {
      add_table(out, "sfa_coefficients", sfa_coefficient_table(*res.sfa), dc);
      add_table(out, "sfa_te", score_table(*res.sfa_scores, "Technical efficiency (SFA)"), dc);
      add_ranking(out, "ranking_sfa", *res.sfa_scores, "SFA technical efficiency", dc);
    }
  }
  if (need_dea) {
    in_module("dea-engine", [&] {
      DeaOptions opt;
      opt.threads = c.simar_wilson.threads;
      res.dea = dea_all(panel, c.frontier, opt);
      res.dea_scores = res.dea->score_table();
    });
    if (stage == Stage::Dea || all) {
      add_table(out, "dea_scores", score_table(*res.dea_scores, "Technical efficiency (DEA, output-oriented)"), dc);
      add_ranking(out, "ranking_dea", *res.dea_scores, "DEA technical efficiency", dc);
    }
  }
  if (all && res.sfa_scores && res.dea_scores) {
    res.score_correlation = pearson(res.sfa_scores->values, res.dea_scores->values);
    Table t{"Correlation of SFA and DEA efficiency", {"statistic", "value"}, {}, {}};
    t.rows.push_back({std::string("pearson"), *res.score_correlation});
    t.rows.push_back({std::string("mean_sfa"), res.sfa_scores->overall_mean()});
    t.rows.push_back({std::string("mean_dea"), res.dea_scores->overall_mean()});
    t.rows.push_back({std::string("cells"), std::to_string(res.sfa_scores->values.size())});
    add_table(out, "score_correlation", t, dc);
  }

  if (second && (c.methods.tobit || c.methods.simar_wilson)) {
    const auto names = determinant_names(c, panel);
    const CovariateMatrix z = in_module("second-stage", [&] { return CovariateMatrix::from_panel(panel, names); });
    if (c.methods.tobit) {
      res.tobit = in_module("second-stage", [&] { return tobit_fit(res.sfa->te, z, c.tobit); });
      add_table(out, "tobit", tobit_table(*res.tobit), dc);
    }
    if (c.methods.simar_wilson) {
      res.simar_wilson = in_module("second-stage", [&] {
        return simar_wilson(panel, c.frontier, z, res.dea->scores(), c.simar_wilson);
      });
      const Table sw = simar_wilson_table(*res.simar_wilson);
      add_table(out, "simar_wilson", sw, dc);
      out.push_back({"simar_wilson_ci.csv", csv_text(sw)});
    }
    if (res.tobit && res.simar_wilson) {
      const auto det = in_module("second-stage", [&] { return determinants_report(*res.tobit, *res.simar_wilson); });
      add_table(out, "determinants", determinants_table(det), dc);
      json j;
      j["names"] = det.names;
      j["columns"] = json::array();
      for (const auto& col : det.columns) {
        json cj = {{"title", col.title}, {"estimates", json::array()}, {"stars", col.stars}};
        for (double e : col.estimates) cj["estimates"].push_back(std::isfinite(e) ? json(e) : json(nullptr));
        j["columns"].push_back(std::move(cj));
      }
      out.push_back({"determinants.json", j.dump(2) + "\n"});
    }
    if (all) {
      DescriptiveStats stats;
      if (res.sfa) stats.variables.push_back(describe_values("TE_SFA", res.sfa->te));
      if (res.dea) {
        const auto s = res.dea->scores();
        stats.variables.push_back(describe_values("theta_DEA", s));
      }
      for (const auto& n : c.determinants) stats.variables.push_back(describe(panel, {n}).variables[0]);
      add_table(out, "second_stage_describe", describe_table(stats, "Descriptive statistics of the second stage"), dc);
    }
  }
  return res;
}

PipelineResult run_pipeline(const RunConfig& config) { return run_stage(config, Stage::Pipeline); }

std::vector<Artifact> aena_bundle(const AenaSample& sample, std::uint64_t seed) {
  const PanelDataset& panel = sample.panel;
  const std::vector<std::string> panel_cols = {"ATM", "PAX", "NAR", "EMP", "RUNW", "TERM"};
  const std::vector<std::string> cov_cols = {"ISLE", "HUB",    "TOUR", "CONG", "LCC",
                                             "SUB",  "EBITDA", "HSR",  "HH",   "NARPAX"};
  auto table_of = [&](const std::vector<std::string>& cols) {
    CsvTable t;
    t.header = {"dmu", "year"};
    t.header.insert(t.header.end(), cols.begin(), cols.end());
    for (std::size_t i = 0; i < panel.n_dmus(); ++i) {
      for (std::size_t p = 0; p < panel.n_periods(); ++p) {
        const int year = panel.periods()[p];
        std::vector<std::string> row = {panel.dmus()[i], std::to_string(year)};
        for (const auto& c : cols) {
          double v = panel.value(c, i, p);
          if (panel.variable(c).deflated) v *= sample.price_index.at(year);
          row.push_back(format_full(v));
        }
        t.rows.push_back(std::move(row));
      }
    }
    return to_csv(t);
  };
  CsvTable index;
  index.header = {"year", "index"};
  for (const auto& [year, level] : sample.price_index) index.rows.push_back({std::to_string(year), format_full(level)});

  auto spec_of = [&](const std::string& name, Role role) {
    VariableSpec v;
    v.column = name;
    v.role = role;
    if (name == "SIZE") return v;
    const auto& info = panel.variable(name);
    v.units = info.units;
    v.deflate = info.deflated;
    v.kind = info.kind;
    v.lower = info.lower;
    v.upper = info.upper;
    return v;
  };
  RunConfig c;
  c.panel_csv = "aena_panel.csv";
  c.covariate_csv = "aena_covariates.csv";
  c.price_index_csv = "price_index.csv";
  c.base_year = panel.periods().front();
  for (const auto& n : {"ATM", "SIZE", "NAR"}) c.panel_schema.variables.push_back(spec_of(n, Role::Output));
  for (const auto& n : {"EMP", "RUNW", "TERM"}) c.panel_schema.variables.push_back(spec_of(n, Role::Input));
  c.panel_schema.variables.push_back(spec_of("PAX", Role::Covariate));
  for (const auto& n : cov_cols) c.covariate_variables.push_back(spec_of(n, Role::Covariate));
  c.frontier = sample.frontier;
  c.determinants = sample.covariates;
  c.sfa.half_normal = true;
  c.tobit.cluster = true;
  c.seed = seed;
  return {{"aena_panel.csv", table_of(panel_cols)},
          {"aena_covariates.csv", table_of(cov_cols)},
          {"price_index.csv", to_csv(index)},
          {"aena_config.json", config_to_json(c)}};
}

void write_bundle(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& a : artifacts) {
    const fs::path tmp = dir / ("." + a.name + ".partial");
    std::ofstream f(tmp, std::ios::binary);
    f << a.content;
    f.close();
    staged.push_back(tmp);
    if (!f) {
      cleanup();
      throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    }
  }
  for (std::size_t i = 0; i < artifacts.size(); ++i) {
    fs::rename(staged[i], dir / artifacts[i].name, ec);
    if (ec) {
      cleanup();
      throw Error(ErrorCode::Io, "cannot rename into '" + (dir / artifacts[i].name).string() + "': " + ec.message());
    }
  }
}

}  // namespace effbench
