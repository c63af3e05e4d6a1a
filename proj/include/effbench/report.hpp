#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "effbench/csv.hpp"
#include "effbench/dea.hpp"
#include "effbench/frontier.hpp"
#include "effbench/panel.hpp"
#include "effbench/second_stage.hpp"
#include "effbench/sfa.hpp"
#include "effbench/synth.hpp"

namespace effbench {

struct MethodToggles {
  bool sfa = true;
  bool dea = true;
  bool tobit = true;
  bool simar_wilson = true;
};

/// Everything a pipeline run needs. Relative paths resolve against base_dir.
struct RunConfig {
  std::filesystem::path base_dir;
  std::filesystem::path panel_csv;
  std::filesystem::path covariate_csv;
  std::filesystem::path price_index_csv;
  std::filesystem::path output_dir = "effbench_out";
  std::optional<int> base_year;
  PanelSchema panel_schema;
  /// Variables read from covariate_csv (same id/period columns as the panel).
  std::vector<VariableSpec> covariate_variables;
  FrontierSpec frontier;
  /// Second-stage regressors, in table order; T<yy> dummies are appended when time_dummies is set.
  std::vector<std::string> determinants;
  bool time_dummies = true;
  MethodToggles methods;
  SfaOptions sfa;
  TobitOptions tobit;
  SimarWilsonOptions simar_wilson;
  std::optional<std::uint64_t> seed;
  bool decimal_comma = false;

  /// Throws InvalidArgument.
  void validate() const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses the JSON run configuration. Throws InvalidArgument on malformed input.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

/// A table cell: text, or a number printed at full precision in machine
/// files and with 3 decimals in human files.
using Cell = std::variant<std::string, double>;

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
  /// Lines printed under the human table.
  std::vector<std::string> notes;
};

CsvTable to_machine(const Table& table);
std::string to_human(const Table& table, bool decimal_comma = false);
std::string format_human(double value, bool decimal_comma = false);

Table describe_table(const DescriptiveStats& stats, std::string title);
Table correlation_table(const CorrelationMatrix& corr);
Table sfa_coefficient_table(const SfaFit& fit);
/// Columns dmu, one per period, Mean, %Var; a closing Average row.
Table score_table(const ScoreTable& scores, std::string title);
Table determinants_table(const DeterminantsTable& table);
Table tobit_table(const TobitFit& fit);
Table simar_wilson_table(const SimarWilsonFit& fit);

struct RankEntry {
  std::size_t rank = 0;
  std::string dmu;
  double score = 0.0;
};

/// Stable descending sort; ties broken by DMU identifier (lexicographic).
std::vector<RankEntry> rank_report(const std::vector<std::string>& dmus, const std::vector<double>& scores);
/// Ranking on one period's column of a score table.
std::vector<RankEntry> rank_report(const ScoreTable& scores, std::size_t period);

Table ranking_table(const std::vector<RankEntry>& ranking, std::string title);
/// Whitespace-separated "rank score dmu" rows for gnuplot.
std::string ranking_dat(const std::vector<RankEntry>& ranking);
/// Horizontal bar chart in plain text.
std::string ranking_bars(const std::vector<RankEntry>& ranking, bool decimal_comma = false, int width = 50);

struct Artifact {
  std::string name;
  std::string content;
};

enum class Stage { Describe, Sfa, Dea, SecondStage, Pipeline };

struct PipelineResult {
  PanelDataset panel;
  std::optional<SfaFit> sfa;
  std::optional<ScoreTable> sfa_scores;
  std::optional<DeaTable> dea;
  std::optional<ScoreTable> dea_scores;
  std::optional<TobitFit> tobit;
  std::optional<SimarWilsonFit> simar_wilson;
  /// Pearson correlation of SFA TE and DEA theta over all cells.
  std::optional<double> score_correlation;
  std::vector<Artifact> artifacts;
};

PanelDataset load_run_panel(const RunConfig& config);

/// Computes a stage in memory. Errors carry the failing module in their message.
PipelineResult run_stage(const RunConfig& config, Stage stage);
PipelineResult run_pipeline(const RunConfig& config);

/// Files for an airport sample as a user would supply them: panel CSV with
/// nominal money and PAX in place of SIZE, covariate CSV, price index and a
/// run configuration referring to them by relative path.
std::vector<Artifact> aena_bundle(const AenaSample& sample, std::uint64_t seed);

/// Writes every artifact or none: files are staged under temporary names and
/// renamed once all of them are on disk.
void write_bundle(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir);

}  // namespace effbench
