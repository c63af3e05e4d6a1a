#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace effbench {

class PanelDataset;

enum class ReturnsToScale { Variable, Constant };

std::string_view to_string(ReturnsToScale rts);

/// Which panel variables enter the frontier. Orientation is always output.
struct FrontierSpec {
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;
  /// Output used to impose homogeneity in the translog (must be in `outputs`).
  std::string normalizing_output;
  ReturnsToScale returns_to_scale = ReturnsToScale::Variable;

  /// Throws UnknownVariable / SchemaMismatch when the panel cannot serve this spec.
  void validate(const PanelDataset& panel) const;
};

/// Per-(dmu, period) efficiency scores with the summary columns of the
/// score tables (per-DMU mean and percent variation first -> last period).
struct ScoreTable {
  std::vector<std::string> dmus;
  std::vector<int> periods;
  /// N*T values ordered by DMU, then period.
  std::vector<double> values;

  double at(std::size_t dmu, std::size_t period) const { return values[dmu * periods.size() + period]; }
  double dmu_mean(std::size_t dmu) const;
  /// (last - first) / first * 100.
  double pct_var(std::size_t dmu) const;
  double period_mean(std::size_t period) const;
  double overall_mean() const;
  /// Mean of the per-DMU percent variations.
  double mean_pct_var() const;
};

}  // namespace effbench
