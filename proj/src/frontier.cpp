#include "effbench/frontier.hpp"

#include <algorithm>
#include <set>

#include "effbench/error.hpp"
#include "effbench/panel.hpp"

namespace effbench {

std::string_view to_string(ReturnsToScale rts) {
  return rts == ReturnsToScale::Variable ? "VRS" : "CRS";
}

void FrontierSpec::validate(const PanelDataset& panel) const {
  if (outputs.empty() || inputs.empty()) {
    throw Error(ErrorCode::SchemaMismatch, "frontier needs at least one output and one input");
  }
  std::set<std::string> seen;
  auto check = [&](const std::string& name, Role role) {
    const auto& info = panel.variable(name);
    if (info.role != role) {
      throw Error(ErrorCode::SchemaMismatch, "variable '" + name + "' is registered as " +
                                                 std::string(to_string(info.role)) + ", frontier uses it as " +
                                                 std::string(to_string(role)));
    }
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::SchemaMismatch, "variable '" + name + "' listed twice in the frontier");
    }
  };
  for (const auto& y : outputs) check(y, Role::Output);
  for (const auto& x : inputs) check(x, Role::Input);
  if (!normalizing_output.empty() &&
      std::find(outputs.begin(), outputs.end(), normalizing_output) == outputs.end()) {
    throw Error(ErrorCode::SchemaMismatch, "normalizing output '" + normalizing_output + "' is not an output");
  }
}

double ScoreTable::dmu_mean(std::size_t dmu) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < periods.size(); ++t) sum += at(dmu, t);
  return sum / static_cast<double>(periods.size());
}

double ScoreTable::pct_var(std::size_t dmu) const {
  const double first = at(dmu, 0);
  const double last = at(dmu, periods.size() - 1);
  return (last - first) / first * 100.0;
}

double ScoreTable::period_mean(std::size_t period) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < dmus.size(); ++i) sum += at(i, period);
  return sum / static_cast<double>(dmus.size());
}

double ScoreTable::overall_mean() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double ScoreTable::mean_pct_var() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < dmus.size(); ++i) sum += pct_var(i);
  return sum / static_cast<double>(dmus.size());
}

}  // namespace effbench
