#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "effbench/csv.hpp"

namespace effbench {

enum class Role { Output, Input, Covariate };

/// Covariate measurement type, checked at load time.
enum class CovariateKind { Continuous, Dummy, Count };

std::string_view to_string(Role role);
std::string_view to_string(CovariateKind kind);

struct VariableInfo {
  std::string name;
  Role role = Role::Covariate;
  std::string units;
  bool deflated = false;
  CovariateKind kind = CovariateKind::Continuous;
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Balanced DMU x period panel. Immutable once constructed; the constructor
/// enforces every invariant (balanced, positive outputs/inputs, consecutive
/// periods, covariate kinds and bounds).
class PanelDataset {
 public:
  /// `values[name]` holds N*T entries ordered by DMU, then period.
  PanelDataset(std::vector<std::string> dmus, std::vector<int> periods,
               std::vector<VariableInfo> variables, std::map<std::string, std::vector<double>> values);

  const std::vector<std::string>& dmus() const { return dmus_; }
  const std::vector<int>& periods() const { return periods_; }
  const std::vector<VariableInfo>& variables() const { return variables_; }

  std::size_t n_dmus() const { return dmus_.size(); }
  std::size_t n_periods() const { return periods_.size(); }
  std::size_t n_obs() const { return dmus_.size() * periods_.size(); }
  std::size_t row(std::size_t dmu, std::size_t period) const { return dmu * periods_.size() + period; }

  bool has(std::string_view name) const;
  /// Throws UnknownVariable.
  const VariableInfo& variable(std::string_view name) const;
  std::span<const double> column(std::string_view name) const;
  double value(std::string_view name, std::size_t dmu, std::size_t period) const;
  std::vector<std::string> names_with_role(Role role) const;

  std::optional<std::size_t> dmu_index(std::string_view dmu) const;
  std::optional<std::size_t> period_index(int period) const;

  /// Copy with one more (or a replaced) variable.
  PanelDataset with_variable(VariableInfo info, std::vector<double> values) const;
  /// Copy restricted to the named variables, in the given order.
  PanelDataset select(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> dmus_;
  std::vector<int> periods_;
  std::vector<VariableInfo> variables_;
  std::map<std::string, std::vector<double>, std::less<>> values_;
};

struct VariableSpec {
  std::string column;
  Role role = Role::Covariate;
  std::string units;
  bool deflate = false;
  CovariateKind kind = CovariateKind::Continuous;
  std::optional<double> lower;
  std::optional<double> upper;
};

/// Maps CSV columns to roles. SIZE, when registered but absent from the
/// file, is derived as PAX/ATM; a SIZE column in the file takes precedence.
struct PanelSchema {
  std::string id_column = "dmu";
  std::string period_column = "year";
  std::vector<VariableSpec> variables;
};

using PriceIndex = std::map<int, double>;

struct LoadOptions {
  bool decimal_comma = false;
  /// When absent, monetary values are taken as already real.
  std::optional<PriceIndex> price_index;
  /// Defaults to the first period of the panel.
  std::optional<int> base_year;
};

PanelDataset load_panel(const std::filesystem::path& path, const PanelSchema& schema,
                        const LoadOptions& options = {});
PanelDataset panel_from_table(const CsvTable& table, const PanelSchema& schema,
                              const LoadOptions& options = {});

/// Adds covariates from a second table keyed on the same (dmu, period) cells.
PanelDataset attach_covariates(const PanelDataset& panel, const CsvTable& table, const PanelSchema& schema,
                               const LoadOptions& options = {});

/// Adds dummies T<yy> for every period except the last (the control period).
PanelDataset add_time_dummies(const PanelDataset& panel);

/// Writes the panel in the schema load_panel reads (dmu, year, variables...).
CsvTable panel_to_table(const PanelDataset& panel);

PriceIndex load_price_index(const std::filesystem::path& path, bool decimal_comma = false);

/// Average aircraft size, passengers per movement.
double derive_size(double pax, double atm);

/// Expresses a nominal value of `period` in `base` prices.
double deflate(double value, int period, int base, const PriceIndex& index);

struct VariableStats {
  std::string name;
  double mean = 0.0;
  double std_dev = 0.0;  // sample (n-1) standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

struct DescriptiveStats {
  std::vector<VariableStats> variables;
};

DescriptiveStats describe(const PanelDataset& panel, const std::vector<std::string>& names);
VariableStats describe_values(std::string name, std::span<const double> values);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

CorrelationMatrix pearson(const PanelDataset& panel, const std::vector<std::string>& names);
/// Pearson product-moment correlation of two equally long samples.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace effbench
