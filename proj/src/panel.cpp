#include "effbench/panel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "effbench/error.hpp"

namespace effbench {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Output: return "output";
    case Role::Input: return "input";
    case Role::Covariate: return "covariate";
  }
  return "covariate";
}

std::string_view to_string(CovariateKind kind) {
  switch (kind) {
    case CovariateKind::Continuous: return "continuous";
    case CovariateKind::Dummy: return "dummy";
    case CovariateKind::Count: return "count";
  }
  return "continuous";
}

// ---------------------------------------------------------------------------
// PanelDataset

PanelDataset::PanelDataset(std::vector<std::string> dmus, std::vector<int> periods,
                           std::vector<VariableInfo> variables,
                           std::map<std::string, std::vector<double>> values)
    : dmus_(std::move(dmus)), periods_(std::move(periods)), variables_(std::move(variables)) {
  if (dmus_.empty() || periods_.empty()) {
    throw Error(ErrorCode::UnbalancedPanel, "panel needs at least one DMU and one period");
  }
  std::set<std::string_view> seen;
  for (const auto& d : dmus_) {
    if (!seen.insert(d).second) throw Error(ErrorCode::DuplicateRow, "duplicate DMU '" + d + "'");
  }
  for (std::size_t t = 1; t < periods_.size(); ++t) {
    if (periods_[t] != periods_[t - 1] + 1) {
      throw Error(ErrorCode::UnbalancedPanel, "periods must be consecutive integers; gap after " +
                                                  std::to_string(periods_[t - 1]));
    }
  }
  const std::size_t n = n_obs();
  std::set<std::string_view> names;
  for (const auto& info : variables_) {
    if (!names.insert(info.name).second) {
      throw Error(ErrorCode::SchemaMismatch, "variable '" + info.name + "' registered twice");
    }
    auto it = values.find(info.name);
    if (it == values.end()) {
      throw Error(ErrorCode::SchemaMismatch, "no values for variable '" + info.name + "'");
    }
    const auto& col = it->second;
    if (col.size() != n) {
      throw Error(ErrorCode::UnbalancedPanel, "variable '" + info.name + "' has " +
                                                  std::to_string(col.size()) + " values, expected " +
                                                  std::to_string(n));
    }
    for (std::size_t r = 0; r < n; ++r) {
      const double v = col[r];
      const std::string where = " for " + dmus_[r / periods_.size()] + " in " +
                                std::to_string(periods_[r % periods_.size()]);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::SchemaMismatch, "non-finite " + info.name + where);
      }
      if (info.role != Role::Covariate) {
        if (!(v > 0.0)) {
          throw Error(ErrorCode::NonPositiveQuantity, info.name + " = " + format_full(v) + where);
        }
        continue;
      }
      if (info.kind == CovariateKind::Dummy && v != 0.0 && v != 1.0) {
        throw Error(ErrorCode::InvalidCovariate, "dummy " + info.name + " = " + format_full(v) + where);
      }
      if (info.kind == CovariateKind::Count && (v < 0.0 || v != std::floor(v))) {
        throw Error(ErrorCode::InvalidCovariate, "count " + info.name + " = " + format_full(v) + where);
      }
      if ((info.lower && v < *info.lower) || (info.upper && v > *info.upper)) {
        throw Error(ErrorCode::InvalidCovariate, info.name + " = " + format_full(v) + " out of range" + where);
      }
    }
    values_.emplace(info.name, col);
  }
}

bool PanelDataset::has(std::string_view name) const { return values_.find(name) != values_.end(); }

const VariableInfo& PanelDataset::variable(std::string_view name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v;
  }
  throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
}

std::span<const double> PanelDataset::column(std::string_view name) const {
  auto it = values_.find(name);
  if (it == values_.end()) {
    throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
  }
  return it->second;
}

double PanelDataset::value(std::string_view name, std::size_t dmu, std::size_t period) const {
  return column(name)[row(dmu, period)];
}

std::vector<std::string> PanelDataset::names_with_role(Role role) const {
  std::vector<std::string> out;
  for (const auto& v : variables_) {
    if (v.role == role) out.push_back(v.name);
  }
  return out;
}

std::optional<std::size_t> PanelDataset::dmu_index(std::string_view dmu) const {
  for (std::size_t i = 0; i < dmus_.size(); ++i) {
    if (dmus_[i] == dmu) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> PanelDataset::period_index(int period) const {
  for (std::size_t t = 0; t < periods_.size(); ++t) {
    if (periods_[t] == period) return t;
  }
  return std::nullopt;
}

PanelDataset PanelDataset::with_variable(VariableInfo info, std::vector<double> values) const {
  std::vector<VariableInfo> vars;
  std::map<std::string, std::vector<double>> vals;
  bool replaced = false;
  for (const auto& v : variables_) {
    if (v.name == info.name) {
      vars.push_back(info);
      replaced = true;
    } else {
      vars.push_back(v);
      vals.emplace(v.name, values_.find(v.name)->second);
    }
  }
  if (!replaced) vars.push_back(info);
  vals[info.name] = std::move(values);
  return PanelDataset(dmus_, periods_, std::move(vars), std::move(vals));
}

PanelDataset PanelDataset::select(const std::vector<std::string>& names) const {
  std::vector<VariableInfo> vars;
  std::map<std::string, std::vector<double>> vals;
  for (const auto& name : names) {
    vars.push_back(variable(name));
    vals.emplace(name, values_.find(name)->second);
  }
  return PanelDataset(dmus_, periods_, std::move(vars), std::move(vals));
}

// ---------------------------------------------------------------------------
// Loading

double derive_size(double pax, double atm) {
  if (atm == 0.0) throw Error(ErrorCode::DivisionByZero, "SIZE = PAX/ATM with ATM = 0");
  if (pax < 0.0 || atm < 0.0) {
    throw Error(ErrorCode::NonPositiveQuantity, "PAX must be >= 0 and ATM > 0");
  }
  return pax / atm;
}

double deflate(double value, int period, int base, const PriceIndex& index) {
  auto at = [&index](int year) {
    auto it = index.find(year);
    if (it == index.end()) {
      throw Error(ErrorCode::MissingIndexYear, "price index has no entry for " + std::to_string(year));
    }
    if (!(it->second > 0.0)) {
      throw Error(ErrorCode::MissingIndexYear, "price index for " + std::to_string(year) + " is not positive");
    }
    return it->second;
  };
  return value * at(base) / at(period);
}

PriceIndex load_price_index(const std::filesystem::path& path, bool decimal_comma) {
  const CsvTable table = read_csv(path, {.decimal_comma = decimal_comma});
  const std::size_t year_col = table.column("year");
  const std::size_t index_col = table.column("index");
  PriceIndex index;
  for (const auto& row : table.rows) {
    const double year = parse_number(row[year_col], decimal_comma, "price index year");
    const double value = parse_number(row[index_col], decimal_comma, "price index value");
    if (!index.emplace(static_cast<int>(year), value).second) {
      throw Error(ErrorCode::DuplicateRow, "price index repeats year " + row[year_col]);
    }
  }
  return index;
}

namespace {

struct KeyedRows {
  std::vector<std::string> dmus;
  std::vector<int> periods;
  // row index in the CSV for each (dmu, period) cell, N*T long
  std::vector<std::size_t> source_row;
};

int parse_period(const std::string& cell, bool decimal_comma) {
  const double v = parse_number(cell, decimal_comma, "period");
  if (v != std::floor(v)) throw Error(ErrorCode::SchemaMismatch, "period '" + cell + "' is not an integer");
  return static_cast<int>(v);
}

KeyedRows key_rows(const CsvTable& table, const PanelSchema& schema, bool decimal_comma) {
  const std::size_t id_col = table.column(schema.id_column);
  const std::size_t period_col = table.column(schema.period_column);
  KeyedRows keyed;
  std::set<int> period_set;
  std::map<std::string, std::size_t, std::less<>> dmu_pos;
  std::vector<std::pair<std::size_t, int>> keys;
  for (const auto& row : table.rows) {
    const std::string& id = row[id_col];
    if (id.empty()) throw Error(ErrorCode::SchemaMismatch, "empty DMU identifier");
    auto [it, inserted] = dmu_pos.emplace(id, keyed.dmus.size());
    if (inserted) keyed.dmus.push_back(id);
    const int p = parse_period(row[period_col], decimal_comma);
    period_set.insert(p);
    keys.emplace_back(it->second, p);
  }
  if (keyed.dmus.empty()) throw Error(ErrorCode::UnbalancedPanel, "no data rows");
  keyed.periods.assign(period_set.begin(), period_set.end());
  const std::size_t n_periods = keyed.periods.size();
  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  keyed.source_row.assign(keyed.dmus.size() * n_periods, kMissing);
  for (std::size_t r = 0; r < keys.size(); ++r) {
    const auto t = static_cast<std::size_t>(
        std::lower_bound(keyed.periods.begin(), keyed.periods.end(), keys[r].second) - keyed.periods.begin());
    std::size_t& slot = keyed.source_row[keys[r].first * n_periods + t];
    if (slot != kMissing) {
      throw Error(ErrorCode::DuplicateRow, "duplicate row for (" + keyed.dmus[keys[r].first] + ", " +
                                               std::to_string(keys[r].second) + ")");
    }
    slot = r;
  }
  for (std::size_t c = 0; c < keyed.source_row.size(); ++c) {
    if (keyed.source_row[c] == kMissing) {
      throw Error(ErrorCode::UnbalancedPanel, "missing row for (" + keyed.dmus[c / n_periods] + ", " +
                                                  std::to_string(keyed.periods[c % n_periods]) + ")");
    }
  }
  return keyed;
}

VariableInfo info_from_spec(const VariableSpec& spec, bool deflated) {
  return VariableInfo{spec.column, spec.role, spec.units, deflated, spec.kind, spec.lower, spec.upper};
}

std::vector<double> read_column(const CsvTable& table, std::size_t col, const KeyedRows& keyed,
                                bool decimal_comma, const std::string& name) {
  std::vector<double> out(keyed.source_row.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = parse_number(table.rows[keyed.source_row[c]][col], decimal_comma, name);
  }
  return out;
}

void apply_deflation(std::vector<double>& values, const KeyedRows& keyed, const LoadOptions& options) {
  const int base = options.base_year.value_or(keyed.periods.front());
  const std::size_t n_periods = keyed.periods.size();
  for (std::size_t c = 0; c < values.size(); ++c) {
    values[c] = deflate(values[c], keyed.periods[c % n_periods], base, *options.price_index);
  }
}

}  // namespace

PanelDataset panel_from_table(const CsvTable& table, const PanelSchema& schema, const LoadOptions& options) {
  bool any_output = false, any_input = false;
  for (const auto& v : schema.variables) {
    any_output |= v.role == Role::Output;
    any_input |= v.role == Role::Input;
  }
  if (!any_output || !any_input) {
    throw Error(ErrorCode::SchemaMismatch, "schema needs at least one output and one input");
  }
  const KeyedRows keyed = key_rows(table, schema, options.decimal_comma);

  std::vector<VariableInfo> infos;
  std::map<std::string, std::vector<double>> values;
  std::vector<const VariableSpec*> derived_size;
  for (const auto& spec : schema.variables) {
    auto col = table.find_column(spec.column);
    if (!col) {
      if (spec.column == "SIZE" && table.find_column("PAX") && table.find_column("ATM")) {
        derived_size.push_back(&spec);
        continue;
      }
      throw Error(ErrorCode::SchemaMismatch, "missing column '" + spec.column + "'");
    }
    auto column = read_column(table, *col, keyed, options.decimal_comma, spec.column);
    const bool deflated = spec.deflate && options.price_index.has_value();
    if (deflated) apply_deflation(column, keyed, options);
    infos.push_back(info_from_spec(spec, deflated));
    values.emplace(spec.column, std::move(column));
  }
  // Validates positivity of the raw outputs/inputs before SIZE is derived.
  PanelDataset panel(keyed.dmus, keyed.periods, infos, values);
  for (const VariableSpec* spec : derived_size) {
    const auto pax = read_column(table, table.column("PAX"), keyed, options.decimal_comma, "PAX");
    const auto atm = read_column(table, table.column("ATM"), keyed, options.decimal_comma, "ATM");
    std::vector<double> size(pax.size());
    for (std::size_t c = 0; c < size.size(); ++c) size[c] = derive_size(pax[c], atm[c]);
    panel = panel.with_variable(info_from_spec(*spec, false), std::move(size));
  }
  if (!derived_size.empty()) {
    std::vector<std::string> order;
    for (const auto& spec : schema.variables) order.push_back(spec.column);
    panel = panel.select(order);
  }
  return panel;
}

PanelDataset load_panel(const std::filesystem::path& path, const PanelSchema& schema, const LoadOptions& options) {
  return panel_from_table(read_csv(path, {.decimal_comma = options.decimal_comma}), schema, options);
}

PanelDataset attach_covariates(const PanelDataset& panel, const CsvTable& table, const PanelSchema& schema,
                               const LoadOptions& options) {
  const KeyedRows keyed = key_rows(table, schema, options.decimal_comma);
  if (keyed.periods != panel.periods()) {
    throw Error(ErrorCode::UnbalancedPanel, "covariate periods differ from the panel's");
  }
  if (keyed.dmus.size() != panel.n_dmus()) {
    throw Error(ErrorCode::UnbalancedPanel, "covariate file covers " + std::to_string(keyed.dmus.size()) +
                                                " DMUs, panel has " + std::to_string(panel.n_dmus()));
  }
  // Reorder to the panel's DMU order.
  KeyedRows aligned = keyed;
  const std::size_t n_periods = panel.n_periods();
  for (std::size_t i = 0; i < panel.n_dmus(); ++i) {
    auto it = std::find(keyed.dmus.begin(), keyed.dmus.end(), panel.dmus()[i]);
    if (it == keyed.dmus.end()) {
      throw Error(ErrorCode::UnbalancedPanel, "covariate file lacks DMU '" + panel.dmus()[i] + "'");
    }
    const auto src = static_cast<std::size_t>(it - keyed.dmus.begin());
    for (std::size_t t = 0; t < n_periods; ++t) {
      aligned.source_row[i * n_periods + t] = keyed.source_row[src * n_periods + t];
    }
  }
  aligned.dmus = panel.dmus();

  PanelDataset out = panel;
  for (const auto& spec : schema.variables) {
    auto column = read_column(table, table.column(spec.column), aligned, options.decimal_comma, spec.column);
    const bool deflated = spec.deflate && options.price_index.has_value();
    if (deflated) apply_deflation(column, aligned, options);
    out = out.with_variable(info_from_spec(spec, deflated), std::move(column));
  }
  return out;
}

PanelDataset add_time_dummies(const PanelDataset& panel) {
  PanelDataset out = panel;
  const std::size_t n_periods = panel.n_periods();
  for (std::size_t t = 0; t + 1 < n_periods; ++t) {
    const int yy = ((panel.periods()[t] % 100) + 100) % 100;
    std::string name = "T";
    if (yy < 10) name += "0";
    name += std::to_string(yy);
    std::vector<double> dummy(panel.n_obs(), 0.0);
    for (std::size_t i = 0; i < panel.n_dmus(); ++i) dummy[panel.row(i, t)] = 1.0;
    out = out.with_variable(VariableInfo{name, Role::Covariate, "", false, CovariateKind::Dummy, {}, {}},
                            std::move(dummy));
  }
  return out;
}

CsvTable panel_to_table(const PanelDataset& panel) {
  CsvTable table;
  table.header = {"dmu", "year"};
  for (const auto& v : panel.variables()) table.header.push_back(v.name);
  for (std::size_t i = 0; i < panel.n_dmus(); ++i) {
    for (std::size_t t = 0; t < panel.n_periods(); ++t) {
      std::vector<std::string> row = {panel.dmus()[i], std::to_string(panel.periods()[t])};
      for (const auto& v : panel.variables()) row.push_back(format_full(panel.value(v.name, i, t)));
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Summaries

VariableStats describe_values(std::string name, std::span<const double> values) {
  VariableStats s;
  s.name = std::move(name);
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // The arithmetic mean can drift a rounding step outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

DescriptiveStats describe(const PanelDataset& panel, const std::vector<std::string>& names) {
  DescriptiveStats out;
  for (const auto& name : names) out.variables.push_back(describe_values(name, panel.column(name)));
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::ZeroVariance, "pearson needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ZeroVariance, "pearson on a constant variable");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson(const PanelDataset& panel, const std::vector<std::string>& names) {
  CorrelationMatrix out;
  out.names = names;
  const auto k = static_cast<Eigen::Index>(names.size());
  out.values = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto xa = panel.column(names[a]);
    if (panel.n_obs() >= 2 && std::all_of(xa.begin(), xa.end(), [&](double v) { return v == xa[0]; })) {
      throw Error(ErrorCode::ZeroVariance, "variable '" + names[a] + "' is constant");
    }
    for (Eigen::Index b = 0; b < a; ++b) {
      const double r = pearson(xa, panel.column(names[b]));
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  if (k == 1) pearson(panel.column(names[0]), panel.column(names[0]));
  return out;
}

}  // namespace effbench
