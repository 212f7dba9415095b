#include <algorithm>
#include <cmath>

#include "archiprompt/analytics.hpp"

namespace archiprompt::analytics {
namespace {

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValueError("samples differ in length", {{"x", x.size()}, {"y", y.size()}});
  if (x.size() < 3) throw InsufficientData("correlation needs at least three points", {{"n", x.size()}});
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw ConstantVariable("correlation is undefined for a constant variable");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const ExperimentDataset& data, std::span<const Metric> variables,
                                 std::optional<int> group) {
  if (variables.size() < 2) throw ValueError("need at least two variables");
  CorrelationMatrix m;
  std::vector<std::vector<double>> cols(variables.size());
  for (const auto& row : data.rows) {
    if (group && row.group != *group) continue;
    // Listwise deletion: a row contributes only if every variable is present.
    if (!row.concreteness) {
      bool needs = false;
      for (auto v : variables) needs = needs || v == Metric::concreteness;
      if (needs) continue;
    }
    for (std::size_t j = 0; j < variables.size(); ++j) {
      switch (variables[j]) {
        case Metric::word_count: cols[j].push_back(static_cast<double>(row.word_count)); break;
        case Metric::time_minutes: cols[j].push_back(row.time_minutes); break;
        case Metric::similarity_pct: cols[j].push_back(row.similarity_pct); break;
        case Metric::concreteness: cols[j].push_back(*row.concreteness); break;
      }
    }
  }
  m.n = cols.front().size();
  for (auto v : variables) m.variables.emplace_back(to_string(v));
  m.r.assign(variables.size(), std::vector<double>(variables.size(), 1.0));
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      try {
        m.r[i][j] = m.r[j][i] = pearson(cols[i], cols[j]);
      } catch (const ConstantVariable&) {
        const auto name = to_string(variables[is_constant(cols[i]) ? i : j]);
        throw ConstantVariable(std::string(name) + " is constant", {{"variable", name}});
      }
    }
  }
  return m;
}

}  // namespace archiprompt::analytics
