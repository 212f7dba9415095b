#include <algorithm>
#include <cmath>
#include <map>

#include "archiprompt/analytics.hpp"

namespace archiprompt::analytics {
namespace {

void check_parallel(std::span<const double> values, std::span<const int> groups) {
  if (values.size() != groups.size())
    throw ValueError("values and group labels differ in length",
                     {{"values", values.size()}, {"groups", groups.size()}});
  for (double v : values)
    if (!std::isfinite(v)) throw ValueError("non-finite value in sample");
}

std::vector<GroupSummary> checked_summary(std::span<const double> values, std::span<const int> groups) {
  auto summary = summarize_groups(values, groups);
  if (summary.size() < 2) throw DegenerateGroups("need at least two groups", {{"groups", summary.size()}});
  for (const auto& g : summary)
    if (g.n < 2)
      throw DegenerateGroups("group " + std::to_string(g.label) + " has fewer than two values",
                             {{"group", g.label}, {"n", g.n}});
  return summary;
}

}  // namespace

std::vector<GroupSummary> summarize_groups(std::span<const double> values, std::span<const int> groups) {
  check_parallel(values, groups);
  std::map<int, std::pair<std::size_t, double>> acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [n, sum] = acc[groups[i]];
    ++n;
    sum += values[i];
  }
  std::vector<GroupSummary> out;
  for (const auto& [label, ns] : acc) out.push_back({label, ns.first, ns.second / static_cast<double>(ns.first)});
  return out;
}

AnovaTable anova_from_sums(double ss_between, double ss_within, int df_between, int df_within) {
  if (df_between < 1 || df_within < 1)
    throw DegenerateGroups("degrees of freedom must be positive", {{"df_between", df_between}, {"df_within", df_within}});
  if (!(ss_between >= 0) || !(ss_within >= 0)) throw ValueError("sums of squares must be nonnegative");
  AnovaTable t;
  t.ss_between = ss_between;
  t.ss_within = ss_within;
  t.df_between = df_between;
  t.df_within = df_within;
  t.ms_between = ss_between / df_between;
  t.ms_within = ss_within / df_within;
  if (ss_within == 0) {
    if (ss_between > 0) throw ZeroWithinVariance("all groups are internally constant but differ");
    t.f_value = 0.0;
    t.p_value = 1.0;
    return t;
  }
  t.f_value = t.ms_between / t.ms_within;
  t.p_value = f_upper_tail(t.f_value, df_between, df_within);
  return t;
}

AnovaTable anova_oneway(std::span<const double> values, std::span<const int> groups) {
  const auto summary = checked_summary(values, groups);
  std::map<int, double> mean;
  double grand = 0;
  for (const auto& g : summary) {
    mean[g.label] = g.mean;
    grand += g.mean * static_cast<double>(g.n);
  }
  grand /= static_cast<double>(values.size());

  double ss_b = 0;
  for (const auto& g : summary) ss_b += static_cast<double>(g.n) * (g.mean - grand) * (g.mean - grand);
  double ss_w = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double d = values[i] - mean[groups[i]];
    ss_w += d * d;
  }
  const int k = static_cast<int>(summary.size());
  return anova_from_sums(ss_b, ss_w, k - 1, static_cast<int>(values.size()) - k);
}

AnovaTable anova_oneway(const ExperimentDataset& data, Metric metric) {
  std::vector<double> v;
  std::vector<int> g;
  data.column(metric, v, g);
  return anova_oneway(v, g);
}

std::vector<TukeyRow> tukey_from_summary(std::span<const GroupSummary> groups, double mse, double df_within,
                                         double alpha) {
  if (groups.size() < 2) throw DegenerateGroups("need at least two groups");
  if (!(mse >= 0) || !(df_within > 0)) throw DomainError("invalid error term", {{"mse", mse}, {"df", df_within}});
  std::vector<GroupSummary> sorted(groups.begin(), groups.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  const double k = static_cast<double>(sorted.size());
  const double q_crit = studentized_range_quantile(alpha, k, df_within);

  std::vector<TukeyRow> rows;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const auto& a = sorted[i];
      const auto& b = sorted[j];
      TukeyRow r;
      r.group_a = a.label;
      r.group_b = b.label;
      r.meandiff = b.mean - a.mean;
      const double se = std::sqrt(mse * (1.0 / a.n + 1.0 / b.n) / 2.0);
      if (se == 0) {
        if (r.meandiff != 0) throw ZeroWithinVariance("groups differ with zero error variance");
        r.p_adj = 1.0;
      } else {
        r.p_adj = studentized_range_upper_tail(std::abs(r.meandiff) / se, k, df_within);
      }
      r.lower = r.meandiff - q_crit * se;
      r.upper = r.meandiff + q_crit * se;
      r.reject = r.p_adj < alpha;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<TukeyRow> tukey_hsd(std::span<const double> values, std::span<const int> groups, double alpha) {
  const auto summary = checked_summary(values, groups);
  const auto table = anova_oneway(values, groups);
  return tukey_from_summary(summary, table.ms_within, table.df_within, alpha);
}

std::vector<TukeyRow> tukey_hsd(const ExperimentDataset& data, Metric metric, double alpha) {
  std::vector<double> v;
  std::vector<int> g;
  data.column(metric, v, g);
  return tukey_hsd(v, g, alpha);
}

}  // namespace archiprompt::analytics
