#pragma once

// Reported ANOVA and Tukey HSD results for the four outcome metrics of the
// three-group study (48 prompts per group, 144 in total).

#include <array>
#include <string_view>

namespace test::study {

inline constexpr int kGroupSize = 48;
inline constexpr int kDfBetween = 2;
inline constexpr int kDfWithin = 141;

struct AnovaRow {
  std::string_view metric;
  double ss_between, ss_within;
  double f;
  double p;  // 0 stands for "< .001"
};

struct TukeyRow {
  int a, b;
  double meandiff, p_adj, lower, upper;
  bool reject;
};

struct Metric {
  AnovaRow anova;
  std::array<TukeyRow, 3> tukey;
};

inline constexpr std::array<Metric, 4> kMetrics = {{
    {{"word_count", 2087.18, 33085.98, 4.45, 0.013},
     {{{1, 2, -5.0833, 0.2382, -12.49, 2.3233, false},
       {1, 3, -9.3125, 0.0095, -16.7191, -1.9059, true},
       {2, 3, -4.2292, 0.3687, -11.6358, 3.1775, false}}}},
    {{"time_minutes", 23.94, 636.02, 2.65, 0.074},
     {{{1, 2, -0.2146, 0.8738, -1.2415, 0.8123, false},
       {1, 3, -0.9521, 0.0753, -1.979, 0.0748, false},
       {2, 3, -0.7375, 0.2083, -1.7644, 0.2894, false}}}},
    {{"similarity_pct", 3328.63, 20181.38, 11.63, 0.0},
     {{{1, 2, -5.1875, 0.0886, -10.9721, 0.5971, false},
       {1, 3, -11.75, 0.0, -17.5346, -5.9654, true},
       {2, 3, -6.5625, 0.0219, -12.3471, -0.7779, true}}}},
    {{"concreteness", 0.461, 17.547, 1.85, 0.161},
     {{{1, 2, -0.0271, 0.925, -0.1977, 0.1435, false},
       {1, 3, 0.1042, 0.32, -0.0664, 0.2747, false},
       {2, 3, 0.1313, 0.1659, -0.0393, 0.3018, false}}}},
}};

}  // namespace test::study
