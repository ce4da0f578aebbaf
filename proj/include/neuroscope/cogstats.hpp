#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace neuroscope {

/// Age-of-acquisition norms in years.
struct AoATable {
  struct Alias {
    std::string proxy;
    /// Rating recorded for the aliased class itself, when the source lists one.
    std::optional<double> rating;
  };

  std::map<std::string, double> entries;
  std::map<std::string, Alias> aliases;

  /// Adds a rating, enforcing the (0, 25] range.
  void add(std::string_view word, double rating);
  void add_alias(std::string_view word, std::string_view proxy, std::optional<double> rating = {});
};

/// CSV `word,aoa[,alias_of]`; blank lines, `#` comments and a leading
/// `word,aoa...` header are skipped. A row with alias_of records the alias and
/// its rating, and rates the proxy word too unless it already has a rating.
AoATable read_aoa_csv(const std::filesystem::path& path);
AoATable parse_aoa_csv(std::string_view text);

struct AoAJoin {
  std::map<std::string, double> matched;
  std::set<std::string> missing;
};

/// Exact (normalized) match first, then the alias map. Unmatched classes go
/// to `missing`.
AoAJoin join_aoa(const std::set<std::string>& classes, const AoATable& table);

enum class TTestVariant { kPooled, kWelch };
std::string_view to_string(TTestVariant v);

struct TTestResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  TTestVariant variant = TTestVariant::kPooled;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Two-sided two-sample t-test of mean(a) - mean(b).
///
/// When both samples have zero variance and different means the statistic
/// is +/-infinity with p = 0 (Welch df then falls back to the pooled df).
/// Zero variance with equal means throws ComputationError.
TTestResult two_sample_ttest(const std::vector<double>& a, const std::vector<double>& b,
                             TTestVariant variant);

/// I_x(a, b), the regularized incomplete beta function.
double regularized_incomplete_beta(double x, double a, double b);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// {variant, mean_in, mean_out, t, df, p, n_in, n_out} for a test run as
/// two_sample_ttest(out_of_vocab, in_vocab). Infinite t is written as the
/// strings "inf"/"-inf".
nlohmann::ordered_json ttest_report(const TTestResult& r);

}  // namespace neuroscope
