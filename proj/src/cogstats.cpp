#include "neuroscope/cogstats.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "neuroscope/concepts.hpp"
#include "neuroscope/error.hpp"
#include "neuroscope/io_util.hpp"

namespace neuroscope {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_rating(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw FormatError("AoA line " + std::to_string(line_no) + ": '" + text + "' is not a number");
  }
}

void check_rating(std::string_view word, double rating) {
  if (!(rating > 0.0 && rating <= 25.0)) {
    throw ValidationError("AoA rating " + std::to_string(rating) + " for '" + std::string(word) +
                          "' is outside (0, 25]");
  }
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // sample variance, ddof = 1
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size() - 1);
  return m;
}

/// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      return h;
    }
  }
  throw ComputationError("incomplete beta continued fraction did not converge");
}

}  // namespace

void AoATable::add(std::string_view word, double rating) {
  check_rating(word, rating);
  entries[normalize_concept(word)] = rating;
}

void AoATable::add_alias(std::string_view word, std::string_view proxy,
                         std::optional<double> rating) {
  if (rating) {
    check_rating(word, *rating);
  }
  aliases[normalize_concept(word)] = Alias{normalize_concept(proxy), rating};
}

AoATable parse_aoa_csv(std::string_view text) {
  AoATable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const auto fields = split_csv_line(t);
    const bool header = first_record && !fields.empty() && to_lower_ascii(fields[0]) == "word";
    first_record = false;
    if (header) {
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty()) {
      throw FormatError("AoA line " + std::to_string(line_no) +
                        ": expected 'word,aoa[,alias_of]'");
    }
    const double rating = parse_rating(fields[1], line_no);
    if (fields.size() == 3 && !fields[2].empty()) {
      table.add_alias(fields[0], fields[2], rating);
      const auto proxy = normalize_concept(fields[2]);
      if (!table.entries.contains(proxy)) {
        table.add(proxy, rating);
      }
    } else {
      table.add(fields[0], rating);
    }
  }
  return table;
}

AoATable read_aoa_csv(const std::filesystem::path& path) { return parse_aoa_csv(read_file(path)); }

AoAJoin join_aoa(const std::set<std::string>& classes, const AoATable& table) {
  AoAJoin join;
  for (const auto& cls : classes) {
    const auto key = normalize_concept(cls);
    if (auto it = table.entries.find(key); it != table.entries.end()) {
      join.matched.emplace(cls, it->second);
      continue;
    }
    if (auto al = table.aliases.find(key); al != table.aliases.end()) {
      if (al->second.rating) {
        join.matched.emplace(cls, *al->second.rating);
        continue;
      }
      if (auto it = table.entries.find(al->second.proxy); it != table.entries.end()) {
        join.matched.emplace(cls, it->second);
        continue;
      }
    }
    join.missing.insert(cls);
  }
  return join;
}

std::string_view to_string(TTestVariant v) { return v == TTestVariant::kPooled ? "pooled" : "welch"; }

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) {
    throw InputError("incomplete beta needs positive shape parameters");
  }
  if (x < 0.0 || x > 1.0 || std::isnan(x)) {
    throw InputError("incomplete beta argument outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) {
    throw InputError("t distribution needs df > 0");
  }
  if (std::isinf(t)) {
    return 0.0;
  }
  return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5);
}

TTestResult two_sample_ttest(const std::vector<double>& a, const std::vector<double>& b,
                             TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2) {
    throw InputError("t-test needs at least two values per sample (got " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  const auto ma = moments(a);
  const auto mb = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled_df = na + nb - 2.0;

  TTestResult r;
  r.mean_a = ma.mean;
  r.mean_b = mb.mean;
  r.n_a = a.size();
  r.n_b = b.size();
  r.variant = variant;

  double se = 0.0;
  if (variant == TTestVariant::kPooled) {
    const double sp2 = ((na - 1.0) * ma.var + (nb - 1.0) * mb.var) / pooled_df;
    se = std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    r.df = pooled_df;
  } else {
    const double va = ma.var / na;
    const double vb = mb.var / nb;
    se = std::sqrt(va + vb);
    const double denom = va * va / (na - 1.0) + vb * vb / (nb - 1.0);
    r.df = denom > 0.0 ? (va + vb) * (va + vb) / denom : pooled_df;
  }

  const double diff = ma.mean - mb.mean;
  if (se == 0.0) {
    if (diff == 0.0) {
      throw ComputationError("t statistic is undefined: both samples are constant with equal means");
    }
    r.t = diff > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = diff / se;
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

nlohmann::ordered_json ttest_report(const TTestResult& r) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(r.variant);
  j["mean_in"] = r.mean_b;
  j["mean_out"] = r.mean_a;
  if (std::isinf(r.t)) {
    j["t"] = r.t > 0 ? "inf" : "-inf";
  } else {
    j["t"] = r.t;
  }
  j["df"] = r.df;
  j["p"] = r.p;
  j["n_in"] = r.n_b;
  j["n_out"] = r.n_a;
  return j;
}

}  // namespace neuroscope
