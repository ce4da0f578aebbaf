#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace neuroscope {

/// One row of the published per-class AoA tables for the infant model's
/// discovered classes. `proxy` is the rated stand-in word when the class
/// name itself has no norm (empty otherwise).
struct AppendixAoARow {
  const char* class_name;
  double aoa;
  const char* proxy;
};

/// 31 in-vocabulary classes, in table order (class names kept verbatim).
const std::vector<AppendixAoARow>& appendix_in_vocab_rows();
/// 49 out-of-vocabulary classes, in table order.
const std::vector<AppendixAoARow>& appendix_out_of_vocab_rows();

/// Writes aoa.csv, manifest.json, vocab.txt, detected.txt and config.json
/// (a ready-to-run `stats` configuration) into `dir`.
void write_appendix_fixtures(const std::filesystem::path& dir);

}  // namespace neuroscope
