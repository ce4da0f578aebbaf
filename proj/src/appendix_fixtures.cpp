#include "neuroscope/appendix_fixtures.hpp"

#include <cstdio>

#include "json.hpp"
#include "neuroscope/io_util.hpp"
#include "neuroscope/tensor_store.hpp"

namespace neuroscope {

// Published AoA values (Kuperman et al. norms) for the classes discovered
// in the infant model. "abagel" and "umbrell" are reproduced as printed.

const std::vector<AppendixAoARow>& appendix_in_vocab_rows() {
  static const std::vector<AppendixAoARow> rows = {
      {"bike", 2.90, ""},      {"stamp", 2.94, ""},     {"microwave", 3.23, ""},
      {"pen", 3.33, ""},       {"knife", 3.37, ""},     {"broom", 3.43, ""},
      {"scissors", 4.05, ""},  {"button", 4.15, ""},    {"hairbrush", 4.15, ""},
      {"pizza", 4.26, ""},     {"kayak", 4.42, ""},     {"bucket", 4.50, ""},
      {"clock", 4.50, ""},     {"apple", 4.67, ""},     {"tricycle", 4.70, ""},
      {"camera", 4.78, ""},    {"abagel", 4.79, ""},    {"umbrell", 4.79, ""},
      {"desk", 5.00, ""},      {"hat", 5.11, ""},       {"cookie", 5.50, ""},
      {"stool", 5.56, ""},     {"necklace", 5.61, ""},  {"sofa", 5.63, ""},
      {"fan", 5.68, ""},       {"chair", 6.00, ""},     {"ball", 6.21, ""},
      {"sandwich", 6.33, ""},  {"pants", 7.67, ""},     {"socks", 8.80, "sock"},
      {"bowl", 8.90, ""},
  };
  return rows;
}

const std::vector<AppendixAoARow>& appendix_out_of_vocab_rows() {
  static const std::vector<AppendixAoARow> rows = {
      {"sippycup", 3.57, "cup"},
      {"toyrabbit", 3.94, "rabbit"},
      {"toyhorse", 4.15, "horse"},
      {"dresser", 4.28, ""},
      {"roadsign", 4.32, "sign"},
      {"rug", 4.61, ""},
      {"doorknob", 4.70, ""},
      {"mask", 4.80, ""},
      {"dollhouse", 4.86, ""},
      {"muffins", 5.11, "muffin"},
      {"tent", 5.16, ""},
      {"hammer", 5.42, ""},
      {"frisbee", 5.50, ""},
      {"cushion", 5.53, ""},
      {"watergun", 5.58, "gun"},
      {"ceilingfan", 5.63, "fan"},
      {"helmet", 5.71, ""},
      {"stapler", 5.83, ""},
      {"axe", 6.11, ""},
      {"speakers", 6.11, "speaker"},
      {"lawnmower", 6.11, ""},
      {"domino", 6.17, ""},
      {"recordplayer", 6.37, ""},
      {"pitcher", 6.42, ""},
      {"grill", 6.53, ""},
      {"collar", 6.56, ""},
      {"yarn", 6.61, ""},
      {"necktie", 6.63, ""},
      {"hanger", 6.78, ""},
      {"binoculars", 6.79, ""},
      {"telescope", 6.95, ""},
      {"seashell", 7.06, ""},
      {"golfball", 7.16, "golf"},
      {"dumbbell", 7.56, ""},
      {"bathsuit", 7.90, "bathrobe"},
      {"bowtie", 7.94, ""},
      {"rosary", 8.21, ""},
      {"calculator", 8.22, ""},
      {"suitcase", 8.22, ""},
      {"trunk", 8.30, ""},
      {"chessboard", 8.37, ""},
      {"compass", 8.44, ""},
      {"cupsaucer", 8.44, "saucer"},
      {"lantern", 8.55, ""},
      {"licenseplate", 8.70, "license"},
      {"pokercard", 9.10, "poker"},
      {"keyboard", 9.32, ""},
      {"ringbinder", 10.42, "binder"},
      {"powerstrip", 12.01, ""},
  };
  return rows;
}

void write_appendix_fixtures(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  std::string csv =
      "# Age-of-acquisition ratings (years) for the classes discovered in the infant model.\n"
      "# alias_of names the rated proxy word used when the class name has no norm.\n"
      "word,aoa,alias_of\n";
  auto add_rows = [&](const std::vector<AppendixAoARow>& rows) {
    for (const auto& r : rows) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%s,%.2f,%s\n", r.class_name, r.aoa, r.proxy);
      csv += buf;
    }
  };
  add_rows(appendix_in_vocab_rows());
  add_rows(appendix_out_of_vocab_rows());
  write_file_atomic(dir / "aoa.csv", csv);

  std::vector<std::pair<std::string, std::string>> images;
  std::string vocab;
  std::string detected;
  for (const auto& r : appendix_in_vocab_rows()) {
    images.emplace_back(std::string("appendix-") + r.class_name, r.class_name);
    vocab += std::string(r.class_name) + "\n";
  }
  for (const auto& r : appendix_out_of_vocab_rows()) {
    images.emplace_back(std::string("appendix-") + r.class_name, r.class_name);
  }
  const auto manifest = ProbeManifest::from_images("appendix-aoa", images);
  for (const auto& cls : manifest.class_list) {
    detected += cls + "\n";
  }
  write_manifest(manifest, dir / "manifest.json");
  write_file_atomic(dir / "vocab.txt", vocab);
  write_file_atomic(dir / "detected.txt", detected);

  nlohmann::ordered_json config;
  config["manifest"] = "manifest.json";
  config["vocab"] = "vocab.txt";
  config["detected"] = "detected.txt";
  config["aoa"] = "aoa.csv";
  config["out"] = "out";
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace neuroscope
