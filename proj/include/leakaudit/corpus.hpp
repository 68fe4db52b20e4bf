#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leakaudit/lexicon.hpp"

namespace leakaudit {

enum class Split { train, val, test };
std::string_view to_string(Split s);
Split parse_split(std::string_view s);

enum class Provenance { real, edg, masked, synthetic };
std::string_view to_string(Provenance p);

struct Letter {
  std::string id;
  std::string text;
  Gender gender = Gender::female;
  std::optional<Split> split;
  std::map<std::string, std::string> meta;

  bool operator==(const Letter&) const = default;
};

struct ClassCounts {
  std::size_t female = 0;
  std::size_t male = 0;
  std::size_t total() const { return female + male; }
  std::size_t of(Gender g) const { return g == Gender::male ? male : female; }
  bool operator==(const ClassCounts&) const = default;
};

struct Corpus {
  std::vector<Letter> letters;
  Provenance provenance = Provenance::real;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  ClassCounts class_counts() const;
  // Letters carrying the given split label, in corpus order.
  Corpus subset(Split split) const;
  bool has_splits() const;
};

// JSON lines: {"id":..., "text":..., "gender":0|1, "split"?:..., "meta"?:{...}}.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Throws DataError on duplicate ids, empty text or empty ids.
void validate_corpus(const Corpus& corpus);

struct SplitRatios {
  double train = 0.80;
  double val = 0.10;
  double test = 0.10;
};

// Per-class largest-remainder allocation over a seeded shuffle.
Corpus stratified_split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed);

// Downsamples the larger class to the size of the smaller one. Letter order
// is preserved; the minority class is untouched.
Corpus subsample_majority(const Corpus& corpus, std::uint64_t seed);

}  // namespace leakaudit
