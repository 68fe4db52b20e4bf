#include "leakaudit/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "leakaudit/error.hpp"
#include "leakaudit/random.hpp"
#include "leakaudit/text.hpp"

namespace leakaudit {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "validation") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + std::string(s) + "'");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::real: return "real";
    case Provenance::edg: return "edg";
    case Provenance::masked: return "masked";
    case Provenance::synthetic: return "synthetic";
  }
  return "real";
}

ClassCounts Corpus::class_counts() const {
  ClassCounts c;
  for (const auto& l : letters) (l.gender == Gender::male ? c.male : c.female) += 1;
  return c;
}

Corpus Corpus::subset(Split split) const {
  Corpus out;
  out.provenance = provenance;
  for (const auto& l : letters) {
    if (l.split == split) out.letters.push_back(l);
  }
  return out;
}

bool Corpus::has_splits() const {
  return !letters.empty() &&
         std::all_of(letters.begin(), letters.end(), [](const Letter& l) { return l.split.has_value(); });
}

void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& l : corpus.letters) {
    if (l.id.empty()) throw DataError("letter with empty id");
    if (l.text.empty()) throw DataError("letter '" + l.id + "' has empty text");
    if (!seen.insert(l.id).second) throw DataError("duplicate letter id '" + l.id + "'");
  }
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    Letter l;
    try {
      if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError(line_no, "missing string 'id'");
      if (!obj.contains("text") || !obj["text"].is_string()) throw ParseError(line_no, "missing string 'text'");
      if (!obj.contains("gender") || !obj["gender"].is_number_integer()) {
        throw ParseError(line_no, "missing integer 'gender'");
      }
      l.id = obj["id"].get<std::string>();
      l.text = obj["text"].get<std::string>();
      const auto g = obj["gender"].get<long long>();
      if (g != 0 && g != 1) throw ParseError(line_no, "gender must be 0 or 1");
      l.gender = static_cast<Gender>(g);
      if (obj.contains("split") && !obj["split"].is_null()) {
        if (!obj["split"].is_string()) throw ParseError(line_no, "'split' must be a string");
        l.split = parse_split(obj["split"].get<std::string>());
      }
      if (obj.contains("meta") && !obj["meta"].is_null()) {
        if (!obj["meta"].is_object()) throw ParseError(line_no, "'meta' must be an object");
        for (const auto& [k, v] : obj["meta"].items()) {
          if (!v.is_string()) throw ParseError(line_no, "meta value '" + k + "' must be a string");
          l.meta.emplace(k, v.get<std::string>());
        }
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    if (l.id.empty()) throw ParseError(line_no, "empty id");
    if (l.text.empty()) throw ParseError(line_no, "empty text for '" + l.id + "'");
    if (!seen.insert(l.id).second) throw ParseError(line_no, "duplicate id '" + l.id + "'");
    corpus.letters.push_back(std::move(l));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  return parse_corpus(in);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& l : corpus.letters) {
    ordered_json obj;
    obj["id"] = l.id;
    obj["text"] = l.text;
    obj["gender"] = static_cast<int>(l.gender);
    if (l.split) obj["split"] = std::string(to_string(*l.split));
    if (!l.meta.empty()) {
      ordered_json meta = ordered_json::object();
      for (const auto& [k, v] : l.meta) meta[k] = v;
      obj["meta"] = std::move(meta);
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(corpus));
}

Corpus stratified_split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw UsageError("split ratios must be nonnegative");
  }
  validate_corpus(corpus);

  Corpus out = corpus;
  Rng rng(seed);
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  constexpr std::array<Split, 3> kSplits = {Split::train, Split::val, Split::test};
  for (Gender g : {Gender::female, Gender::male}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < out.letters.size(); ++i) {
      if (out.letters[i].gender == g) members.push_back(i);
    }
    if (members.size() < 3) {
      throw DataError("class '" + std::string(to_string(g)) + "' has " +
                      std::to_string(members.size()) + " letters; need at least 3 to stratify");
    }
    rng.shuffle(std::span<std::size_t>(members));

    const double n = static_cast<double>(members.size());
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double ideal = n * r[k];
      counts[k] = static_cast<std::size_t>(std::floor(ideal + 1e-9));
      frac[k] = ideal - static_cast<double>(counts[k]);
      assigned += counts[k];
    }
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b] + 1e-12; });
    for (std::size_t k = 0; assigned < members.size(); k = (k + 1) % 3) {
      counts[order[k]] += 1;
      ++assigned;
    }

    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t c = 0; c < counts[k]; ++c) out.letters[members[pos++]].split = kSplits[k];
    }
  }
  return out;
}

Corpus subsample_majority(const Corpus& corpus, std::uint64_t seed) {
  const ClassCounts counts = corpus.class_counts();
  if (counts.female == 0 || counts.male == 0) {
    throw DataError("subsample_majority needs both classes present");
  }
  if (counts.female == counts.male) return corpus;
  const Gender majority = counts.male > counts.female ? Gender::male : Gender::female;
  const std::size_t keep = std::min(counts.female, counts.male);

  std::vector<std::size_t> majority_idx;
  for (std::size_t i = 0; i < corpus.letters.size(); ++i) {
    if (corpus.letters[i].gender == majority) majority_idx.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(majority_idx));
  std::vector<char> selected(corpus.letters.size(), 0);
  for (std::size_t k = 0; k < keep; ++k) selected[majority_idx[k]] = 1;

  Corpus out;
  out.provenance = corpus.provenance;
  for (std::size_t i = 0; i < corpus.letters.size(); ++i) {
    if (corpus.letters[i].gender != majority || selected[i]) out.letters.push_back(corpus.letters[i]);
  }
  return out;
}

}  // namespace leakaudit
