#include "leakaudit/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <unistd.h>

#include "leakaudit/text.hpp"

namespace leakaudit {

namespace {

Json class_json(const ClassMetrics& m) {
  return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

Json rows_json(const std::vector<RankingRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back(Json{{"token", r.token}, {"pos", r.pos}, {"mean_shap", r.mean_shap}, {"support", r.support},
                       {"letters", r.letters}});
  }
  return out;
}

std::string plural_group(const std::string& pos) {
  if (pos == "other") return "other tokens";
  return pos + "s";
}

std::string f3(double v) { return format_fixed(v, 3); }

// Display width in code points so arrows and other UTF-8 stay aligned.
std::size_t width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80;
  return w;
}

bool right(const TextTable& t, std::size_t col) {
  if (col < t.right_align.size()) return t.right_align[col];
  return col > 0;
}

}  // namespace

Json to_json(const EvalReport& r) {
  return Json{{"total", r.total},
              {"accuracy", r.accuracy},
              {"female", class_json(r.female)},
              {"male", class_json(r.male)},
              {"macro", {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}}},
              {"weighted", {{"precision", r.weighted_precision}, {"recall", r.weighted_recall}, {"f1", r.weighted_f1}}},
              {"confusion",
               {{"true_female", {{"pred_female", r.confusion[0][0]}, {"pred_male", r.confusion[0][1]}}},
                {"true_male", {{"pred_female", r.confusion[1][0]}, {"pred_male", r.confusion[1][1]}}}}}};
}

Json to_json(const TfidfReport& r) {
  Json tables = Json::array();
  for (const auto& t : r.tables) {
    Json rows = Json::array();
    for (const auto& row : t.rows) {
      rows.push_back(Json{{"token", row.token}, {"female", row.score_female}, {"male", row.score_male},
                          {"diff", row.diff}, {"count", row.count}});
    }
    tables.push_back(Json{{"direction", to_string(t.direction)}, {"pos", t.pos}, {"rows", rows}});
  }
  return Json{{"top_k", r.options.top_k},
              {"min_count", r.options.min_count},
              {"female_tokens", r.female_tokens},
              {"male_tokens", r.male_tokens},
              {"vocabulary", r.rows.size()},
              {"tables", tables}};
}

Json to_json(const TokenRanking& r) {
  Json groups = Json::array();
  for (const auto& g : r.groups) groups.push_back(Json{{"pos", g.pos}, {"rows", rows_json(g.rows)}});
  return Json{{"direction", to_string(r.direction)}, {"min_support", r.min_support}, {"top_k", r.top_k},
              {"groups", groups}};
}

Json to_json(const RankResult& r) {
  Json out{{"letters_attributed", r.letters_attributed},
           {"exact_letters", r.exact_letters},
           {"sampled_letters", r.sampled_letters}};
  out["background_value"] = r.background_value ? Json(*r.background_value) : Json(nullptr);
  out["male"] = to_json(r.male);
  out["female"] = to_json(r.female);
  return out;
}

Json to_json(const ShapResult& r) {
  Json out{{"letter_id", r.letter_id},
           {"method", r.method == ShapMethod::exact ? "exact" : "permutation"},
           {"n_samples", r.n_samples},
           {"seed", r.seed},
           {"base_value", r.base_value}};
  out["background_value"] = r.background_value ? Json(*r.background_value) : Json(nullptr);
  out["full_value"] = r.full_value;
  Json phi = Json::array();
  for (std::size_t i = 0; i < r.phi.size(); ++i) {
    phi.push_back(Json{{"token", i < r.tokens.size() ? r.tokens[i] : std::to_string(i)},
                       {"phi", r.phi[i]},
                       {"std_error", r.std_error[i]}});
  }
  out["phi"] = phi;
  return out;
}

Json to_json(const FlipTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back(Json{{"token", r.token}, {"f_to_m", r.f_to_m}, {"m_to_f", r.m_to_f}, {"abs_diff", r.abs_diff}});
  }
  return Json{{"runs", t.runs},
              {"seed", t.seed},
              {"subset_rule", to_string(t.subset_rule)},
              {"subset", {{"female", t.subset_counts.female}, {"male", t.subset_counts.male}}},
              {"warnings", t.warnings},
              {"rows", rows}};
}

Json to_json(const AuditConfig& c) {
  Json out = Json::object();
  for (const auto& [k, v] : describe(c)) out[k] = v;
  return out;
}

std::string render_markdown(const TextTable& t) {
  std::string out = "|";
  for (const auto& h : t.headers) out += " " + h + " |";
  out += "\n|";
  for (std::size_t c = 0; c < t.headers.size(); ++c) out += right(t, c) ? "---:|" : ":---|";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& cell : row) out += " " + cell + " |";
    out += "\n";
  }
  return out;
}

std::string render_text(const TextTable& t, bool color) {
  std::vector<std::size_t> w(t.headers.size(), 0);
  for (std::size_t c = 0; c < t.headers.size(); ++c) w[c] = width(t.headers[c]);
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size() && c < w.size(); ++c) w[c] = std::max(w[c], width(row[c]));
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < w.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      const std::string pad(w[c] - width(cell), ' ');
      if (c > 0) out += "  ";
      out += right(t, c) ? pad + cell : cell + pad;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string header = line(t.headers);
  if (color) header = "\x1b[1m" + header.substr(0, header.size() - 1) + "\x1b[0m\n";
  std::size_t total = 0;
  for (std::size_t c = 0; c < w.size(); ++c) total += w[c] + (c > 0 ? 2 : 0);
  std::string out = header + std::string(total, '-') + "\n";
  for (const auto& row : t.rows) out += line(row);
  return out;
}

bool color_enabled(std::FILE* stream) {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && no_color[0] != '\0') return false;
  return ::isatty(::fileno(stream)) != 0;
}

TextTable metrics_table(const std::vector<std::pair<std::string, EvalReport>>& models) {
  TextTable t;
  t.headers = {"Model", "Gender", "Precision", "Recall", "F1", "Acc.", "Macro Precision", "Macro Recall",
               "Macro F1", "Wtd. Precision", "Wtd. Recall", "Wtd. F1"};
  t.right_align = {false, false};
  t.right_align.resize(t.headers.size(), true);
  for (const auto& [name, r] : models) {
    t.rows.push_back({name, "Female", f3(r.female.precision), f3(r.female.recall), f3(r.female.f1), f3(r.accuracy),
                      f3(r.macro_precision), f3(r.macro_recall), f3(r.macro_f1), f3(r.weighted_precision),
                      f3(r.weighted_recall), f3(r.weighted_f1)});
    t.rows.push_back({"", "Male", f3(r.male.precision), f3(r.male.recall), f3(r.male.f1), "", "", "", "", "", "", ""});
  }
  return t;
}

TextTable ablation_table(const std::vector<AblationRow>& rows) {
  TextTable t;
  t.headers = {"Dataset", "Acc.", "Macro P", "Macro R", "Macro F1"};
  for (const auto& row : rows) {
    std::string f1 = f3(row.report.macro_f1);
    if (row.macro_f1_delta) {
      const double points = *row.macro_f1_delta * 100.0;
      const char* arrow = points < 0 ? "↓" : (points > 0 ? "↑" : "=");
      f1 += std::string(" (") + arrow + " " + format_fixed(std::abs(points), 1) + "%)";
    }
    t.rows.push_back({row.dataset, f3(row.report.accuracy), f3(row.report.macro_precision),
                      f3(row.report.macro_recall), f1});
  }
  return t;
}

TextTable flip_table(const FlipTable& ft) {
  TextTable t;
  t.headers = {"Token", "F → M Count", "M → F Count", "Absolute Difference"};
  for (const auto& r : ft.rows) {
    t.rows.push_back({r.token, format_fixed(r.f_to_m, 2), format_fixed(r.m_to_f, 2), format_fixed(r.abs_diff, 2)});
  }
  return t;
}

std::vector<std::pair<std::string, TextTable>> ranking_tables(const TokenRanking& r) {
  std::vector<std::pair<std::string, TextTable>> out;
  const std::string who = r.direction == Gender::male ? "Male" : "Female";
  for (const auto& g : r.groups) {
    TextTable t;
    t.headers = {"Token", "Mean SHAP", "Support"};
    for (const auto& row : g.rows) {
      t.rows.push_back({row.token, format_fixed(row.mean_shap, 6), std::to_string(row.support)});
    }
    out.emplace_back(who + " " + plural_group(g.pos), std::move(t));
  }
  return out;
}

std::vector<std::pair<std::string, TextTable>> tfidf_tables(const TfidfReport& r) {
  std::vector<std::pair<std::string, TextTable>> out;
  for (const auto& table : r.tables) {
    TextTable t;
    t.headers = {"Token", "Female", "Male", "Diff"};
    for (const auto& row : table.rows) {
      t.rows.push_back({row.token, format_fixed(row.score_female, 6), format_fixed(row.score_male, 6),
                        format_fixed(std::abs(row.diff), 6)});
    }
    const std::string who = table.direction == Gender::male ? "Male" : "Female";
    out.emplace_back(who + " " + plural_group(table.pos), std::move(t));
  }
  return out;
}

}  // namespace leakaudit
