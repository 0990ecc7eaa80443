#include "seqlab/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string_view>

#include "seqlab/error.hpp"

namespace seqlab {

namespace {

struct TagType {
  char tag;
  std::string_view type;
};

TagType split_label(std::string_view label, SchemeKind scheme) {
  if (label == "O" || label.empty()) return {'O', {}};
  if (scheme == SchemeKind::kRaw) return {'B', label};
  if (label.size() >= 2 && label[1] == '-') return {label[0], label.substr(2)};
  // Unprefixed non-O label: read it as a chunk continuation of its own type.
  return {'I', label};
}

bool ends_chunk(TagType prev, TagType cur) {
  if (prev.tag == 'E' || prev.tag == 'S') return true;
  if ((prev.tag == 'B' || prev.tag == 'I') && (cur.tag == 'B' || cur.tag == 'S' || cur.tag == 'O'))
    return true;
  return prev.tag != 'O' && prev.type != cur.type;
}

bool starts_chunk(TagType prev, TagType cur) {
  if (cur.tag == 'B' || cur.tag == 'S') return true;
  if ((cur.tag == 'I' || cur.tag == 'E') && (prev.tag == 'O' || prev.tag == 'E' || prev.tag == 'S'))
    return true;
  return cur.tag != 'O' && prev.type != cur.type;
}

void check_aligned(const Labeling& gold, const Labeling& pred) {
  if (gold.size() != pred.size())
    throw AlignmentError("sentence count differs: gold " + std::to_string(gold.size()) + ", pred " +
                         std::to_string(pred.size()));
  for (std::size_t s = 0; s < gold.size(); ++s)
    if (gold[s].size() != pred[s].size())
      throw AlignmentError("token count differs in sentence " + std::to_string(s + 1));
}

}  // namespace

std::vector<EntitySpan> extract_entities(const std::vector<std::string>& labels,
                                         SchemeKind scheme) {
  std::vector<EntitySpan> spans;
  TagType prev{'O', {}};
  bool open = false;
  EntitySpan current;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const TagType cur = split_label(labels[i], scheme);
    if (open && ends_chunk(prev, cur)) {
      current.end = i - 1;
      spans.push_back(current);
      open = false;
    }
    if (starts_chunk(prev, cur)) {
      current = EntitySpan{std::string(cur.type), i, i};
      open = true;
    }
    prev = cur;
  }
  if (open) {
    current.end = labels.size() - 1;
    spans.push_back(std::move(current));
  }
  return spans;
}

PRF make_prf(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

EntityReport entity_prf(const Labeling& gold, const Labeling& pred, SchemeKind scheme) {
  check_aligned(gold, pred);
  struct Counts {
    std::size_t tp = 0, found = 0, gold = 0;
  };
  std::map<std::string, Counts> counts;
  Counts total;
  EntityReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = extract_entities(gold[s], scheme);
    const auto p = extract_entities(pred[s], scheme);
    for (const auto& sp : g) {
      ++counts[sp.type].gold;
      ++total.gold;
    }
    for (const auto& sp : p) {
      ++counts[sp.type].found;
      ++total.found;
      if (std::find(g.begin(), g.end(), sp) != g.end()) {
        ++counts[sp.type].tp;
        ++total.tp;
      }
    }
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      ++report.tokens;
      if (gold[s][i] == pred[s][i]) ++report.correct_tokens;
    }
  }
  auto to_prf = [](const Counts& c) { return make_prf(c.tp, c.found - c.tp, c.gold - c.tp); };
  report.total = to_prf(total);
  for (const auto& [type, c] : counts) report.by_type[type] = to_prf(c);
  report.accuracy = report.tokens ? static_cast<double>(report.correct_tokens) /
                                        static_cast<double>(report.tokens)
                                  : 0.0;
  return report;
}

double token_accuracy(const Labeling& gold, const Labeling& pred) {
  check_aligned(gold, pred);
  std::size_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s)
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      ++total;
      if (gold[s][i] == pred[s][i]) ++correct;
    }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

void write_conlleval_report(std::ostream& out, const EntityReport& report) {
  char buf[256];
  const auto& t = report.total;
  std::snprintf(buf, sizeof buf, "processed %zu tokens with %zu phrases; found: %zu phrases; correct: %zu.\n",
                report.tokens, t.tp + t.fn, t.tp + t.fp, t.tp);
  out << buf;
  std::snprintf(buf, sizeof buf, "accuracy: %6.2f%%; precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f\n",
                100.0 * report.accuracy, 100.0 * t.precision, 100.0 * t.recall, 100.0 * t.f1);
  out << buf;
  for (const auto& [type, prf] : report.by_type) {
    std::snprintf(buf, sizeof buf, "%17s: precision: %6.2f%%; recall: %6.2f%%; FB1: %6.2f  %zu\n",
                  type.c_str(), 100.0 * prf.precision, 100.0 * prf.recall, 100.0 * prf.f1,
                  prf.tp + prf.fp);
    out << buf;
  }
}

}  // namespace seqlab
