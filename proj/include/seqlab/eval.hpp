#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqlab/corpus.hpp"

namespace seqlab {

struct EntitySpan {
  std::string type;
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

// Chunks of a labeling under conlleval's boundary rules. Works for IOB1,
// IOB2 and IOBES alike; malformed sequences are segmented the forgiving way
// (an orphan I-X opens a new chunk). RAW labels are read as B-<label>, so
// every non-O token is its own chunk. Output is sorted by start.
std::vector<EntitySpan> extract_entities(const std::vector<std::string>& labels,
                                         SchemeKind scheme);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

PRF make_prf(std::size_t tp, std::size_t fp, std::size_t fn);

struct EntityReport {
  PRF total;
  std::map<std::string, PRF> by_type;
  std::size_t tokens = 0;
  std::size_t correct_tokens = 0;
  double accuracy = 0.0;
};

using Labeling = std::vector<std::vector<std::string>>;

// Micro-averaged exact-span scoring. Throws AlignmentError when sentence or
// token counts differ.
EntityReport entity_prf(const Labeling& gold, const Labeling& pred, SchemeKind scheme);
double token_accuracy(const Labeling& gold, const Labeling& pred);

// conlleval-style text report.
void write_conlleval_report(std::ostream& out, const EntityReport& report);

}  // namespace seqlab
