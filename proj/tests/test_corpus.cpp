#include <doctest.h>

#include <set>
#include <sstream>

#include "seqlab/corpus.hpp"
#include "seqlab/error.hpp"
#include "seqlab/eval.hpp"
#include "support/synthetic.hpp"

using namespace seqlab;

namespace {

Corpus parse(const std::string& text, int token_col = 0, int label_col = -1) {
  std::istringstream in(text);
  return parse_conll(in, token_col, label_col);
}

std::vector<std::string> L(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("parse_conll reads a single-token file") {
  const Corpus c = parse("EU NNP B-ORG\n\n");
  REQUIRE(c.sentences.size() == 1);
  REQUIRE(c.sentences[0].size() == 1);
  CHECK(c.sentences[0].tokens[0].surface == "EU");
  CHECK(c.labels.label(*c.sentences[0].tokens[0].label) == "B-ORG");
}

TEST_CASE("parse_conll splits blocks on blank lines and drops -DOCSTART-") {
  const Corpus c = parse("-DOCSTART- -X- O\n\nEU B-ORG\nrejects O\n\n  \nGerman B-MISC\n");
  REQUIRE(c.sentences.size() == 2);
  CHECK(c.sentences[0].size() == 2);
  CHECK(c.sentences[1].size() == 1);
  CHECK(c.labels.labels() == L({"B-ORG", "O", "B-MISC"}));
}

TEST_CASE("parse_conll handles empty input and column errors") {
  CHECK(parse("").sentences.empty());
  CHECK(parse("\n\n").sentences.empty());
  try {
    parse("EU NNP B-ORG\nrejects VBZ\n", 0, 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("a\x01 O\n"), ParseError);
}

TEST_CASE("write_conll then parse_conll is a fixed point") {
  const Corpus c = testing::memorization_corpus(20, 15, 3);
  std::ostringstream once;
  write_conll(once, c);
  const Corpus back = parse(once.str(), 0, 1);
  std::ostringstream twice;
  write_conll(twice, back);
  CHECK(once.str() == twice.str());
  CHECK(back.sentences.size() == c.sentences.size());
}

TEST_CASE("convert_scheme examples") {
  CHECK(convert_scheme(L({"B-PER", "I-PER"}), SchemeKind::kIob2, SchemeKind::kIobes) == L({"B-PER", "E-PER"}));
  CHECK(convert_scheme(L({"I-PER", "I-PER"}), SchemeKind::kIob1, SchemeKind::kIobes) == L({"B-PER", "E-PER"}));
  CHECK(convert_scheme(L({"B-LOC", "O", "I-ORG"}), SchemeKind::kIob1, SchemeKind::kIobes) ==
        L({"S-LOC", "O", "S-ORG"}));
  // IOB1 needs B- only between adjacent chunks of one type.
  CHECK(convert_scheme(L({"S-PER", "S-PER", "S-LOC"}), SchemeKind::kIobes, SchemeKind::kIob1) ==
        L({"I-PER", "B-PER", "I-LOC"}));
  CHECK(convert_scheme(L({"NN", "VB"}), SchemeKind::kRaw, SchemeKind::kRaw) == L({"NN", "VB"}));
}

TEST_CASE("convert_scheme rejects malformed labels with their position") {
  try {
    convert_scheme(L({"O", "B-PER", "X-PER"}), SchemeKind::kIob2, SchemeKind::kIobes);
    FAIL("expected a conversion error");
  } catch (const ConversionError& e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(convert_scheme(L({"E-PER"}), SchemeKind::kIob2, SchemeKind::kIobes), ConversionError);
  CHECK_THROWS_AS(convert_scheme(L({"B-"}), SchemeKind::kIob2, SchemeKind::kIobes), ConversionError);
  CHECK_THROWS_AS(convert_scheme(L({"NN"}), SchemeKind::kRaw, SchemeKind::kIobes), ConfigError);
}

TEST_CASE("convert_scheme preserves spans and round-trips through IOBES") {
  RngStream rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    for (SchemeKind from : {SchemeKind::kIob1, SchemeKind::kIob2}) {
      const auto labels = testing::random_chunk_labels(n, from, rng);
      const auto iobes = convert_scheme(labels, from, SchemeKind::kIobes);
      CHECK(iobes.size() == n);
      CHECK(extract_entities(iobes, SchemeKind::kIobes) == extract_entities(labels, from));
      const auto iob2 = convert_scheme(labels, from, SchemeKind::kIob2);
      CHECK(convert_scheme(iobes, SchemeKind::kIobes, SchemeKind::kIob2) == iob2);
      CHECK(convert_scheme(iob2, SchemeKind::kIob2, SchemeKind::kIob2) == iob2);
    }
  }
}

TEST_CASE("dev_split sizes and determinism") {
  std::vector<Sentence> ten(10);
  for (std::size_t i = 0; i < ten.size(); ++i) ten[i].tokens.push_back({"w" + std::to_string(i), 0});
  const Split a = dev_split(ten, 0.1, 42);
  const Split b = dev_split(ten, 0.1, 42);
  CHECK(a.train.size() == 9);
  REQUIRE(a.dev.size() == 1);
  CHECK(a.dev[0].tokens[0].surface == b.dev[0].tokens[0].surface);

  std::set<std::string> all;
  for (const auto& s : a.train) all.insert(s.tokens[0].surface);
  for (const auto& s : a.dev) CHECK(all.insert(s.tokens[0].surface).second);
  CHECK(all.size() == 10);

  std::vector<Sentence> four(ten.begin(), ten.begin() + 4);
  const Split half = dev_split(four, 0.5, 7);
  CHECK(half.train.size() == 2);
  CHECK(half.dev.size() == 2);

  CHECK(dev_split_size(8936, 0.1) == 894);
  CHECK(dev_split_size(10, 0.25) == 3);  // 2.5 rounds half up
  CHECK_THROWS_AS(dev_split(std::vector<Sentence>(1), 0.5, 1), SplitError);
  CHECK_THROWS_AS(dev_split(ten, 1.0, 1), SplitError);
  CHECK_THROWS_AS(dev_split(ten, 0.0, 1), SplitError);
}

TEST_CASE("remap_labels merges vocabularies") {
  Corpus a = parse("x B-PER\ny O\n");
  Corpus b = parse("z B-LOC\nw B-PER\n");
  LabelVocab shared;
  remap_labels(a, shared);
  remap_labels(b, shared);
  CHECK(shared.labels() == L({"B-PER", "O", "B-LOC"}));
  CHECK(b.labels.label(*b.sentences[0].tokens[1].label) == "B-PER");
  CHECK(*b.sentences[0].tokens[1].label == 0);
}
