#include <doctest.h>

#include <cstring>
#include <sstream>

#include "seqlab/batch.hpp"
#include "seqlab/error.hpp"
#include "seqlab/persist.hpp"
#include "seqlab/train.hpp"
#include "support/synthetic.hpp"

using namespace seqlab;

namespace {

struct Fixture {
  Corpus corpus = testing::memorization_corpus(10, 8, 6);
  EmbeddingTable table = testing::random_embeddings(corpus, 3, 4);
  Model model;

  explicit Fixture(TrainConfig config = {}) {
    config.byte_dim = 4;
    config.byte_hidden = 3;
    config.word_hidden = 4;
    model = Model(config, corpus.labels, EmbeddingInfo::of(table));
    RngStream rng(2);
    model.init(rng);
  }

  std::string bytes() const {
    std::ostringstream out;
    save_model(model, out);
    return out.str();
  }
};

LoadErrorKind load_error(const std::string& data, const EmbeddingTable* table) {
  std::istringstream in(data);
  try {
    load_model(in, table);
  } catch (const LoadError& e) {
    return e.kind();
  }
  FAIL("expected a load error");
  return LoadErrorKind::kIo;
}

}  // namespace

TEST_CASE("save then load reproduces every tensor bit for bit") {
  for (bool crf : {true, false})
    for (bool words : {true, false}) {
      TrainConfig config;
      config.use_crf = crf;
      config.use_words = words;
      Fixture f(config);
      std::istringstream in(f.bytes());
      const Model back = load_model(in, &f.table);
      CHECK(back.config == f.model.config);
      CHECK(back.labels.labels() == f.model.labels.labels());
      CHECK(back.embedding == f.model.embedding);
      const auto a = f.model.params();
      const auto b = back.params();
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k]->name == b[k]->name);
        CHECK(std::memcmp(a[k]->value.data().data(), b[k]->value.data().data(),
                          a[k]->value.size() * sizeof(double)) == 0);
      }
      CHECK(predict(f.model, &f.table, f.corpus.sentences) == predict(back, &f.table, f.corpus.sentences));
    }
}

TEST_CASE("the header is readable on its own") {
  Fixture f;
  std::istringstream in(f.bytes());
  const ModelHeader h = read_model_header(in);
  CHECK(h.config == f.model.config);
  CHECK(h.embedding.vocab_hash == f.table.vocabulary_hash());
  CHECK(h.labels.size() == f.corpus.labels.size());
}

TEST_CASE("load errors are distinct") {
  Fixture f;
  const std::string good = f.bytes();

  std::string magic = good;
  magic[0] = 'X';
  CHECK(load_error(magic, &f.table) == LoadErrorKind::kBadMagic);

  std::string version = good;
  version[8] = 2;
  CHECK(load_error(version, &f.table) == LoadErrorKind::kVersionMismatch);

  std::istringstream cut(good.substr(0, good.size() - 20));
  try {
    load_model(cut, &f.table);
    FAIL("expected truncation");
  } catch (const LoadError& e) {
    CHECK(e.kind() == LoadErrorKind::kTruncated);
    CHECK(std::string(e.what()).find("truncated record transitions") != std::string::npos);
  }

  EmbeddingTable other = f.table;
  other.add("zzz-not-in-corpus", std::vector<double>(3, 0.0));
  CHECK(load_error(good, &other) == LoadErrorKind::kVocabularyMismatch);
  CHECK(load_error(good, nullptr) == LoadErrorKind::kVocabularyMismatch);
  CHECK(load_error("", &f.table) == LoadErrorKind::kTruncated);
}

TEST_CASE("a saved best model reproduces its dev score") {
  Fixture f;
  TrainConfig config = f.model.config;
  config.epochs = 5;
  config.eta0 = 0.02;
  config.batch_size = 4;
  config.early_stop_metric = EarlyStopMetric::kTokenAccuracy;
  const Corpus dev = f.corpus;
  const auto result = run_training(config, f.corpus, dev, &f.table);
  std::ostringstream out;
  save_model(result.model, out);
  std::istringstream in(out.str());
  const Model back = load_model(in, &f.table);
  const double best = result.history.epochs[result.history.best_epoch - 1].dev_metric;
  CHECK(evaluate_metric(back, &f.table, dev.sentences, config.early_stop_metric) == best);
}
