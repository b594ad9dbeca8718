#include <gtest/gtest.h>

#include "gres/doc2vec.hpp"
#include "gres/rng.hpp"
#include "gres/tensor.hpp"

using namespace gres;

namespace {

// three topics with disjoint vocabularies, several docs each
std::vector<std::pair<EntityId, Doc>> topic_corpus(std::size_t docs_per_topic = 8,
                                                   std::uint64_t seed = 5) {
  Rng rng(seed);
  std::vector<std::pair<EntityId, Doc>> corpus;
  std::uint32_t uid = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t d = 0; d < docs_per_topic; ++d) {
      Doc doc;
      std::size_t len = 20 + rng.below(20);
      for (std::size_t k = 0; k < len; ++k)
        doc.push_back("t" + std::to_string(t) + "w" + std::to_string(rng.below(30)));
      corpus.emplace_back(user_id(uid++), std::move(doc));
    }
  }
  return corpus;
}

Doc2VecConfig test_config() {
  Doc2VecConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 50;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST(Doc2Vec, OutputCoversCorpusWithRightDimensions) {
  auto corpus = topic_corpus();
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  DocVectors dv = model.doc_vectors();
  EXPECT_EQ(dv.vecs.size(), corpus.size());
  for (const auto& [id, v] : dv.vecs) {
    EXPECT_EQ(v.size(), test_config().dim);
    EXPECT_GT(norm(v), 0.0);
    for (double x : v) EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(Doc2Vec, IdenticalDocumentsGetIdenticalVectors) {
  auto corpus = topic_corpus(4);
  corpus.emplace_back(user_id(100), corpus[0].second);  // duplicate content
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  DocVectors dv = model.doc_vectors();
  double cos = cosine(dv.at(user_id(0)), dv.at(user_id(100)));
  EXPECT_NEAR(cos, 1.0, 1e-9);
}

TEST(Doc2Vec, DeterministicPerSeed) {
  auto corpus = topic_corpus();
  Doc2Vec a = Doc2Vec::train(corpus, test_config());
  Doc2Vec b = Doc2Vec::train(corpus, test_config());
  EXPECT_EQ(a.doc_vectors().vecs, b.doc_vectors().vecs);
}

TEST(Doc2Vec, TopicsSeparateAfterTraining) {
  auto corpus = topic_corpus();
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  DocVectors dv = model.doc_vectors();
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  std::size_t per_topic = 8;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      double c = cosine(dv.at(corpus[i].first), dv.at(corpus[j].first));
      if (i / per_topic == j / per_topic) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  intra /= n_intra;
  inter /= n_inter;
  EXPECT_GT(intra, inter);
}

TEST(Doc2Vec, ReinferringTrainingDocumentRecoversItsVector) {
  auto corpus = topic_corpus();
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  DocVectors dv = model.doc_vectors();
  double cos = cosine(model.embed_query(corpus[3].second), dv.at(corpus[3].first));
  EXPECT_GT(cos, 0.8);
}

TEST(Doc2Vec, QueryEqualToTrainingDocMatchesNeighbor) {
  auto corpus = topic_corpus(4);
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  auto q = model.embed_query(corpus[1].second);
  const auto& trained = model.doc_vectors().at(corpus[1].first);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(q[i], trained[i], 1e-12);
}

TEST(Doc2Vec, ErrorPaths) {
  auto corpus = topic_corpus(4);
  Doc2Vec model = Doc2Vec::train(corpus, test_config());
  EXPECT_THROW(model.embed_query({}), std::invalid_argument);
  EXPECT_THROW(model.embed_query({"zz_out_of_vocab"}), std::invalid_argument);
  EXPECT_THROW(Doc2Vec::train({}, test_config()), std::invalid_argument);
  auto bad = topic_corpus(2);
  bad[0].second.clear();
  EXPECT_THROW(Doc2Vec::train(bad, test_config()), std::invalid_argument);
}
