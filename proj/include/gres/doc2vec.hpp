#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gres/entities.hpp"
#include "gres/rng.hpp"
#include "gres/tape.hpp"
#include "gres/tensor.hpp"

namespace gres {

struct Doc2VecConfig {
  std::size_t dim = 64;
  std::size_t epochs = 40;
  std::size_t negatives = 5;
  double lr = 0.05;
  std::uint64_t seed = 1;
};

struct DocVectors {
  std::size_t dim = 0;
  std::map<EntityId, std::vector<double>> vecs;

  const std::vector<double>& at(EntityId id) const {
    auto it = vecs.find(id);
    if (it == vecs.end())
      throw std::out_of_range("DocVectors: no vector for " + id.str());
    return it->second;
  }
};

// PV-DBOW with negative sampling. Word output vectors and provisional doc
// vectors are trained jointly; final doc vectors are then re-inferred against
// the frozen word matrix from a content-hash-seeded start, so two identical
// documents always map to identical vectors and inference of unseen documents
// (embed_query) follows the exact same path.
class Doc2Vec {
 public:
  static Doc2Vec train(const std::vector<std::pair<EntityId, Doc>>& corpus,
                       const Doc2VecConfig& cfg) {
    if (corpus.empty()) throw std::invalid_argument("doc2vec: empty corpus");
    if (cfg.dim < 2) throw std::invalid_argument("doc2vec: dim must be >= 2");
    for (const auto& [id, doc] : corpus)
      if (doc.empty())
        throw std::invalid_argument("doc2vec: empty document for " + id.str());

    Doc2Vec model;
    model.cfg_ = cfg;

    // vocabulary in sorted token order
    std::map<std::string, std::size_t> counts;
    for (const auto& [id, doc] : corpus)
      for (const auto& tok : doc) counts[tok]++;
    std::vector<double> noise_weights;
    for (const auto& [tok, n] : counts) {
      model.vocab_.emplace(tok, model.vocab_.size());
      noise_weights.push_back(std::pow(static_cast<double>(n), 0.75));
    }
    model.noise_ = CumulativeSampler(noise_weights);

    std::size_t v = model.vocab_.size();
    model.word_out_ = Tensor({v, cfg.dim});

    // token id sequences
    std::vector<std::vector<std::size_t>> seqs;
    seqs.reserve(corpus.size());
    for (const auto& [id, doc] : corpus) {
      std::vector<std::size_t> s;
      s.reserve(doc.size());
      for (const auto& tok : doc) s.push_back(model.vocab_.at(tok));
      seqs.push_back(std::move(s));
    }

    // phase 1: joint training of provisional doc vectors and word outputs
    Rng rng(derive_seed(cfg.seed, "d2v.train"));
    std::vector<std::vector<double>> dvecs(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d)
      dvecs[d] = init_vector(content_seed(corpus[d].second, cfg.seed), cfg.dim);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      double lr = epoch_lr(cfg, e);
      for (std::size_t d = 0; d < corpus.size(); ++d)
        model.sgd_pass(dvecs[d], seqs[d], lr, rng, /*update_words=*/true);
    }

    // phase 2: settle doc vectors against the frozen word matrix
    for (std::size_t d = 0; d < corpus.size(); ++d)
      model.doc_vecs_.emplace(corpus[d].first, model.infer(seqs[d], corpus[d].second));

    return model;
  }

  const DocVectors doc_vectors() const {
    DocVectors dv;
    dv.dim = cfg_.dim;
    dv.vecs = doc_vecs_;
    return dv;
  }

  std::size_t dim() const { return cfg_.dim; }
  std::size_t vocab_size() const { return vocab_.size(); }

  // gradient-descent inference of a new document against frozen word weights
  std::vector<double> embed_query(const Doc& doc) const {
    if (doc.empty()) throw std::invalid_argument("embed_query: empty document");
    std::vector<std::size_t> seq;
    for (const auto& tok : doc) {
      auto it = vocab_.find(tok);
      if (it != vocab_.end()) seq.push_back(it->second);
    }
    if (seq.empty())
      throw std::invalid_argument("embed_query: no in-vocabulary tokens in document");
    return infer(seq, doc);
  }

 private:
  std::vector<double> infer(const std::vector<std::size_t>& seq, const Doc& doc) const {
    std::uint64_t cs = content_seed(doc, cfg_.seed);
    std::vector<double> vec = init_vector(cs, cfg_.dim);
    Rng rng(splitmix64(cs));
    auto* self = const_cast<Doc2Vec*>(this);
    for (std::size_t e = 0; e < cfg_.epochs; ++e)
      self->sgd_pass(vec, seq, epoch_lr(cfg_, e), rng, /*update_words=*/false);
    return vec;
  }

  // one pass of PV-DBOW negative sampling over a document
  void sgd_pass(std::vector<double>& dvec, const std::vector<std::size_t>& seq, double lr,
                Rng& rng, bool update_words) {
    std::size_t dim = cfg_.dim;
    std::vector<double> dacc(dim);
    for (std::size_t target : seq) {
      std::fill(dacc.begin(), dacc.end(), 0.0);
      for (std::size_t k = 0; k <= cfg_.negatives; ++k) {
        std::size_t w;
        double label;
        if (k == 0) {
          w = target;
          label = 1.0;
        } else {
          w = noise_.sample(rng);
          if (w == target) continue;
          label = 0.0;
        }
        double* wrow = word_out_.row_ptr(w);
        double z = 0.0;
        for (std::size_t j = 0; j < dim; ++j) z += dvec[j] * wrow[j];
        double g = (label - Tape::stable_sigmoid(z)) * lr;
        for (std::size_t j = 0; j < dim; ++j) {
          dacc[j] += g * wrow[j];
          if (update_words) wrow[j] += g * dvec[j];
        }
      }
      for (std::size_t j = 0; j < dim; ++j) dvec[j] += dacc[j];
    }
  }

  static double epoch_lr(const Doc2VecConfig& cfg, std::size_t epoch) {
    double frac = 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs);
    return cfg.lr * std::max(frac, 0.05);
  }

  static std::uint64_t content_seed(const Doc& doc, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& tok : doc) {
      h = fnv1a64(tok.data(), tok.size(), h);
      h ^= 0x1f;  // token separator
      h *= 0x100000001b3ULL;
    }
    return splitmix64(h ^ seed);
  }

  static std::vector<double> init_vector(std::uint64_t seed, std::size_t dim) {
    Rng rng(seed);
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-0.5, 0.5) / static_cast<double>(dim);
    return v;
  }

  Doc2VecConfig cfg_;
  std::map<std::string, std::size_t> vocab_;
  CumulativeSampler noise_;
  Tensor word_out_;
  std::map<EntityId, std::vector<double>> doc_vecs_;
};

}  // namespace gres
