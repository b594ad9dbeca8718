#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "gres/params.hpp"
#include "gres/tensor.hpp"

namespace gres {

struct AdamConfig {
  double lr = 0.0015;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are keyed by parameter name and lazily
// created, so the same state object survives parameter-set changes only if
// shapes stay fixed (they do here).
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::size_t step() const { return step_; }

  void apply(ParamStore& params, const std::map<std::string, Tensor>& grads) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (auto& [name, p] : params) {
      auto git = grads.find(name);
      if (git == grads.end())
        throw std::invalid_argument("adam_step: missing gradient for '" + name + "'");
      const Tensor& g = git->second;
      if (!g.same_shape(p))
        throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                    " does not match parameter '" + name + "' " +
                                    p.shape_str());
      if (!g.all_finite())
        throw std::runtime_error("adam_step: non-finite gradient for '" + name + "'");
      Tensor& m = moment(m_, name, p);
      Tensor& v = moment(v_, name, p);
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    }
  }

  const Tensor& first_moment(const std::string& name) const { return m_.at(name); }
  const Tensor& second_moment(const std::string& name) const { return v_.at(name); }

 private:
  static Tensor& moment(std::map<std::string, Tensor>& store, const std::string& name,
                        const Tensor& like) {
    auto it = store.find(name);
    if (it == store.end()) it = store.emplace(name, Tensor(like.shape())).first;
    return it->second;
  }

  AdamConfig cfg_;
  std::size_t step_ = 0;
  std::map<std::string, Tensor> m_, v_;
};

}  // namespace gres
