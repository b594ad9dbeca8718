#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gres/params.hpp"
#include "gres/rng.hpp"
#include "gres/tape.hpp"

namespace gres {

// A differentiable scalar loss: builds the forward graph on the given tape
// from the registered parameter vars and returns the loss var. Must be
// deterministic (any sampling fixed outside the closure).
using LossFn = std::function<Var(Tape&, const ParamVars&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_coord;
};

// Compares reverse-mode gradients against central differences on up to
// max_coords randomly sampled parameter coordinates.
inline GradCheckResult grad_check(const LossFn& loss_fn, const ParamStore& params,
                                  double h, std::size_t max_coords = 200,
                                  std::uint64_t seed = 42) {
  // analytic gradients
  std::map<std::string, Tensor> analytic;
  {
    Tape tape;
    ParamVars pv = register_params(tape, params);
    Var loss = loss_fn(tape, pv);
    tape.backward(loss);
    analytic = collect_grads(tape, pv);
  }

  auto eval = [&](const ParamStore& p) {
    Tape tape(/*grad_enabled=*/false);
    ParamVars pv = register_params(tape, p);
    Var loss = loss_fn(tape, pv);
    return tape.value(loss)[0];
  };

  // flat coordinate index space over all parameters
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, t] : params)
    for (std::size_t i = 0; i < t.size(); ++i) coords.emplace_back(name, i);

  Rng rng(seed);
  if (coords.size() > max_coords) {
    rng.shuffle(coords);
    coords.resize(max_coords);
  }

  GradCheckResult res;
  ParamStore work = params;
  for (const auto& [name, i] : coords) {
    double orig = work.at(name)[i];
    work.at(name)[i] = orig + h;
    double up = eval(work);
    work.at(name)[i] = orig - h;
    double down = eval(work);
    work.at(name)[i] = orig;
    double fd = (up - down) / (2.0 * h);
    double an = analytic.at(name)[i];
    double denom = std::max({std::fabs(fd), std::fabs(an)});
    double err = denom < 1e-10 ? 0.0 : std::fabs(fd - an) / std::max(denom, 1e-6);
    if (err > res.max_rel_err) {
      res.max_rel_err = err;
      res.worst_coord = name + "[" + std::to_string(i) + "]";
    }
    ++res.coords_checked;
  }
  return res;
}

}  // namespace gres
