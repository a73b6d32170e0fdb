#pragma once

// Central finite-difference gradient checker. The forward closure receives a
// fresh tape, watches whatever parameters it differentiates and returns the
// scalar loss; the checker perturbs each watched element by +-h and compares
// against the analytic gradients of one backward pass.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tgn/tensor.hpp"

namespace tgn::testing {

struct GradCheckReport {
  double max_rel_err = 0;
  std::string worst;
  index checked = 0;
};

inline GradCheckReport finite_difference_check(
    const std::vector<std::pair<std::string, Tensor*>>& params,
    const std::function<Tensor(Tape&)>& forward, double h = 1e-5) {
  GradCheckReport report;

  Tape tape;
  const Tensor loss = forward(tape);
  const Gradients grads = tape.backward(loss);

  std::vector<Tensor> analytic;
  for (const auto& [name, param] : params) {
    if (param->tape() != &tape || param->node() == kNoNode) {
      throw Error("gradcheck: forward() did not watch " + name);
    }
    analytic.push_back(grads.contains(param->node())
                           ? grads.at(param->node())
                           : Tensor(param->rows(), param->cols()));
  }

  for (size_t p = 0; p < params.size(); ++p) {
    Tensor* param = params[p].second;
    for (index i = 0; i < param->size(); ++i) {
      const real saved = param->data()[i];
      param->data()[i] = saved + static_cast<real>(h);
      Tape plus_tape;
      const double f_plus = forward(plus_tape).value();
      param->data()[i] = saved - static_cast<real>(h);
      Tape minus_tape;
      const double f_minus = forward(minus_tape).value();
      param->data()[i] = saved;

      const double fd = (f_plus - f_minus) / (2 * h);
      const double an = analytic[p].data()[i];
      const double rel = std::abs(an - fd) / std::max({1e-6, std::abs(an), std::abs(fd)});
      report.checked++;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = params[p].first + "[" + std::to_string(i) + "] analytic " +
                       std::to_string(an) + " vs fd " + std::to_string(fd);
      }
    }
  }
  return report;
}

}  // namespace tgn::testing
