#pragma once

// Straight-line re-implementation of the message-passing computation with
// dense matrices and explicit loops, kept independent of the tensor ops it
// cross-checks. Only reads parameter values through public accessors.

#include <map>
#include <string>
#include <vector>

#include "tgn/engine.hpp"

namespace tgn::testing {

using Mat = std::vector<std::vector<double>>;

Mat to_mat(const Tensor& t);
Tensor to_tensor(const Mat& m);
Mat dense_of(const SparseBinaryMatrix& m);

Mat oracle_mlp(const nn::Mlp& mlp, const Mat& x);
std::pair<Mat, Mat> oracle_lstm(const nn::LstmCell& cell, const Mat& input, const Mat& h,
                                const Mat& c);

std::map<std::string, Mat> oracle_run(const CompiledTgn& plan, const TgnParams& params,
                                      const GraphBatch& batch, int t_max);

double max_abs_diff(const Mat& a, const Tensor& b);

}  // namespace tgn::testing
