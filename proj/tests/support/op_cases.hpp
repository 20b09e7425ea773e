#pragma once

#include <vector>

#include "support/gradcheck.hpp"

namespace propnet::testing {

struct OpCase {
  const char* name;
  OpFn f;
  std::vector<Tensor> inputs;
};

// One case per differentiable op, inputs drawn from `rng`.
inline std::vector<OpCase> op_cases(Rng& rng) {
  auto rt = [&](Shape s) { return random_tensor(std::move(s), rng); };
  return std::vector<OpCase>{
      {"add", [](Tape&, const std::vector<Var>& v) { return ops::add(v[0], v[1]); }, {rt({2, 3}), rt({2, 3})}},
      {"sub", [](Tape&, const std::vector<Var>& v) { return ops::sub(v[0], v[1]); }, {rt({4}), rt({4})}},
      {"mul", [](Tape&, const std::vector<Var>& v) { return ops::mul(v[0], v[1]); }, {rt({2, 2}), rt({2, 2})}},
      {"scale", [](Tape&, const std::vector<Var>& v) { return ops::scale(v[0], -1.7); }, {rt({5})}},
      {"sum", [](Tape&, const std::vector<Var>& v) { return ops::sum(v[0]); }, {rt({2, 3})}},
      {"add_constant",
       [c = rt({4})](Tape&, const std::vector<Var>& v) { return ops::add_constant(v[0], c); }, {rt({4})}},
      {"reshape", [](Tape&, const std::vector<Var>& v) { return ops::reshape(v[0], {3, 2}); }, {rt({2, 3})}},
      {"dropout",
       [](Tape&, const std::vector<Var>& v) {
         Rng mask_rng(99);
         return ops::dropout(v[0], 0.3, true, mask_rng);
       },
       {rt({12})}},
      {"mean", [](Tape&, const std::vector<Var>& v) { return ops::mean(v[0]); }, {rt({3, 2})}},
      {"matmul", [](Tape&, const std::vector<Var>& v) { return ops::matmul(v[0], v[1]); }, {rt({3, 4}), rt({4, 2})}},
      {"transpose", [](Tape&, const std::vector<Var>& v) { return ops::transpose(v[0]); }, {rt({2, 5})}},
      {"add_row_bias", [](Tape&, const std::vector<Var>& v) { return ops::add_row_bias(v[0], v[1]); },
       {rt({3, 4}), rt({4})}},
      {"add_channel_bias", [](Tape&, const std::vector<Var>& v) { return ops::add_channel_bias(v[0], v[1]); },
       {rt({2, 3, 3}), rt({2})}},
      {"relu", [](Tape&, const std::vector<Var>& v) { return ops::relu(v[0]); }, {rt({10})}},
      {"softmax", [](Tape&, const std::vector<Var>& v) { return ops::softmax(v[0]); }, {rt({3, 4})}},
      {"log_softmax", [](Tape&, const std::vector<Var>& v) { return ops::log_softmax(v[0]); }, {rt({2, 5})}},
      {"cross_entropy", [](Tape&, const std::vector<Var>& v) { return ops::cross_entropy(v[0], 1); }, {rt({2})}},
      {"conv2d", [](Tape&, const std::vector<Var>& v) { return ops::conv2d(v[0], v[1], 1, 1); },
       {rt({2, 5, 5}), rt({3, 2, 3, 3})}},
      {"conv2d_stride2", [](Tape&, const std::vector<Var>& v) { return ops::conv2d(v[0], v[1], 2, 1); },
       {rt({2, 6, 6}), rt({2, 2, 3, 3})}},
      {"max_pool2d", [](Tape&, const std::vector<Var>& v) { return ops::max_pool2d(v[0], 2); }, {rt({2, 5, 5})}},
      {"global_avg_pool", [](Tape&, const std::vector<Var>& v) { return ops::global_avg_pool(v[0]); },
       {rt({3, 4, 4})}},
      {"gram_matrix", [](Tape&, const std::vector<Var>& v) { return ops::gram_matrix(v[0]); }, {rt({3, 3, 3})}},
      {"upper_triangle", [](Tape&, const std::vector<Var>& v) { return ops::upper_triangle(v[0]); }, {rt({4, 4})}},
      {"concat", [](Tape&, const std::vector<Var>& v) { return ops::concat(v); }, {rt({2, 3}), rt({1, 3})}},
      {"slice_rows", [](Tape&, const std::vector<Var>& v) { return ops::slice_rows(v[0], 1, 2); }, {rt({4, 2})}},
      {"slice_cols", [](Tape&, const std::vector<Var>& v) { return ops::slice_cols(v[0], 1, 2); }, {rt({3, 4})}},
      {"concat_cols", [](Tape&, const std::vector<Var>& v) { return ops::concat_cols(v); }, {rt({3, 2}), rt({3, 1})}},
      {"row", [](Tape&, const std::vector<Var>& v) { return ops::row(v[0], 2); }, {rt({3, 4})}},
      {"embedding",
       [](Tape&, const std::vector<Var>& v) {
         const int ids[] = {2, 0, 2, 1};
         return ops::embedding(v[0], ids);
       },
       {rt({3, 4})}},
      {"layer_norm", [](Tape&, const std::vector<Var>& v) { return ops::layer_norm(v[0], v[1], v[2]); },
       {rt({3, 5}), rt({5}), rt({5})}},
      {"attention",
       [](Tape&, const std::vector<Var>& v) {
         ops::AttentionProjections p{v[1], v[2], v[3], v[4], v[5], std::nullopt, v[6], std::nullopt};
         const int mask[] = {1, 1, 1, 0};
         return ops::multi_head_attention(v[0], v[0], v[0], p, 2, mask).output;
       },
       {rt({4, 4}), rt({4, 4}), rt({4, 4}), rt({4, 4}), rt({4, 4}), rt({4}), rt({4})}},
  };
}

}  // namespace propnet::testing
