#pragma once

#include "ger/tensor.hpp"

#include <vector>

namespace ger {

// S[i][j] = <m_i, e_j>; gold pairs on the diagonal.
ad::Var batch_score_matrix(ad::Graph& g, const std::vector<ad::Var>& mention_vecs,
                           const std::vector<ad::Var>& entity_vecs);

// Bidirectional in-batch softmax loss, mean over the batch:
//   L1_i = -S[i][i] + logsumexp_j S[i][j]   (negatives: other entities)
//   L2_i = -S[i][i] + logsumexp_j S[j][i]   (negatives: other mentions)
// Stable via max-subtracted logsumexp. Throws on non-square input.
ad::Var in_batch_loss(ad::Graph& g, ad::Var scores);

// Convenience for a plain matrix (builds a throwaway graph).
double in_batch_loss_value(const ad::Tensor& scores);

}  // namespace ger
