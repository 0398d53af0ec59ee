#include "ger/loss.hpp"

#include <stdexcept>

namespace ger {

ad::Var batch_score_matrix(ad::Graph& g, const std::vector<ad::Var>& mention_vecs,
                           const std::vector<ad::Var>& entity_vecs) {
  if (mention_vecs.empty() || mention_vecs.size() != entity_vecs.size())
    throw std::invalid_argument("batch_score_matrix: need equal, non-empty vector lists");
  ad::Var m = mention_vecs.size() == 1 ? mention_vecs[0] : g.concat(mention_vecs, 0);
  ad::Var e = entity_vecs.size() == 1 ? entity_vecs[0] : g.concat(entity_vecs, 0);
  return g.matmul(m, g.transpose(e));
}

ad::Var in_batch_loss(ad::Graph& g, ad::Var scores) {
  const std::size_t b = scores.rows();
  if (b == 0 || scores.cols() != b)
    throw std::invalid_argument("in_batch_loss: score matrix must be square, got " +
                                std::to_string(scores.rows()) + "x" +
                                std::to_string(scores.cols()));
  ad::Var lse_rows = g.logsumexp(scores, 1);                 // b x 1
  ad::Var lse_cols = g.transpose(g.logsumexp(scores, 0));    // b x 1
  ad::Var gold = g.diag(scores);                             // b x 1
  ad::Var per_pair = g.add(g.add(lse_rows, lse_cols), g.scale(gold, -2.0));
  return g.mean_axis(per_pair, 0);  // 1 x 1
}

double in_batch_loss_value(const ad::Tensor& scores) {
  ad::Graph g;
  ad::Var s = g.input(scores);
  return in_batch_loss(g, s).value().v[0];
}

}  // namespace ger
