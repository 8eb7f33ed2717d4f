// SPDX-License-Identifier: Apache-2.0
#include "dualre/encoder.hpp"

#include "dualre/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dualre {

std::string_view to_string(EntityEncoderKind kind) {
  return kind == EntityEncoderKind::CrossAttention ? "cross" : "average";
}

EntityEncoderKind parse_entity_encoder(std::string_view text) {
  if (text == "cross") return EntityEncoderKind::CrossAttention;
  if (text == "average") return EntityEncoderKind::Average;
  throw ConfigError("unknown entity encoder '" + std::string(text) + "' (expected cross|average)");
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  if (config.vocab_size <= 0 || config.hidden <= 0) {
    throw ContractError("encoder: vocab_size and hidden must be positive");
  }
  if (config.context_window < 0) throw ContractError("encoder: context_window must be non-negative");
  const Index d = config.hidden;
  const Index a = config.width();
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  EncoderParams p;
  p.config = config;
  p.embeddings = uniform_tensor({config.vocab_size, d}, bound, rng);
  p.projection = uniform_tensor({d, d}, bound, rng);
  p.bias = uniform_tensor({d}, bound, rng);
  for (AttentionParams* side : {&p.head, &p.tail}) {
    side->U = uniform_tensor({a, d}, bound, rng);
    side->V = uniform_tensor({a, d}, bound, rng);
    side->b = uniform_tensor({a}, bound, rng);
    side->v = uniform_tensor({a}, bound, rng);
  }
  return p;
}

std::vector<NamedTensor> EncoderParams::parameters() {
  return {
      {"encoder.embeddings", &embeddings},
      {"encoder.projection", &projection},
      {"encoder.bias", &bias},
      {"encoder.attention.head.U", &head.U},
      {"encoder.attention.head.V", &head.V},
      {"encoder.attention.head.b", &head.b},
      {"encoder.attention.head.v", &head.v},
      {"encoder.attention.tail.U", &tail.U},
      {"encoder.attention.tail.V", &tail.V},
      {"encoder.attention.tail.b", &tail.b},
      {"encoder.attention.tail.v", &tail.v},
  };
}

WordVectors encode_text(Graph& graph, const std::vector<int>& tokens, EncoderParams& params) {
  if (tokens.empty()) throw ContractError("encode_text: empty document");
  const Index n = static_cast<Index>(tokens.size());
  std::vector<Index> ids;
  ids.reserve(tokens.size());
  for (int tok : tokens) {
    if (tok < 0 || tok >= params.config.vocab_size) {
      throw ContractError("encode_text: token id " + std::to_string(tok) + " outside vocabulary of size " +
                          std::to_string(params.config.vocab_size));
    }
    ids.push_back(tok);
  }

  Var lookup = index_select(graph.leaf(params.embeddings), std::move(ids));
  Var raw = lookup;
  const int w = params.config.context_window;
  if (w > 0) {
    RowMatrix window = RowMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
      const Index lo = std::max<Index>(0, i - w);
      const Index hi = std::min<Index>(n - 1, i + w);
      window.row(i).segment(lo, hi - lo + 1).setConstant(1.0 / static_cast<double>(hi - lo + 1));
    }
    raw = matmul(graph.constant(Tensor::matrix(window)), lookup);
  }
  Var projected = matmul(raw, transpose(graph.leaf(params.projection))) + graph.leaf(params.bias);
  return {raw, projected, n};
}

Var intermediate_entity(const WordVectors& words, const EntityMentions& mentions) {
  mentions.validate(static_cast<int>(words.length));
  // Two-level average folded into one weight per word.
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(words.length);
  const double per_mention = 1.0 / static_cast<double>(mentions.mentions.size());
  for (const Span& s : mentions.mentions) {
    const double w = per_mention / static_cast<double>(s.end - s.start + 1);
    for (int i = s.start; i <= s.end; ++i) weights[i] += w;
  }
  Graph& graph = *words.projected.graph;
  return matmul(graph.constant(Tensor::vector(weights)), words.projected);
}

EntityPairVectors average_entity_encode(const WordVectors& words, const EntityMentions& head,
                                        const EntityMentions& tail) {
  return {intermediate_entity(words, head), intermediate_entity(words, tail)};
}

namespace {

struct Attended {
  Var vector;
  Var weights;
};

Attended attend(const WordVectors& words, const EntityMentions& mentions, Var other, AttentionParams& side,
                bool score_with_projected) {
  Graph& graph = *words.projected.graph;
  std::vector<Index> idx = mentions.word_indices();
  Var scored_words = index_select(score_with_projected ? words.projected : words.raw, idx);
  Var context = matmul(graph.leaf(side.V), other) + graph.leaf(side.b);
  Var hidden = tanh(matmul(scored_words, transpose(graph.leaf(side.U))) + context);
  Var alpha = softmax(matmul(hidden, graph.leaf(side.v)));
  Var vector = matmul(alpha, index_select(words.projected, std::move(idx)));
  return {vector, alpha};
}

}  // namespace

CrossAttentionResult cross_attention_encode(const WordVectors& words, const EntityMentions& head,
                                            const EntityMentions& tail, EncoderParams& params) {
  Var h0 = intermediate_entity(words, head);
  Var t0 = intermediate_entity(words, tail);
  const bool projected = params.config.score_with_projected;
  Attended h = attend(words, head, t0, params.head, projected);
  Attended t = attend(words, tail, h0, params.tail, projected);
  return {h.vector, t.vector, h.weights, t.weights};
}

EntityPairVectors encode_entity_pair(const WordVectors& words, const EntityMentions& head,
                                     const EntityMentions& tail, EncoderParams& params) {
  if (params.config.entity_encoder == EntityEncoderKind::Average) return average_entity_encode(words, head, tail);
  CrossAttentionResult r = cross_attention_encode(words, head, tail, params);
  return {r.head, r.tail};
}

}  // namespace dualre
