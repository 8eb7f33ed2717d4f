// SPDX-License-Identifier: Apache-2.0
//
// Toy text encoder and the two entity encoders.
//
// The text encoder averages token embeddings over a symmetric context window
// (x_i) and projects them linearly (x̂_i = W x_i + b). The average entity
// encoder returns the mention-averaged representations h_0 / t_0; the
// cross-attention encoder re-weights the words of one entity's mentions with
// attention conditioned on the other entity's h_0 / t_0.
#pragma once

#include "dualre/corpus.hpp"
#include "dualre/ndgrad.hpp"
#include "dualre/random.hpp"

#include <string>
#include <vector>

namespace dualre {

enum class EntityEncoderKind { CrossAttention, Average };

std::string_view to_string(EntityEncoderKind kind);
EntityEncoderKind parse_entity_encoder(std::string_view text);

struct EncoderConfig {
  Index vocab_size = 0;
  Index hidden = 16;
  Index attention_width = 0;  // 0 selects `hidden`
  int context_window = 1;
  /// Score attention with the projected x̂_i instead of the raw x_i.
  bool score_with_projected = false;
  EntityEncoderKind entity_encoder = EntityEncoderKind::CrossAttention;

  Index width() const { return attention_width > 0 ? attention_width : hidden; }
};

struct AttentionParams {
  Tensor U;  // [a, d]
  Tensor V;  // [a, d]
  Tensor b;  // [a]
  Tensor v;  // [a]
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct EncoderParams {
  EncoderConfig config;
  Tensor embeddings;  // [|V|, d]
  Tensor projection;  // [d, d]
  Tensor bias;        // [d]
  AttentionParams head;
  AttentionParams tail;

  /// Uniform(-1/sqrt(d), 1/sqrt(d)) initialization.
  static EncoderParams init(const EncoderConfig& config, Rng& rng);

  std::vector<NamedTensor> parameters();
};

struct WordVectors {
  Var raw;        // x_i, [n, d]
  Var projected;  // x̂_i, [n, d]
  Index length = 0;
};

struct EntityPairVectors {
  Var head;
  Var tail;
};

struct CrossAttentionResult {
  Var head;
  Var tail;
  Var head_weights;  // α^h over head.word_indices()
  Var tail_weights;  // α^t over tail.word_indices()
};

/// Windowed-average embedding lookup followed by the linear projection.
WordVectors encode_text(Graph& graph, const std::vector<int>& tokens, EncoderParams& params);

/// Mean over mentions of the mean of x̂_i over each mention span.
Var intermediate_entity(const WordVectors& words, const EntityMentions& mentions);

EntityPairVectors average_entity_encode(const WordVectors& words, const EntityMentions& head,
                                        const EntityMentions& tail);

CrossAttentionResult cross_attention_encode(const WordVectors& words, const EntityMentions& head,
                                            const EntityMentions& tail, EncoderParams& params);

/// Dispatches on params.config.entity_encoder.
EntityPairVectors encode_entity_pair(const WordVectors& words, const EntityMentions& head,
                                     const EntityMentions& tail, EncoderParams& params);

}  // namespace dualre
