// SPDX-License-Identifier: Apache-2.0
#include "dualre/encoder.hpp"
#include "dualre/errors.hpp"

#include <doctest.h>

using namespace dualre;

namespace {

/// Hidden size 1 with embedding[token] = token value and identity projection.
EncoderParams scalar_encoder(int vocab, int window) {
  EncoderConfig cfg;
  cfg.vocab_size = vocab;
  cfg.hidden = 1;
  cfg.context_window = window;
  Rng rng(1);
  EncoderParams p = EncoderParams::init(cfg, rng);
  for (int v = 0; v < vocab; ++v) p.embeddings.data[v] = static_cast<double>(v);
  p.projection.data[0] = 1.0;
  p.bias.data[0] = 0.0;
  return p;
}

EntityMentions mentions(EntityId id, std::vector<Span> spans) { return {id, std::move(spans)}; }

}  // namespace

TEST_CASE("window zero with identity projection returns the embedding rows") {
  EncoderConfig cfg;
  cfg.vocab_size = 6;
  cfg.hidden = 3;
  cfg.context_window = 0;
  Rng rng(2);
  EncoderParams p = EncoderParams::init(cfg, rng);
  p.projection = Tensor::matrix(RowMatrix::Identity(3, 3));
  p.bias = Tensor::zeros({3});
  Graph g;
  const std::vector<int> tokens = {4, 0, 4, 2};
  WordVectors w = encode_text(g, tokens, p);
  const auto x = w.projected.value().as_matrix();
  const auto e = p.embeddings.as_matrix();
  for (std::size_t i = 0; i < tokens.size(); ++i) CHECK(x.row(static_cast<Index>(i)).isApprox(e.row(tokens[i])));
}

TEST_CASE("context window averages neighbours clipped at document edges") {
  EncoderParams p = scalar_encoder(4, 1);
  Graph g;
  WordVectors w = encode_text(g, {1, 2, 3}, p);
  const Eigen::VectorXd& x = w.raw.value().data;
  CHECK(x[0] == doctest::Approx(1.5));
  CHECK(x[1] == doctest::Approx(2.0));
  CHECK(x[2] == doctest::Approx(2.5));
}

TEST_CASE("constant embeddings give identical word vectors") {
  EncoderConfig cfg;
  cfg.vocab_size = 5;
  cfg.hidden = 4;
  Rng rng(3);
  EncoderParams p = EncoderParams::init(cfg, rng);
  p.embeddings.data.setConstant(0.3);
  Graph g;
  const auto x = encode_text(g, {0, 3, 1, 4, 2}, p).projected.value().as_matrix();
  for (Index i = 1; i < x.rows(); ++i) CHECK(x.row(i).isApprox(x.row(0)));
}

TEST_CASE("intermediate entity averages spans then mentions") {
  EncoderParams p = scalar_encoder(6, 0);
  Graph g;
  WordVectors w = encode_text(g, {1, 3, 0, 5, 3}, p);
  CHECK(intermediate_entity(w, mentions(0, {{0, 1}})).item() == doctest::Approx(2.0));
  // mention means 2 and 4 average to 3
  CHECK(intermediate_entity(w, mentions(0, {{0, 1}, {3, 4}})).item() == doctest::Approx(3.0));
  CHECK_THROWS_AS(intermediate_entity(w, mentions(0, {{3, 5}})), ContractError);
  CHECK_THROWS_AS(intermediate_entity(w, mentions(0, {})), ContractError);
}

TEST_CASE("cross attention weights") {
  EncoderConfig cfg;
  cfg.vocab_size = 5;
  cfg.hidden = 3;
  cfg.context_window = 0;
  Rng rng(4);
  EncoderParams p = EncoderParams::init(cfg, rng);
  Graph g;
  WordVectors w = encode_text(g, {2, 2, 0, 1}, p);

  CrossAttentionResult single = cross_attention_encode(w, mentions(0, {{2, 2}}), mentions(1, {{3, 3}}), p);
  REQUIRE(single.head_weights.value().size() == 1);
  CHECK(single.head_weights.value().data[0] == doctest::Approx(1.0));
  CHECK(single.head.value().data.isApprox(w.projected.value().as_matrix().row(2).transpose()));

  CrossAttentionResult twin = cross_attention_encode(w, mentions(0, {{0, 1}}), mentions(1, {{3, 3}}), p);
  CHECK(twin.head_weights.value().data[0] == doctest::Approx(0.5));
  CHECK(twin.head_weights.value().data[1] == doctest::Approx(0.5));
  CHECK(twin.tail_weights.value().data.sum() == doctest::Approx(1.0));
}

TEST_CASE("cross attention depends on the partner entity, averaging does not") {
  EncoderConfig cfg;
  cfg.vocab_size = 8;
  cfg.hidden = 4;
  cfg.context_window = 0;
  Rng rng(9);
  EncoderParams p = EncoderParams::init(cfg, rng);
  for (Tensor* t : {&p.head.U, &p.head.V, &p.head.v}) t->data *= 4.0;
  Graph g;
  WordVectors w = encode_text(g, {1, 2, 3, 5, 6, 7}, p);
  const EntityMentions head = mentions(0, {{0, 0}, {2, 2}});
  const Eigen::VectorXd with_a = cross_attention_encode(w, head, mentions(1, {{4, 4}}), p).head.value().data;
  const Eigen::VectorXd with_b = cross_attention_encode(w, head, mentions(2, {{5, 5}}), p).head.value().data;
  CHECK((with_a - with_b).norm() > 1e-3);

  p.config.entity_encoder = EntityEncoderKind::Average;
  const Eigen::VectorXd avg_a = encode_entity_pair(w, head, mentions(1, {{4, 4}}), p).head.value().data;
  const Eigen::VectorXd avg_b = encode_entity_pair(w, head, mentions(2, {{5, 5}}), p).head.value().data;
  CHECK(avg_a == avg_b);
}

TEST_CASE("encoder gradients match finite differences") {
  for (bool projected : {false, true}) {
    EncoderConfig cfg;
    cfg.vocab_size = 6;
    cfg.hidden = 3;
    cfg.score_with_projected = projected;
    Rng rng(5);
    EncoderParams p = EncoderParams::init(cfg, rng);
    std::vector<Tensor*> inputs;
    for (NamedTensor& nt : p.parameters()) inputs.push_back(nt.tensor);
    auto build = [&p](Graph& g, std::span<const Var>) {
      WordVectors w = encode_text(g, {0, 4, 2, 5, 1, 3}, p);
      CrossAttentionResult r = cross_attention_encode(w, mentions(0, {{0, 1}, {4, 4}}), mentions(1, {{2, 3}}), p);
      return sum(r.head * r.tail) + sum(tanh(r.head));
    };
    CHECK(grad_check(build, inputs, 1e-6) <= 1e-6);
  }
}

TEST_CASE("encoder rejects invalid input") {
  EncoderParams p = scalar_encoder(3, 1);
  Graph g;
  CHECK_THROWS_AS(encode_text(g, {}, p), ContractError);
  CHECK_THROWS_AS(encode_text(g, {0, 3}, p), ContractError);
  CHECK_THROWS_AS(parse_entity_encoder("mean"), ConfigError);
  CHECK(parse_entity_encoder(to_string(EntityEncoderKind::Average)) == EntityEncoderKind::Average);
}
