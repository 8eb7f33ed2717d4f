// SPDX-License-Identifier: Apache-2.0
#include "dualre/output_layer.hpp"

#include "dualre/errors.hpp"

#include <cmath>

namespace dualre {

OutputLayerParams OutputLayerParams::init(const OutputLayerConfig& config, Rng& rng) {
  if (config.hidden <= 0 || config.outputs <= 0) throw ContractError("output layer: hidden and outputs must be positive");
  if (!(config.epsilon > 0.0)) throw ContractError("output layer: sanity bound must be positive");
  const Index d = config.hidden;
  const Index r = config.outputs;
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));

  OutputLayerParams p;
  p.config = config;
  p.W(Net::HA) = uniform_tensor({d, r, d}, bound, rng);
  p.b(Net::HA) = uniform_tensor({r}, bound, rng);
  p.W(Net::DS) = p.W(Net::HA);
  p.b(Net::DS) = p.b(Net::HA);
  for (Net n : {Net::Mu, Net::Sigma}) {
    p.W(n) = uniform_tensor({d, r, d}, bound, rng);
    p.b(n) = uniform_tensor({r}, bound, rng);
  }
  return p;
}

std::vector<NamedTensor> OutputLayerParams::parameters() {
  return {
      {"output.ha.W", &W(Net::HA)},       {"output.ha.b", &b(Net::HA)},
      {"output.ds.W", &W(Net::DS)},       {"output.ds.b", &b(Net::DS)},
      {"output.mu.W", &W(Net::Mu)},       {"output.mu.b", &b(Net::Mu)},
      {"output.sigma.W", &W(Net::Sigma)}, {"output.sigma.b", &b(Net::Sigma)},
  };
}

Var bilinear(Var h, Var t, Var W, Var b) {
  const Shape& ws = W.shape();
  const Shape& hs = h.shape();
  const Shape& ts = t.shape();
  if (ws.size() != 3 || hs.size() != 1 || ts.size() != 1 || b.shape().size() != 1 || hs[0] != ws[0] ||
      ts[0] != ws[2] || b.shape()[0] != ws[1]) {
    throw ContractError("bilinear: dimension mismatch h" + to_string(hs) + " W" + to_string(ws) + " t" +
                        to_string(ts) + " b" + to_string(b.shape()));
  }
  const Index d = ws[0];
  const Index r = ws[1];
  const Index e = ws[2];
  // h^T reshape(W, [d, r*e]) -> [r*e] -> [r, e] -> times t -> [r]
  Var ht = matmul(h, reshape(W, {d, r * e}));
  return matmul(reshape(ht, {r, e}), t) + b;
}

Var prediction_activation(Var scores, Task task) {
  return task == Task::Sentence ? softmax(scores) : sigmoid(scores);
}

Var network_output(Graph& graph, Var h, Var t, OutputLayerParams& params, Net net) {
  Var s = bilinear(h, t, graph.leaf(params.W(net)), graph.leaf(params.b(net)));
  switch (net) {
    case Net::HA:
    case Net::DS:
      return prediction_activation(s, params.config.task);
    case Net::Mu:
      return tanh(s);
    case Net::Sigma:
      return add(softplus(s), graph.constant(params.config.epsilon));
  }
  throw ContractError("unknown network");
}

PredictionVars forward(Graph& graph, Var h, Var t, OutputLayerParams& params, Heads heads) {
  PredictionVars out;
  out.p_ha = network_output(graph, h, t, params, Net::HA);
  if (heads == Heads::All) {
    out.p_ds = network_output(graph, h, t, params, Net::DS);
    out.mu = network_output(graph, h, t, params, Net::Mu);
    out.sigma = network_output(graph, h, t, params, Net::Sigma);
    out.has_ds = true;
    out.has_parameters = true;
  }
  return out;
}

PredictionOutput values(const PredictionVars& vars) {
  PredictionOutput out;
  out.p_ha = vars.p_ha.value().data;
  if (vars.has_ds) out.p_ds = vars.p_ds.value().data;
  if (vars.has_parameters) {
    out.mu = vars.mu.value().data;
    out.sigma = vars.sigma.value().data;
  }
  return out;
}

PredictionOutput forward(const Eigen::VectorXd& h, const Eigen::VectorXd& t, OutputLayerParams& params) {
  Graph graph(false);
  return values(forward(graph, graph.constant(Tensor::vector(h)), graph.constant(Tensor::vector(t)), params));
}

}  // namespace dualre
