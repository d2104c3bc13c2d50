#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grok/data.hpp"
#include "grok/matrix.hpp"
#include "grok/numerics.hpp"
#include "grok/rng.hpp"

namespace grok {

constexpr std::size_t kSeqLen = 3;  // every sample is the triple (a, b, =)

enum class NormKind { NONE, LAYER_NORM, RMS_NORM };

// Which pathways receive a norm on their inputs.
struct NormPlacement {
  bool at_query_input = false;
  bool at_key_input = false;
  bool at_value_input = false;
  bool at_mlp_input = false;
  NormKind kind = NormKind::NONE;

  bool any() const { return at_query_input || at_key_input || at_value_input || at_mlp_input; }
};

// The six studied placements. "A*" normalizes all of q/k/v inputs, "M" the
// MLP input, "A^qk" and "A^v" restrict to the named attention channels.
inline NormPlacement norm_preset(const std::string& name, NormKind kind = NormKind::LAYER_NORM) {
  NormPlacement np;
  np.kind = kind;
  if (name == "NoLN") {
    np.kind = NormKind::NONE;
  } else if (name == "A*") {
    np.at_query_input = np.at_key_input = np.at_value_input = true;
  } else if (name == "M+A*") {
    np.at_query_input = np.at_key_input = np.at_value_input = np.at_mlp_input = true;
  } else if (name == "M") {
    np.at_mlp_input = true;
  } else if (name == "A^qk") {
    np.at_query_input = np.at_key_input = true;
  } else if (name == "A^v") {
    np.at_value_input = true;
  } else {
    throw std::invalid_argument("unknown norm preset: " + name);
  }
  return np;
}

inline const std::vector<std::string>& norm_preset_names() {
  static const std::vector<std::string> names = {"NoLN", "A*", "M+A*", "M", "A^qk", "A^v"};
  return names;
}

inline std::string norm_preset_name(const NormPlacement& np) {
  for (const std::string& n : norm_preset_names()) {
    NormPlacement cand = norm_preset(n, np.any() ? np.kind : NormKind::NONE);
    if (cand.at_query_input == np.at_query_input && cand.at_key_input == np.at_key_input &&
        cand.at_value_input == np.at_value_input && cand.at_mlp_input == np.at_mlp_input)
      return n;
  }
  return "custom";
}

struct ModelConfig {
  int p = 113;
  std::size_t d_model = 128;
  std::size_t n_heads = 4;
  std::size_t d_mlp = 512;
  std::size_t n_layers = 1;
  NormPlacement norm;
  double init_std = 0.02;
  double init_bounds = 2.0;  // truncation at +/- init_bounds * init_std
  double norm_eps = 1e-5;
  bool causal_attention = true;

  std::size_t vocab() const { return static_cast<std::size_t>(p) + 1; }
  std::size_t d_head() const { return d_model / n_heads; }

  void validate() const {
    if (p < 2) throw std::invalid_argument("ModelConfig: p must be >= 2");
    if (n_heads == 0 || d_model % n_heads != 0)
      throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
    if (n_layers == 0) throw std::invalid_argument("ModelConfig: n_layers must be >= 1");
    if (!(init_std > 0.0)) throw std::invalid_argument("ModelConfig: init_std must be > 0");
    if (!(init_bounds > 0.0)) throw std::invalid_argument("ModelConfig: init_bounds must be > 0");
    if (!(norm_eps > 0.0)) throw std::invalid_argument("ModelConfig: norm_eps must be > 0");
  }
};

// Learnable gain (and, for LayerNorm, bias) of one norm site. Stored as 1 x d.
struct NormSiteParams {
  RealMatrix gamma;
  std::optional<RealMatrix> beta;  // absent for RMSNorm
};

struct LayerParams {
  RealMatrix w_q, w_k, w_v, w_o;  // d x d, q/k/v column-partitioned by head
  RealMatrix w_1;                 // D x d
  RealMatrix w_2;                 // d x D
  std::optional<NormSiteParams> norm_q, norm_k, norm_v, norm_mlp;
};

// All learnable tensors. Embedding and unembedding are separate (no tying).
struct ParamSet {
  RealMatrix w_e;  // d x (p+1)
  RealMatrix pos;  // 3 x d
  std::vector<LayerParams> layers;
  RealMatrix w_u;  // (p+1) x d
};

enum class TensorRole { WEIGHT, GAIN, BIAS };

// Visits every tensor in a fixed canonical order. This order defines the
// checkpoint manifest, the optimizer state layout and the init sequence.
template <typename PS, typename F>
void for_each_tensor(PS& params, F&& f) {
  f("w_e", params.w_e, TensorRole::WEIGHT);
  f("pos", params.pos, TensorRole::WEIGHT);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& lp = params.layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    f(prefix + "w_q", lp.w_q, TensorRole::WEIGHT);
    f(prefix + "w_k", lp.w_k, TensorRole::WEIGHT);
    f(prefix + "w_v", lp.w_v, TensorRole::WEIGHT);
    f(prefix + "w_o", lp.w_o, TensorRole::WEIGHT);
    f(prefix + "w_1", lp.w_1, TensorRole::WEIGHT);
    f(prefix + "w_2", lp.w_2, TensorRole::WEIGHT);
    auto visit_site = [&](const char* site, std::optional<NormSiteParams>& ns) {
      if (!ns) return;
      f(prefix + site + std::string(".gamma"), ns->gamma, TensorRole::GAIN);
      if (ns->beta) f(prefix + site + std::string(".beta"), *ns->beta, TensorRole::BIAS);
    };
    visit_site("norm_q", lp.norm_q);
    visit_site("norm_k", lp.norm_k);
    visit_site("norm_v", lp.norm_v);
    visit_site("norm_mlp", lp.norm_mlp);
  }
  f("w_u", params.w_u, TensorRole::WEIGHT);
}

template <typename PS, typename F>
void for_each_tensor_const(const PS& params, F&& f) {
  for_each_tensor(const_cast<PS&>(params), [&](const std::string& name, RealMatrix& t,
                                               TensorRole role) {
    f(name, static_cast<const RealMatrix&>(t), role);
  });
}

inline ParamSet make_param_shapes(const ModelConfig& cfg) {
  cfg.validate();
  ParamSet ps;
  ps.w_e = RealMatrix(cfg.d_model, cfg.vocab());
  ps.pos = RealMatrix(kSeqLen, cfg.d_model);
  ps.layers.resize(cfg.n_layers);
  for (auto& lp : ps.layers) {
    lp.w_q = RealMatrix(cfg.d_model, cfg.d_model);
    lp.w_k = RealMatrix(cfg.d_model, cfg.d_model);
    lp.w_v = RealMatrix(cfg.d_model, cfg.d_model);
    lp.w_o = RealMatrix(cfg.d_model, cfg.d_model);
    lp.w_1 = RealMatrix(cfg.d_mlp, cfg.d_model);
    lp.w_2 = RealMatrix(cfg.d_model, cfg.d_mlp);
    auto site = [&](bool active) -> std::optional<NormSiteParams> {
      if (!active || cfg.norm.kind == NormKind::NONE) return std::nullopt;
      NormSiteParams ns;
      ns.gamma = RealMatrix(1, cfg.d_model);
      ns.gamma.fill(1.0);
      if (cfg.norm.kind == NormKind::LAYER_NORM) ns.beta = RealMatrix(1, cfg.d_model);
      return ns;
    };
    lp.norm_q = site(cfg.norm.at_query_input);
    lp.norm_k = site(cfg.norm.at_key_input);
    lp.norm_v = site(cfg.norm.at_value_input);
    lp.norm_mlp = site(cfg.norm.at_mlp_input);
  }
  ps.w_u = RealMatrix(cfg.vocab(), cfg.d_model);
  return ps;
}

// Truncated-normal init for every weight tensor; norm gains start at 1 and
// biases at 0. Sampling follows the canonical tensor order.
inline ParamSet init_params(const ModelConfig& cfg, RngStream& rng) {
  ParamSet ps = make_param_shapes(cfg);
  for_each_tensor(ps, [&](const std::string&, RealMatrix& t, TensorRole role) {
    if (role != TensorRole::WEIGHT) return;
    const double bound = cfg.init_bounds * cfg.init_std;
    std::vector<double> v =
        sample_truncated_normal(rng, 0.0, cfg.init_std, -bound, bound, t.size());
    t.data = std::move(v);
  });
  return ps;
}

enum class Probe { NONE, UNIT_NORM_MLP_INPUT };

// Cached activations of one norm site, enough for the backward pass.
struct NormSiteTrace {
  std::array<RealMatrix, kSeqLen> zhat;               // standardized values, pre-gain
  std::array<std::vector<double>, kSeqLen> inv_std;   // per-sample 1/sqrt(var+eps)
  std::array<RealMatrix, kSeqLen> out;                // gamma * zhat + beta
};

struct LayerTrace {
  std::array<RealMatrix, kSeqLen> x;  // layer input per position, B x d
  std::optional<NormSiteTrace> nq, nk, nv, nm;
  std::array<RealMatrix, kSeqLen> q, k, v;
  // attn[i][j]: B x n_heads softmaxed scores of query position i against key
  // position j; empty above the causal diagonal.
  std::array<std::array<RealMatrix, kSeqLen>, kSeqLen> attn;
  std::array<RealMatrix, kSeqLen> attn_mix;  // concatenated per-head sums of a*v
  std::array<RealMatrix, kSeqLen> xt;        // attention output after w_o
  std::array<RealMatrix, kSeqLen> y;         // x + xt
  std::array<RealMatrix, kSeqLen> mlp_in;    // input fed to w_1 (normed/probed)
  std::array<RealMatrix, kSeqLen> hidden;    // post-ReLU, B x D
  std::array<RealMatrix, kSeqLen> yt;        // MLP output
  std::array<bool, kSeqLen> mlp_done = {false, false, false};
  std::array<bool, kSeqLen> attn_out_done = {false, false, false};
};

struct ForwardTrace {
  std::vector<Sample> batch;
  std::vector<LayerTrace> layers;
  RealMatrix prelogits;  // y_3 + yt_3 of the last layer, B x d
  RealMatrix logits;     // alpha * prelogits * w_u^T, B x vocab
  double alpha = 1.0;
  Probe probe = Probe::NONE;
};

namespace detail {

// Applies the configured norm row-wise over a B x d matrix, recording what
// the backward pass needs.
inline void apply_norm_site(const RealMatrix& z, const NormSiteParams& np, NormKind kind,
                            double eps, std::size_t position, NormSiteTrace& tr) {
  RealMatrix zhat = z;
  std::vector<double>& ivs = tr.inv_std[position];
  ivs.resize(z.rows);
  for (std::size_t b = 0; b < z.rows; ++b) {
    NormStats st = kind == NormKind::LAYER_NORM ? layer_standardize(zhat.row(b), z.cols, eps)
                                                : rms_standardize(zhat.row(b), z.cols, eps);
    ivs[b] = st.inv_std;
  }
  RealMatrix out(z.rows, z.cols);
  const double* gamma = np.gamma.row(0);
  const double* beta = np.beta ? np.beta->row(0) : nullptr;
  for (std::size_t b = 0; b < z.rows; ++b) {
    const double* zh = zhat.row(b);
    double* o = out.row(b);
    for (std::size_t c = 0; c < z.cols; ++c) o[c] = zh[c] * gamma[c] + (beta ? beta[c] : 0.0);
  }
  tr.zhat[position] = std::move(zhat);
  tr.out[position] = std::move(out);
}

}  // namespace detail

// Forward pass over a batch of (a, b, =) triples. Computes logits
// o = alpha * w_u * (y_3 + yt_3) and caches activations for backprop and
// metrics. full_trace=false skips activations that only metrics need (extra
// attention rows), which speeds up evaluation-only passes. Positions of the
// last layer whose outputs cannot reach the logits are never computed.
inline ForwardTrace forward(const ParamSet& params, const ModelConfig& cfg,
                            const std::vector<Sample>& batch, double alpha,
                            Probe probe = Probe::NONE, bool full_trace = true) {
  cfg.validate();
  if (!(alpha > 0.0)) throw std::invalid_argument("forward: alpha must be > 0");
  const std::size_t bsz = batch.size();
  const std::size_t d = cfg.d_model;
  const std::size_t nh = cfg.n_heads;
  const std::size_t dh = cfg.d_head();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardTrace trace;
  trace.batch = batch;
  trace.alpha = alpha;
  trace.probe = probe;
  trace.layers.resize(cfg.n_layers);

  // Token + position embeddings.
  std::array<RealMatrix, kSeqLen> cur;
  for (std::size_t i = 0; i < kSeqLen; ++i) cur[i] = RealMatrix(bsz, d);
  for (std::size_t b = 0; b < bsz; ++b) {
    const std::array<int, kSeqLen> toks = {batch[b].a, batch[b].b, batch[b].eq};
    for (std::size_t i = 0; i < kSeqLen; ++i) {
      if (toks[i] < 0 || static_cast<std::size_t>(toks[i]) >= cfg.vocab())
        throw std::out_of_range("forward: token index out of range");
      double* x = cur[i].row(b);
      const double* rho = params.pos.row(i);
      for (std::size_t c = 0; c < d; ++c) x[c] = params.w_e(c, static_cast<std::size_t>(toks[i])) + rho[c];
    }
  }

  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const LayerParams& lp = params.layers[l];
    LayerTrace& lt = trace.layers[l];
    const bool last_layer = (l + 1 == cfg.n_layers);
    lt.x = cur;

    // q/k/v projections, with per-site norms where configured.
    auto site_input = [&](const std::optional<NormSiteParams>& np, std::optional<NormSiteTrace>& st)
        -> const std::array<RealMatrix, kSeqLen>* {
      if (!np) return &lt.x;
      st.emplace();
      for (std::size_t i = 0; i < kSeqLen; ++i)
        detail::apply_norm_site(lt.x[i], *np, cfg.norm.kind, cfg.norm_eps, i, *st);
      return &st->out;
    };
    const auto* qin = site_input(lp.norm_q, lt.nq);
    const auto* kin = site_input(lp.norm_k, lt.nk);
    const auto* vin = site_input(lp.norm_v, lt.nv);

    // Query rows that feed neither the logits nor a requested full trace are
    // skipped; keys and values are always needed at every position.
    const bool all_rows = full_trace || !last_layer || !cfg.causal_attention;
    for (std::size_t i = 0; i < kSeqLen; ++i) {
      matmul((*kin)[i], lp.w_k, lt.k[i]);
      matmul((*vin)[i], lp.w_v, lt.v[i]);
      if (all_rows || i == kSeqLen - 1) matmul((*qin)[i], lp.w_q, lt.q[i]);
    }

    // Softmaxed attention scores per (query, key) pair and head.
    for (std::size_t i = 0; i < kSeqLen; ++i) {
      if (!(all_rows || i == kSeqLen - 1)) continue;
      const std::size_t jmax = cfg.causal_attention ? i : kSeqLen - 1;
      for (std::size_t j = 0; j <= jmax; ++j) lt.attn[i][j] = RealMatrix(bsz, nh);
      for (std::size_t b = 0; b < bsz; ++b) {
        const double* qi = lt.q[i].row(b);
        for (std::size_t h = 0; h < nh; ++h) {
          double scores[kSeqLen];
          for (std::size_t j = 0; j <= jmax; ++j)
            scores[j] = dot(qi + h * dh, lt.k[j].row(b) + h * dh, dh) * inv_sqrt_dh;
          softmax_span(scores, jmax + 1);
          for (std::size_t j = 0; j <= jmax; ++j) lt.attn[i][j](b, h) = scores[j];
        }
      }
    }

    // Attention output and residual, only where it can reach the logits.
    for (std::size_t i = 0; i < kSeqLen; ++i) {
      if (last_layer && i != kSeqLen - 1) continue;
      const std::size_t jmax = cfg.causal_attention ? i : kSeqLen - 1;
      RealMatrix mix(bsz, d);
      for (std::size_t b = 0; b < bsz; ++b) {
        double* out = mix.row(b);
        for (std::size_t h = 0; h < nh; ++h) {
          for (std::size_t j = 0; j <= jmax; ++j) {
            const double a = lt.attn[i][j](b, h);
            const double* vj = lt.v[j].row(b) + h * dh;
            double* o = out + h * dh;
            for (std::size_t c = 0; c < dh; ++c) o[c] += a * vj[c];
          }
        }
      }
      lt.attn_mix[i] = std::move(mix);
      matmul(lt.attn_mix[i], lp.w_o, lt.xt[i]);
      lt.y[i] = ::grok::add(lt.x[i], lt.xt[i]);
      lt.attn_out_done[i] = true;
    }

    // MLP. For the last layer only the unembedded position matters.
    for (std::size_t i = 0; i < kSeqLen; ++i) {
      if (last_layer && i != kSeqLen - 1) continue;
      if (probe == Probe::UNIT_NORM_MLP_INPUT) {
        RealMatrix m = lt.y[i];
        for (std::size_t b = 0; b < bsz; ++b) {
          double* r = m.row(b);
          double norm = std::sqrt(dot(r, r, d));
          if (norm < 1e-12) norm = 1e-12;
          const double inv = 1.0 / norm;
          for (std::size_t c = 0; c < d; ++c) r[c] *= inv;
        }
        lt.mlp_in[i] = std::move(m);
      } else if (lp.norm_mlp) {
        if (!lt.nm) lt.nm.emplace();
        detail::apply_norm_site(lt.y[i], *lp.norm_mlp, cfg.norm.kind, cfg.norm_eps, i, *lt.nm);
        lt.mlp_in[i] = lt.nm->out[i];
      } else {
        lt.mlp_in[i] = lt.y[i];
      }
      matmul_nt(lt.mlp_in[i], lp.w_1, lt.hidden[i]);
      for (double& v : lt.hidden[i].data) v = v > 0.0 ? v : 0.0;
      matmul_nt(lt.hidden[i], lp.w_2, lt.yt[i]);
      lt.mlp_done[i] = true;
    }

    if (!last_layer) {
      for (std::size_t i = 0; i < kSeqLen; ++i) cur[i] = ::grok::add(lt.y[i], lt.yt[i]);
    }
  }

  const LayerTrace& last = trace.layers.back();
  trace.prelogits = ::grok::add(last.y[kSeqLen - 1], last.yt[kSeqLen - 1]);
  matmul_nt(trace.prelogits, params.w_u, trace.logits);
  if (alpha != 1.0) scale_inplace(trace.logits, alpha);
  return trace;
}

// Mean cross-entropy, log-sum-exp stable.
inline double cross_entropy(const RealMatrix& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows)
    throw std::invalid_argument("cross_entropy: batch size mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < logits.rows; ++b) {
    const double* row = logits.row(b);
    double mx = row[0];
    for (std::size_t j = 1; j < logits.cols; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.cols; ++j) sum += std::exp(row[j] - mx);
    total += mx + std::log(sum) - row[static_cast<std::size_t>(labels[b])];
  }
  return total / static_cast<double>(logits.rows);
}

inline std::vector<int> labels_of(const std::vector<Sample>& batch) {
  std::vector<int> labels(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].label;
  return labels;
}

}  // namespace grok
