#include "seqfeat/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "seqfeat/errors.hpp"
#include "seqfeat/io.hpp"
#include "seqfeat/rng.hpp"

namespace seqfeat {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd sigmoid(const VectorXd& v) {
    return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

// One GRU step: h = (1 - z) . h_prev + z . tanh-candidate.
void gru_step(const GruWeights& w, const VectorXd& x, const VectorXd& h_prev, VectorXd& z,
              VectorXd& r, VectorXd& c, VectorXd& rh, VectorXd& h) {
    z = sigmoid(w.w_update * x + w.u_update * h_prev + w.b_update);
    r = sigmoid(w.w_reset * x + w.u_reset * h_prev + w.b_reset);
    rh = r.cwiseProduct(h_prev);
    c = (w.w_cand * x + w.u_cand * rh + w.b_cand).array().tanh();
    h = (VectorXd::Ones(h_prev.size()) - z).cwiseProduct(h_prev) + z.cwiseProduct(c);
}

struct GruCache {
    MatrixXd h;           // (L+1) x K, row 0 = initial zero state
    MatrixXd z, r, c, rh; // L x K
};

// Reverse-mode step. dh is the loss gradient w.r.t. h_t; returns the gradient
// w.r.t. h_{t-1} in dh_prev and w.r.t. the step input in dx, accumulating
// parameter gradients into g.
void gru_backward_step(const GruWeights& w, GruWeights& g, const VectorXd& x,
                       const VectorXd& h_prev, const VectorXd& z, const VectorXd& r,
                       const VectorXd& c, const VectorXd& rh, const VectorXd& dh,
                       VectorXd& dh_prev, VectorXd& dx) {
    const VectorXd ones = VectorXd::Ones(dh.size());

    const VectorXd dz = dh.cwiseProduct(c - h_prev);
    const VectorXd dc = dh.cwiseProduct(z);
    dh_prev = dh.cwiseProduct(ones - z);

    const VectorXd d_az = dz.cwiseProduct(z).cwiseProduct(ones - z);
    const VectorXd d_ah = dc.cwiseProduct(ones - c.cwiseProduct(c));

    g.w_cand.noalias() += d_ah * x.transpose();
    g.u_cand.noalias() += d_ah * rh.transpose();
    g.b_cand += d_ah;
    const VectorXd d_rh = w.u_cand.transpose() * d_ah;
    const VectorXd dr = d_rh.cwiseProduct(h_prev);
    dh_prev += d_rh.cwiseProduct(r);

    const VectorXd d_ar = dr.cwiseProduct(r).cwiseProduct(ones - r);
    g.w_reset.noalias() += d_ar * x.transpose();
    g.u_reset.noalias() += d_ar * h_prev.transpose();
    g.b_reset += d_ar;
    dh_prev.noalias() += w.u_reset.transpose() * d_ar;

    g.w_update.noalias() += d_az * x.transpose();
    g.u_update.noalias() += d_az * h_prev.transpose();
    g.b_update += d_az;
    dh_prev.noalias() += w.u_update.transpose() * d_az;

    dx = w.w_update.transpose() * d_az + w.w_reset.transpose() * d_ar +
         w.w_cand.transpose() * d_ah;
}

GruCache encoder_forward(const AeParams& p, const TokenSeq& seq) {
    const int k = p.k();
    const int len = static_cast<int>(seq.size());
    GruCache cache;
    cache.h = MatrixXd::Zero(len + 1, k);
    cache.z.resize(len, k);
    cache.r.resize(len, k);
    cache.c.resize(len, k);
    cache.rh.resize(len, k);
    VectorXd z(k), r(k), c(k), rh(k), h(k);
    for (int t = 0; t < len; ++t) {
        const int token = seq[static_cast<std::size_t>(t)];
        if (token < 0 || token >= p.n_actions()) {
            throw DataError("encode: token index " + std::to_string(token) +
                            " outside vocabulary of size " + std::to_string(p.n_actions()));
        }
        const VectorXd x = p.embedding.row(token).transpose();
        const VectorXd h_prev = cache.h.row(t).transpose();
        gru_step(p.encoder, x, h_prev, z, r, c, rh, h);
        cache.z.row(t) = z.transpose();
        cache.r.row(t) = r.transpose();
        cache.c.row(t) = c.transpose();
        cache.rh.row(t) = rh.transpose();
        cache.h.row(t + 1) = h.transpose();
    }
    return cache;
}

GruCache decoder_forward(const AeParams& p, const VectorXd& theta, int length) {
    const int k = p.k();
    GruCache cache;
    cache.h = MatrixXd::Zero(length + 1, k);
    cache.z.resize(length, k);
    cache.r.resize(length, k);
    cache.c.resize(length, k);
    cache.rh.resize(length, k);
    VectorXd z(k), r(k), c(k), rh(k), h(k);
    for (int t = 0; t < length; ++t) {
        const VectorXd h_prev = cache.h.row(t).transpose();
        gru_step(p.decoder, theta, h_prev, z, r, c, rh, h);
        cache.z.row(t) = z.transpose();
        cache.r.row(t) = r.transpose();
        cache.c.row(t) = c.transpose();
        cache.rh.row(t) = rh.transpose();
        cache.h.row(t + 1) = h.transpose();
    }
    return cache;
}

VectorXd softmax_row(const VectorXd& logits) {
    const double m = logits.maxCoeff();
    VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

MatrixXd decoder_probs(const AeParams& p, const GruCache& dec) {
    const int len = static_cast<int>(dec.z.rows());
    MatrixXd probs(len, p.n_actions());
    for (int t = 0; t < len; ++t) {
        const VectorXd logits =
            p.out_weight.transpose() * dec.h.row(t + 1).transpose() + p.out_bias;
        probs.row(t) = softmax_row(logits).transpose();
    }
    return probs;
}

double sequence_nll(const AeParams& p, const TokenSeq& seq) {
    const GruCache enc = encoder_forward(p, seq);
    const VectorXd theta = enc.h.row(static_cast<long>(seq.size())).transpose();
    const GruCache dec = decoder_forward(p, theta, static_cast<int>(seq.size()));
    const MatrixXd probs = decoder_probs(p, dec);
    double nll = 0.0;
    for (int t = 0; t < static_cast<int>(seq.size()); ++t) {
        nll -= std::log(std::max(probs(t, seq[static_cast<std::size_t>(t)]), 1e-300));
    }
    return nll;
}

// Sum of per-step nll over the sequence plus parameter gradients of that sum.
double sequence_nll_and_grad(const AeParams& p, const TokenSeq& seq, AeParams& g) {
    const int len = static_cast<int>(seq.size());
    const int k = p.k();

    const GruCache enc = encoder_forward(p, seq);
    const VectorXd theta = enc.h.row(len).transpose();
    const GruCache dec = decoder_forward(p, theta, len);
    const MatrixXd probs = decoder_probs(p, dec);

    double nll = 0.0;
    for (int t = 0; t < len; ++t) {
        nll -= std::log(std::max(probs(t, seq[static_cast<std::size_t>(t)]), 1e-300));
    }

    // Decoder backward; theta receives gradient from every step's input.
    VectorXd d_state = VectorXd::Zero(k);
    VectorXd d_theta = VectorXd::Zero(k);
    VectorXd dh_prev(k), dx(k);
    for (int t = len - 1; t >= 0; --t) {
        VectorXd d_logits = probs.row(t).transpose();
        d_logits(seq[static_cast<std::size_t>(t)]) -= 1.0;
        g.out_weight.noalias() += dec.h.row(t + 1).transpose() * d_logits.transpose();
        g.out_bias += d_logits;
        d_state.noalias() += p.out_weight * d_logits;

        gru_backward_step(p.decoder, g.decoder, theta, dec.h.row(t).transpose(),
                          dec.z.row(t).transpose(), dec.r.row(t).transpose(),
                          dec.c.row(t).transpose(), dec.rh.row(t).transpose(), d_state, dh_prev,
                          dx);
        d_theta += dx;
        d_state = dh_prev;
    }
    // d_state now targets the decoder's fixed zero initial state; discard.

    // Encoder backward from dL/dtheta.
    VectorXd dh = d_theta;
    for (int t = len - 1; t >= 0; --t) {
        const int token = seq[static_cast<std::size_t>(t)];
        const VectorXd x = p.embedding.row(token).transpose();
        gru_backward_step(p.encoder, g.encoder, x, enc.h.row(t).transpose(),
                          enc.z.row(t).transpose(), enc.r.row(t).transpose(),
                          enc.c.row(t).transpose(), enc.rh.row(t).transpose(), dh, dh_prev, dx);
        g.embedding.row(token) += dx.transpose();
        dh = dh_prev;
    }
    return nll;
}

TokenSeq batch_row(const Batch& batch, int row) {
    TokenSeq seq(static_cast<std::size_t>(batch.lengths[static_cast<std::size_t>(row)]));
    for (int t = 0; t < batch.lengths[static_cast<std::size_t>(row)]; ++t) {
        seq[static_cast<std::size_t>(t)] = batch.tokens(row, t);
    }
    return seq;
}

void check_batch(const Batch& batch) {
    if (batch.lengths.empty()) throw DataError("empty batch");
    for (int b = 0; b < batch.size(); ++b) {
        const int len = batch.lengths[static_cast<std::size_t>(b)];
        if (len < 1) throw DataError("batch row " + std::to_string(b) + " has length < 1");
        if (len > batch.tokens.cols()) throw DataError("batch row length exceeds token columns");
    }
}

GruWeights zero_gru(int k) {
    GruWeights w;
    w.w_update = MatrixXd::Zero(k, k);
    w.w_reset = MatrixXd::Zero(k, k);
    w.w_cand = MatrixXd::Zero(k, k);
    w.u_update = MatrixXd::Zero(k, k);
    w.u_reset = MatrixXd::Zero(k, k);
    w.u_cand = MatrixXd::Zero(k, k);
    w.b_update = VectorXd::Zero(k);
    w.b_reset = VectorXd::Zero(k);
    w.b_cand = VectorXd::Zero(k);
    return w;
}

} // namespace

void AeParams::for_each_block(
    const std::function<void(const char*, double*, std::size_t)>& fn) {
    auto visit_gru = [&](const char* prefix, GruWeights& g) {
        const std::string p(prefix);
        fn((p + ".w_update").c_str(), g.w_update.data(), static_cast<std::size_t>(g.w_update.size()));
        fn((p + ".w_reset").c_str(), g.w_reset.data(), static_cast<std::size_t>(g.w_reset.size()));
        fn((p + ".w_cand").c_str(), g.w_cand.data(), static_cast<std::size_t>(g.w_cand.size()));
        fn((p + ".u_update").c_str(), g.u_update.data(), static_cast<std::size_t>(g.u_update.size()));
        fn((p + ".u_reset").c_str(), g.u_reset.data(), static_cast<std::size_t>(g.u_reset.size()));
        fn((p + ".u_cand").c_str(), g.u_cand.data(), static_cast<std::size_t>(g.u_cand.size()));
        fn((p + ".b_update").c_str(), g.b_update.data(), static_cast<std::size_t>(g.b_update.size()));
        fn((p + ".b_reset").c_str(), g.b_reset.data(), static_cast<std::size_t>(g.b_reset.size()));
        fn((p + ".b_cand").c_str(), g.b_cand.data(), static_cast<std::size_t>(g.b_cand.size()));
    };
    fn("embedding", embedding.data(), static_cast<std::size_t>(embedding.size()));
    visit_gru("encoder", encoder);
    visit_gru("decoder", decoder);
    fn("out_weight", out_weight.data(), static_cast<std::size_t>(out_weight.size()));
    fn("out_bias", out_bias.data(), static_cast<std::size_t>(out_bias.size()));
}

void AeParams::for_each_block(
    const std::function<void(const char*, const double*, std::size_t)>& fn) const {
    const_cast<AeParams*>(this)->for_each_block(
        [&fn](const char* name, double* data, std::size_t n) { fn(name, data, n); });
}

AeParams AeParams::zeros(int n_actions, int k) {
    AeParams p;
    p.embedding = MatrixXd::Zero(n_actions, k);
    p.encoder = zero_gru(k);
    p.decoder = zero_gru(k);
    p.out_weight = MatrixXd::Zero(k, n_actions);
    p.out_bias = VectorXd::Zero(n_actions);
    return p;
}

AeParams init_params(int n_actions, int k, std::uint64_t seed) {
    if (n_actions < 1 || k < 1) throw ConfigError("init_params: n_actions and K must be >= 1");
    AeParams p = AeParams::zeros(n_actions, k);
    Rng rng(seed);
    p.for_each_block([&rng](const char*, double* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) data[i] = rng.uniform(-0.08, 0.08);
    });
    return p;
}

Batch Batch::from_sequences(const std::vector<TokenSeq>& seqs) {
    if (seqs.empty()) throw DataError("Batch::from_sequences: no sequences");
    int max_len = 0;
    for (const auto& s : seqs) {
        if (s.empty()) throw DataError("Batch::from_sequences: empty sequence");
        max_len = std::max(max_len, static_cast<int>(s.size()));
    }
    Batch batch;
    batch.tokens = Eigen::MatrixXi::Constant(static_cast<long>(seqs.size()), max_len, -1);
    batch.lengths.reserve(seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        batch.lengths.push_back(static_cast<int>(seqs[i].size()));
        for (std::size_t t = 0; t < seqs[i].size(); ++t) {
            batch.tokens(static_cast<long>(i), static_cast<long>(t)) = seqs[i][t];
        }
    }
    return batch;
}

long Batch::total_steps() const {
    return std::accumulate(lengths.begin(), lengths.end(), 0L);
}

Eigen::VectorXd encode(const AeParams& params, const TokenSeq& seq) {
    if (seq.empty()) throw DataError("encode: empty sequence");
    const GruCache cache = encoder_forward(params, seq);
    return cache.h.row(static_cast<long>(seq.size())).transpose();
}

Eigen::MatrixXd encode_states(const AeParams& params, const TokenSeq& seq) {
    if (seq.empty()) throw DataError("encode_states: empty sequence");
    const GruCache cache = encoder_forward(params, seq);
    return cache.h.bottomRows(static_cast<long>(seq.size()));
}

Eigen::MatrixXd decode(const AeParams& params, const Eigen::VectorXd& theta, int length) {
    if (length <= 0) throw DataError("decode: length must be positive");
    if (theta.size() != params.k()) throw DataError("decode: theta dimension mismatch");
    const GruCache cache = decoder_forward(params, theta, length);
    return decoder_probs(params, cache);
}

double loss(const AeParams& params, const Batch& batch) {
    check_batch(batch);
    double nll = 0.0;
    for (int b = 0; b < batch.size(); ++b) nll += sequence_nll(params, batch_row(batch, b));
    return nll / static_cast<double>(batch.total_steps());
}

std::pair<double, AeParams> loss_and_grad(const AeParams& params, const Batch& batch) {
    check_batch(batch);
    AeParams grads = AeParams::zeros(params.n_actions(), params.k());
    double nll = 0.0;
    for (int b = 0; b < batch.size(); ++b) {
        nll += sequence_nll_and_grad(params, batch_row(batch, b), grads);
    }
    const double scale = 1.0 / static_cast<double>(batch.total_steps());
    grads.for_each_block([scale](const char*, double* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
    });
    return {nll * scale, std::move(grads)};
}

TrainResult train(const Cohort& cohort, const AeConfig& cfg) {
    if (cohort.size() < 2) throw DataError("train: cohort needs at least 2 sequences");
    if (cfg.k < 1) throw ConfigError("train: K must be >= 1");
    if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0) {
        throw ConfigError("train: validation_fraction must lie in (0, 1)");
    }
    if (cfg.learning_rate <= 0.0 || cfg.rho <= 0.0 || cfg.rho >= 1.0 || cfg.epsilon <= 0.0) {
        throw ConfigError("train: invalid optimizer settings");
    }

    const int n = cohort.size();
    std::vector<TokenSeq> seqs;
    seqs.reserve(static_cast<std::size_t>(n));
    for (const auto& s : cohort.sequences) seqs.push_back(index_tokens(s, cohort.vocabulary));

    // Seeded validation split.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng split_rng(derive_seed(cfg.seed, 0));
    shuffle(perm, split_rng);
    int n_val = static_cast<int>(std::lround(cfg.validation_fraction * n));
    n_val = std::clamp(n_val, 1, n - 1);
    std::vector<int> val_idx(perm.begin(), perm.begin() + n_val);
    std::vector<int> train_idx(perm.begin() + n_val, perm.end());

    // Length-bucketed batches: sort by length once, chunk, then shuffle batch
    // order each epoch.
    std::stable_sort(train_idx.begin(), train_idx.end(), [&seqs](int a, int b) {
        return seqs[static_cast<std::size_t>(a)].size() < seqs[static_cast<std::size_t>(b)].size();
    });
    std::vector<std::vector<int>> batches;
    for (std::size_t i = 0; i < train_idx.size(); i += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t hi = std::min(train_idx.size(), i + static_cast<std::size_t>(cfg.batch_size));
        batches.emplace_back(train_idx.begin() + static_cast<long>(i),
                             train_idx.begin() + static_cast<long>(hi));
    }

    auto gather = [&seqs](const std::vector<int>& idx) {
        std::vector<TokenSeq> out;
        out.reserve(idx.size());
        for (int i : idx) out.push_back(seqs[static_cast<std::size_t>(i)]);
        return out;
    };
    const Batch val_batch = Batch::from_sequences(gather(val_idx));

    AeParams params = init_params(cohort.vocabulary.size(), cfg.k, derive_seed(cfg.seed, 1));
    AeParams acc = AeParams::zeros(cohort.vocabulary.size(), cfg.k);

    TrainResult result;
    result.params = params;
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng epoch_rng(derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
        shuffle(batches, epoch_rng);

        double nll_sum = 0.0;
        long step_sum = 0;
        for (const auto& batch_idx : batches) {
            const Batch batch = Batch::from_sequences(gather(batch_idx));
            auto [batch_loss, grads] = loss_and_grad(params, batch);
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            nll_sum += batch_loss * static_cast<double>(batch.total_steps());
            step_sum += batch.total_steps();

            // Global-norm clip, then RMSProp.
            double sq_norm = 0.0;
            grads.for_each_block([&sq_norm](const char*, double* data, std::size_t n) {
                for (std::size_t i = 0; i < n; ++i) sq_norm += data[i] * data[i];
            });
            const double norm = std::sqrt(sq_norm);
            const double clip_scale =
                (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

            std::vector<std::pair<double*, std::size_t>> acc_blocks;
            acc.for_each_block([&acc_blocks](const char*, double* data, std::size_t m) {
                acc_blocks.emplace_back(data, m);
            });
            std::vector<std::pair<double*, std::size_t>> grad_blocks;
            grads.for_each_block([&grad_blocks](const char*, double* data, std::size_t m) {
                grad_blocks.emplace_back(data, m);
            });
            std::size_t block = 0;
            params.for_each_block([&](const char*, double* data, std::size_t m) {
                double* a = acc_blocks[block].first;
                double* gr = grad_blocks[block].first;
                for (std::size_t i = 0; i < m; ++i) {
                    const double g = gr[i] * clip_scale;
                    a[i] = cfg.rho * a[i] + (1.0 - cfg.rho) * g * g;
                    data[i] -= cfg.learning_rate * g / std::sqrt(a[i] + cfg.epsilon);
                }
                ++block;
            });
        }

        const double train_loss = nll_sum / static_cast<double>(step_sum);
        const double val_loss = loss(params, val_batch);
        if (!std::isfinite(val_loss)) {
            throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));
        }
        result.log.push_back({epoch, train_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            result.params = params;
            result.best_epoch = epoch;
            epochs_since_improvement = 0;
        } else {
            ++epochs_since_improvement;
            if (epochs_since_improvement >= cfg.patience) break;
        }
    }
    return result;
}

FeatureMatrix encode_cohort(const AeParams& params, const Cohort& cohort) {
    if (cohort.vocabulary.size() != params.n_actions()) {
        throw DataError("encode_cohort: vocabulary size " +
                        std::to_string(cohort.vocabulary.size()) +
                        " does not match parameters (" + std::to_string(params.n_actions()) + ")");
    }
    FeatureMatrix m;
    m.subject_ids.reserve(static_cast<std::size_t>(cohort.size()));
    m.column_names = numbered_columns("ae", params.k());
    m.values.resize(cohort.size(), params.k());
    for (int i = 0; i < cohort.size(); ++i) {
        const auto& seq = cohort.sequences[static_cast<std::size_t>(i)];
        m.subject_ids.push_back(seq.subject_id);
        m.values.row(i) = encode(params, index_tokens(seq, cohort.vocabulary)).transpose();
    }
    return m;
}

namespace {
constexpr char kCheckpointMagic[4] = {'S', 'Q', 'A', 'E'};
}

void save_checkpoint(const std::string& path, const AeParams& params, const Vocabulary& vocab) {
    if (vocab.size() != params.n_actions()) {
        throw DataError("save_checkpoint: vocabulary does not match parameters");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out.write(kCheckpointMagic, 4);
    const std::uint32_t version = 1;
    const std::uint64_t n_actions = static_cast<std::uint64_t>(params.n_actions());
    const std::uint64_t k = static_cast<std::uint64_t>(params.k());
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&n_actions), sizeof n_actions);
    out.write(reinterpret_cast<const char*>(&k), sizeof k);
    auto write_string = [&out](const std::string& s) {
        const std::uint32_t len = static_cast<std::uint32_t>(s.size());
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(s.data(), static_cast<std::streamsize>(len));
    };
    write_string(vocab.item_id());
    for (const auto& label : vocab.labels()) write_string(label);
    params.for_each_block([&out](const char*, const double* data, std::size_t n) {
        out.write(reinterpret_cast<const char*>(data),
                  static_cast<std::streamsize>(n * sizeof(double)));
    });
}

std::pair<AeParams, Vocabulary> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kCheckpointMagic, 4)) {
        throw DataError("bad checkpoint header in '" + path + "'");
    }
    std::uint32_t version = 0;
    std::uint64_t n_actions = 0, k = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n_actions), sizeof n_actions);
    in.read(reinterpret_cast<char*>(&k), sizeof k);
    if (!in || version != 1) throw DataError("unsupported checkpoint version");
    auto read_string = [&in, &path]() {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof len);
        std::string s(len, '\0');
        in.read(s.data(), static_cast<std::streamsize>(len));
        if (!in) throw DataError("truncated checkpoint '" + path + "'");
        return s;
    };
    Vocabulary vocab(read_string());
    for (std::uint64_t i = 0; i < n_actions; ++i) vocab.add(read_string());
    if (vocab.size() != static_cast<int>(n_actions)) {
        throw DataError("checkpoint vocabulary has duplicate labels");
    }
    AeParams params = AeParams::zeros(static_cast<int>(n_actions), static_cast<int>(k));
    params.for_each_block([&in](const char*, double* data, std::size_t n) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    });
    if (!in) throw DataError("truncated checkpoint '" + path + "'");
    return {std::move(params), std::move(vocab)};
}

void write_training_log_csv(const std::string& path, const std::vector<EpochLog>& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << "epoch,train_loss,val_loss\n";
    for (const auto& entry : log) {
        out << entry.epoch << ',' << format_double(entry.train_loss) << ','
            << format_double(entry.val_loss) << '\n';
    }
}

} // namespace seqfeat
