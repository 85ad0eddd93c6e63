#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqfeat/feature_matrix.hpp"
#include "seqfeat/types.hpp"

namespace seqfeat {

/// One GRU cell: update/reset/candidate gates, sigmoid gating, tanh candidate.
/// Input and hidden width are both K.
struct GruWeights {
    Eigen::MatrixXd w_update, w_reset, w_cand;    // input maps, K x K
    Eigen::MatrixXd u_update, u_reset, u_cand;    // recurrent maps, K x K
    Eigen::VectorXd b_update, b_reset, b_cand;    // K
};

/// Full parameter set of the sequence autoencoder. Doubling as the gradient
/// container: grads have the same shapes block for block.
struct AeParams {
    Eigen::MatrixXd embedding;  // n_actions x K
    GruWeights encoder;
    GruWeights decoder;         // decoder input is theta, also K wide
    Eigen::MatrixXd out_weight; // K x n_actions
    Eigen::VectorXd out_bias;   // n_actions

    int k() const { return static_cast<int>(embedding.cols()); }
    int n_actions() const { return static_cast<int>(embedding.rows()); }

    /// Visits every parameter block as (name, data pointer, element count) in
    /// a fixed order. Drives finite differencing, RMSProp, clipping, io.
    void for_each_block(const std::function<void(const char*, double*, std::size_t)>& fn);
    void for_each_block(const std::function<void(const char*, const double*, std::size_t)>& fn) const;

    static AeParams zeros(int n_actions, int k);
};

/// Uniform(-0.08, 0.08) init from a seeded generator.
AeParams init_params(int n_actions, int k, std::uint64_t seed);

struct AeConfig {
    int k = 100;
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 10;            // epochs without validation improvement
    double validation_fraction = 0.1;
    double learning_rate = 1e-3;
    double rho = 0.9;             // RMSProp decay
    double epsilon = 1e-8;
    double clip_norm = 5.0;       // global gradient norm
    std::uint64_t seed = 0;
};

using TokenSeq = std::vector<int>;

/// Padded batch with explicit lengths; cells beyond a row's length are -1 and
/// never read, so extra padding cannot change loss or gradients.
struct Batch {
    Eigen::MatrixXi tokens; // B x T_max, pad = -1
    std::vector<int> lengths;

    static Batch from_sequences(const std::vector<TokenSeq>& seqs);
    int size() const { return static_cast<int>(lengths.size()); }
    long total_steps() const;
};

/// Final encoder hidden state theta (hidden starts at zero).
Eigen::VectorXd encode(const AeParams& params, const TokenSeq& seq);

/// All encoder hidden states, one row per step (prefix property lives here).
Eigen::MatrixXd encode_states(const AeParams& params, const TokenSeq& seq);

/// L x n_actions row-stochastic matrix: decoder GRU driven by theta at every
/// step from a zero initial state, softmax over actions per step.
Eigen::MatrixXd decode(const AeParams& params, const Eigen::VectorXd& theta, int length);

/// Masked categorical cross-entropy: mean of -log p(observed token) over all
/// real steps in the batch.
double loss(const AeParams& params, const Batch& batch);

/// Loss plus backprop-through-time gradients for every parameter block.
std::pair<double, AeParams> loss_and_grad(const AeParams& params, const Batch& batch);

struct EpochLog {
    int epoch;
    double train_loss;
    double val_loss;
};

struct TrainResult {
    AeParams params;            // best-validation parameters
    std::vector<EpochLog> log;
    int best_epoch = -1;
};

/// RMSProp training with an internal validation split and early stopping.
/// Deterministic given cfg.seed. Throws NumericError naming the epoch if the
/// loss turns non-finite.
TrainResult train(const Cohort& cohort, const AeConfig& cfg);

/// Row i = encode(sequence i); columns ae_1..ae_K. Throws DataError when the
/// cohort vocabulary size disagrees with the parameters.
FeatureMatrix encode_cohort(const AeParams& params, const Cohort& cohort);

/// Versioned binary checkpoint (shape header + vocabulary); bit-exact
/// round-trip.
void save_checkpoint(const std::string& path, const AeParams& params,
                     const Vocabulary& vocab);
std::pair<AeParams, Vocabulary> load_checkpoint(const std::string& path);

void write_training_log_csv(const std::string& path, const std::vector<EpochLog>& log);

} // namespace seqfeat
