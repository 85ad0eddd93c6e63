#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "seqfeat/autoencoder.hpp"
#include "seqfeat/errors.hpp"
#include "seqfeat/rng.hpp"

using namespace seqfeat;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Cohort template_cohort(int n, std::uint64_t seed) {
    // Two fixed templates over a 10-action alphabet.
    const std::vector<std::string> t1{"a0", "a1", "a2", "a3", "a4", "a5"};
    const std::vector<std::string> t2{"a6", "a7", "a8", "a9", "a0", "a1", "a2"};
    Rng rng(seed);
    std::vector<ActionSequence> seqs;
    for (int i = 0; i < n; ++i) {
        ActionSequence s;
        s.subject_id = "s" + std::to_string(i);
        s.item_id = "item";
        s.tokens = rng.uniform() < 0.5 ? t1 : t2;
        seqs.push_back(std::move(s));
    }
    return make_cohort("item", seqs);
}

double sigmoid_scalar(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Max relative error of analytic vs central finite-difference gradients over
// every parameter coordinate.
double gradient_check(AeParams params, const Batch& batch, double h = 1e-5) {
    const auto [loss_value, grads] = loss_and_grad(params, batch);
    (void)loss_value;

    std::vector<std::pair<const double*, std::size_t>> grad_blocks;
    grads.for_each_block([&grad_blocks](const char*, const double* data, std::size_t n) {
        grad_blocks.emplace_back(data, n);
    });

    double worst = 0.0;
    std::size_t block = 0;
    params.for_each_block([&](const char*, double* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            const double saved = data[i];
            data[i] = saved + h;
            const double up = loss(params, batch);
            data[i] = saved - h;
            const double down = loss(params, batch);
            data[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double analytic = grad_blocks[block].first[i];
            const double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
            worst = std::max(worst, rel);
        }
        ++block;
    });
    return worst;
}

} // namespace

TEST_CASE("zero weights keep the hidden state at zero") {
    const AeParams p = AeParams::zeros(4, 3);
    const VectorXd theta = encode(p, {0, 1, 2, 3, 1});
    CHECK(theta.norm() == 0.0);
}

TEST_CASE("encoding is length-prefix consistent") {
    const AeParams p = init_params(6, 5, 11);
    const TokenSeq full{2, 4, 1, 0, 5};
    const MatrixXd states = encode_states(p, full);
    for (std::size_t cut = 1; cut <= full.size(); ++cut) {
        const TokenSeq prefix(full.begin(), full.begin() + static_cast<long>(cut));
        const VectorXd theta = encode(p, prefix);
        CHECK((theta - states.row(static_cast<long>(cut) - 1).transpose()).norm() == 0.0);
    }
}

TEST_CASE("encode is deterministic and rejects out-of-vocabulary tokens") {
    const AeParams p = init_params(5, 4, 7);
    const TokenSeq seq{0, 3, 2};
    CHECK(encode(p, seq) == encode(p, seq));
    CHECK_THROWS_AS(encode(p, TokenSeq{0, 5}), DataError);
    CHECK_THROWS_AS(encode(p, TokenSeq{}), DataError);
}

TEST_CASE("decode rows are probability vectors; zero projection gives uniform rows") {
    SUBCASE("zero output projection") {
        const AeParams p = AeParams::zeros(4, 3);
        const MatrixXd probs = decode(p, VectorXd::Zero(3), 5);
        REQUIRE(probs.rows() == 5);
        for (int t = 0; t < 5; ++t) {
            for (int a = 0; a < 4; ++a) CHECK(probs(t, a) == doctest::Approx(0.25).epsilon(1e-15));
        }
    }
    SUBCASE("random parameters") {
        const AeParams p = init_params(7, 4, 3);
        Rng rng(5);
        VectorXd theta(4);
        for (int i = 0; i < 4; ++i) theta(i) = rng.normal();
        const MatrixXd probs = decode(p, theta, 6);
        for (int t = 0; t < 6; ++t) {
            CHECK(probs.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(probs.row(t).minCoeff() >= 0.0);
        }
    }
    SUBCASE("invalid length") {
        const AeParams p = AeParams::zeros(3, 2);
        CHECK_THROWS_AS(decode(p, VectorXd::Zero(2), 0), DataError);
    }
}

TEST_CASE("decode L=3 equals three hand-unrolled GRU steps") {
    const int k = 3, na = 4;
    const AeParams p = init_params(na, k, 23);
    Rng rng(1);
    VectorXd theta(k);
    for (int i = 0; i < k; ++i) theta(i) = rng.normal();

    const MatrixXd probs = decode(p, theta, 3);

    // Manual unroll with explicit elementwise formulas.
    VectorXd h = VectorXd::Zero(k);
    for (int t = 0; t < 3; ++t) {
        VectorXd z(k), r(k), c(k);
        const VectorXd az = p.decoder.w_update * theta + p.decoder.u_update * h + p.decoder.b_update;
        const VectorXd ar = p.decoder.w_reset * theta + p.decoder.u_reset * h + p.decoder.b_reset;
        for (int i = 0; i < k; ++i) {
            z(i) = sigmoid_scalar(az(i));
            r(i) = sigmoid_scalar(ar(i));
        }
        const VectorXd ah =
            p.decoder.w_cand * theta + p.decoder.u_cand * r.cwiseProduct(h) + p.decoder.b_cand;
        for (int i = 0; i < k; ++i) c(i) = std::tanh(ah(i));
        h = (VectorXd::Ones(k) - z).cwiseProduct(h) + z.cwiseProduct(c);

        VectorXd logits = p.out_weight.transpose() * h + p.out_bias;
        const double m = logits.maxCoeff();
        VectorXd e = (logits.array() - m).exp();
        const VectorXd expect = e / e.sum();
        CHECK((probs.row(t).transpose() - expect).lpNorm<Eigen::Infinity>() < 1e-14);
    }
}

TEST_CASE("loss oracles") {
    SUBCASE("uniform predictions over 4 actions cost log 4") {
        const AeParams p = AeParams::zeros(4, 3);
        const Batch batch = Batch::from_sequences({{0, 1, 2}, {3, 3}});
        CHECK(loss(p, batch) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SUBCASE("near-certain correct predictions cost ~0") {
        AeParams p = AeParams::zeros(2, 3);
        p.out_bias(0) = 50.0; // softmax puts ~1 on action 0 at every step
        const Batch batch = Batch::from_sequences({{0, 0, 0}, {0}});
        CHECK(loss(p, batch) < 1e-12);
    }
    SUBCASE("batch loss is the length-weighted mean of per-step losses") {
        const AeParams p = init_params(5, 4, 31);
        const std::vector<TokenSeq> seqs{{0, 2, 4, 1}, {3, 3}};
        const Batch batch = Batch::from_sequences(seqs);

        double nll = 0.0;
        long steps = 0;
        for (const auto& s : seqs) {
            const VectorXd theta = encode(p, s);
            const MatrixXd probs = decode(p, theta, static_cast<int>(s.size()));
            for (std::size_t t = 0; t < s.size(); ++t) {
                nll -= std::log(probs(static_cast<long>(t), s[t]));
                ++steps;
            }
        }
        CHECK(loss(p, batch) == doctest::Approx(nll / static_cast<double>(steps)).epsilon(1e-12));
    }
}

TEST_CASE("analytic gradients match central finite differences (K=4, alphabet 5, batch 3)") {
    const AeParams p = init_params(5, 4, 2024);
    const Batch batch = Batch::from_sequences({{0, 1, 2, 3, 4}, {4, 2, 0}, {1, 1, 3, 1}});
    CHECK(gradient_check(p, batch) < 1e-4);
}

TEST_CASE("gradient is ~0 at a zero-loss configuration and exactly 0 off-path") {
    SUBCASE("stationary at the optimum") {
        AeParams p = AeParams::zeros(2, 3);
        p.out_bias(0) = 50.0;
        const Batch batch = Batch::from_sequences({{0, 0}, {0}});
        const auto [value, grads] = loss_and_grad(p, batch);
        CHECK(value < 1e-12);
        double norm_sq = 0.0;
        grads.for_each_block([&norm_sq](const char*, const double* data, std::size_t n) {
            for (std::size_t i = 0; i < n; ++i) norm_sq += data[i] * data[i];
        });
        CHECK(std::sqrt(norm_sq) < 1e-8);
    }
    SUBCASE("unused vocabulary rows get exactly zero gradient") {
        const AeParams p = init_params(6, 4, 3);
        const Batch batch = Batch::from_sequences({{0, 1}, {2, 0}});
        const auto [value, grads] = loss_and_grad(p, batch);
        (void)value;
        // Tokens 3, 4, 5 never appear.
        for (int row : {3, 4, 5}) CHECK(grads.embedding.row(row).norm() == 0.0);
        CHECK(grads.embedding.row(0).norm() > 0.0);
    }
}

TEST_CASE("appending padding changes neither loss nor gradients") {
    const AeParams p = init_params(5, 4, 17);
    const std::vector<TokenSeq> seqs{{0, 1, 2}, {3}};
    const Batch tight = Batch::from_sequences(seqs);

    Batch padded;
    padded.lengths = tight.lengths;
    padded.tokens = Eigen::MatrixXi::Constant(2, tight.tokens.cols() + 5, -1);
    padded.tokens.leftCols(tight.tokens.cols()) = tight.tokens;

    CHECK(loss(p, tight) == loss(p, padded));
    const auto [l1, g1] = loss_and_grad(p, tight);
    const auto [l2, g2] = loss_and_grad(p, padded);
    CHECK(l1 == l2);
    double diff = 0.0;
    std::vector<std::pair<const double*, std::size_t>> blocks2;
    g2.for_each_block([&blocks2](const char*, const double* d, std::size_t n) {
        blocks2.emplace_back(d, n);
    });
    std::size_t b = 0;
    g1.for_each_block([&](const char*, const double* d, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(d[i] - blocks2[b].first[i]));
        ++b;
    });
    CHECK(diff == 0.0); // padding cells are never touched
}

TEST_CASE("training reduces loss on memorizable data and is seed-deterministic") {
    const Cohort cohort = template_cohort(60, 41);
    AeConfig cfg;
    cfg.k = 6;
    cfg.batch_size = 16;
    cfg.max_epochs = 25;
    cfg.patience = 25;
    cfg.learning_rate = 5e-3;
    cfg.seed = 9;

    const TrainResult run1 = train(cohort, cfg);
    REQUIRE(!run1.log.empty());
    CHECK(run1.log.back().train_loss <= run1.log.front().train_loss);

    const TrainResult run2 = train(cohort, cfg);
    REQUIRE(run1.log.size() == run2.log.size());
    for (std::size_t i = 0; i < run1.log.size(); ++i) {
        CHECK(run1.log[i].train_loss == run2.log[i].train_loss);
        CHECK(run1.log[i].val_loss == run2.log[i].val_loss);
    }
}

TEST_CASE("encode_cohort matches per-sequence encode and tracks row order") {
    const Cohort cohort = template_cohort(12, 5);
    const AeParams p = init_params(cohort.vocabulary.size(), 5, 77);

    const FeatureMatrix m = encode_cohort(p, cohort);
    CHECK(m.column_names == numbered_columns("ae", 5));
    REQUIRE(m.values.rows() == cohort.size());
    for (int i = 0; i < cohort.size(); ++i) {
        const VectorXd theta = encode(p, index_tokens(cohort.sequences[i], cohort.vocabulary));
        CHECK((m.values.row(i).transpose() - theta).norm() == 0.0);
        CHECK(m.subject_ids[static_cast<std::size_t>(i)] == cohort.sequences[i].subject_id);
    }

    // Permuting the cohort permutes the feature rows identically.
    Cohort reversed = cohort;
    std::reverse(reversed.sequences.begin(), reversed.sequences.end());
    const FeatureMatrix mr = encode_cohort(p, reversed);
    for (int i = 0; i < cohort.size(); ++i) {
        CHECK((mr.values.row(cohort.size() - 1 - i) - m.values.row(i)).norm() == 0.0);
    }
}

TEST_CASE("three-sequence layout contract (K=5): shape and subject alignment") {
    // Feature-table layout contract: three examinees, K=5.
    std::vector<ActionSequence> seqs;
    const std::vector<std::vector<std::string>> actions{
        {"Start", "Click_W4", "Toolbar_Web_Back", "Response_Open", "Response_4", "Response_Close",
         "Next", "Next_OK"},
        {"Start", "Click_W2", "Next", "Next_OK"},
        {"Start", "Click_W1", "Toolbar_Web_Back", "Click_W2", "Next", "Next_OK"}};
    for (std::size_t i = 0; i < actions.size(); ++i) {
        ActionSequence s;
        s.subject_id = "examinee" + std::to_string(i + 1);
        s.item_id = "U06b";
        s.tokens = actions[i];
        seqs.push_back(std::move(s));
    }
    const Cohort cohort = make_cohort("U06b", seqs);
    const AeParams p = init_params(cohort.vocabulary.size(), 5, 123);
    const FeatureMatrix m = encode_cohort(p, cohort);
    CHECK(m.values.rows() == 3);
    CHECK(m.values.cols() == 5);
    CHECK(m.subject_ids == std::vector<std::string>{"examinee1", "examinee2", "examinee3"});
    CHECK(m.values.allFinite());
}

TEST_CASE("encode_cohort rejects vocabulary size mismatch") {
    const Cohort cohort = template_cohort(5, 2);
    const AeParams p = init_params(cohort.vocabulary.size() + 1, 4, 3);
    CHECK_THROWS_AS(encode_cohort(p, cohort), DataError);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    const Cohort cohort = template_cohort(8, 6);
    const AeParams p = init_params(cohort.vocabulary.size(), 4, 55);

    namespace fs = std::filesystem;
    const fs::path dir = fs::current_path() / "tmp_test_autoencoder";
    fs::create_directories(dir);
    const std::string path = (dir / "params.bin").string();
    save_checkpoint(path, p, cohort.vocabulary);

    const auto [loaded, vocab] = load_checkpoint(path);
    CHECK(vocab.labels() == cohort.vocabulary.labels());
    CHECK(vocab.item_id() == cohort.vocabulary.item_id());
    CHECK(loaded.embedding == p.embedding);
    CHECK(loaded.out_weight == p.out_weight);
    CHECK(loaded.out_bias == p.out_bias);
    CHECK(loaded.encoder.u_cand == p.encoder.u_cand);
    CHECK(loaded.decoder.w_update == p.decoder.w_update);
}
