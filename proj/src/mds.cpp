#include "seqfeat/mds.hpp"

#include <cmath>

#include "seqfeat/errors.hpp"
#include "seqfeat/rng.hpp"

namespace seqfeat {

double stress(const DissimilarityMatrix& d, const Eigen::MatrixXd& x) {
    const int n = d.size();
    if (x.rows() != n) throw DataError("stress: coordinate rows disagree with matrix size");
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dist = (x.row(i) - x.row(j)).norm();
            const double diff = d.entries(i, j) - dist;
            s += diff * diff;
        }
    }
    return s;
}

Eigen::MatrixXd classical_mds(const DissimilarityMatrix& d, int k) {
    const int n = d.size();
    // B = -1/2 J D^2 J via row/column mean subtraction.
    Eigen::MatrixXd sq = d.entries.array().square();
    const Eigen::VectorXd row_mean = sq.rowwise().mean();
    const double total_mean = sq.mean();
    Eigen::MatrixXd b(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - row_mean(j) + total_mean);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    if (solver.info() != Eigen::Success) throw NumericError("classical MDS eigendecomposition failed");

    // Eigen returns eigenvalues ascending; take the top k, clamping negative
    // eigenvalues (OSS need not be Euclidean) to zero contribution.
    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, k);
    for (int c = 0; c < k; ++c) {
        const int idx = n - 1 - c;
        const double ev = solver.eigenvalues()(idx);
        if (ev > 0.0) coords.col(c) = solver.eigenvectors().col(idx) * std::sqrt(ev);
    }
    return coords;
}

namespace {

// Guttman transform with uniform weights: X' = (1/N) B(X) X.
Eigen::MatrixXd guttman_step(const DissimilarityMatrix& d, const Eigen::MatrixXd& x) {
    const int n = d.size();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dist = (x.row(i) - x.row(j)).norm();
            const double v = dist > 0.0 ? -d.entries(i, j) / dist : 0.0;
            b(i, j) = v;
            b(j, i) = v;
        }
    }
    for (int i = 0; i < n; ++i) b(i, i) = -b.row(i).sum();
    return (b * x) / static_cast<double>(n);
}

} // namespace

Embedding mds_embed(const DissimilarityMatrix& d, const MdsConfig& cfg) {
    validate(d);
    const int n = d.size();
    if (cfg.k < 1 || cfg.k > n - 1) {
        throw ConfigError("mds: K must satisfy 1 <= K <= N-1 (K=" + std::to_string(cfg.k) +
                          ", N=" + std::to_string(n) + ")");
    }
    if (cfg.rel_tol <= 0.0) throw ConfigError("mds: rel_tol must be positive");
    if (!d.entries.allFinite()) throw DataError("mds: non-finite dissimilarities");

    Eigen::MatrixXd x;
    if (cfg.init == MdsConfig::Init::classical) {
        x = classical_mds(d, cfg.k);
    } else {
        Rng rng(cfg.seed);
        x.resize(n, cfg.k);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < cfg.k; ++c) x(i, c) = rng.uniform(-0.5, 0.5);
        }
        x.rowwise() -= x.colwise().mean();
    }

    Embedding e;
    e.subject_ids = d.subject_ids;

    double cur = stress(d, x);
    e.stress_history.push_back(cur);
    int iter = 0;
    while (iter < cfg.max_iter) {
        Eigen::MatrixXd next = guttman_step(d, x);
        const double next_stress = stress(d, next);
        if (next_stress > cur) {
            // Majorization cannot increase stress; beyond rounding noise this
            // is a bug. At the floating-point floor, keep the current iterate.
            if (next_stress > cur + 1e-12 * std::max(1.0, cur)) {
                throw NumericError("mds: majorization increased stress at iteration " +
                                   std::to_string(iter + 1));
            }
            break;
        }
        x = std::move(next);
        ++iter;
        e.stress_history.push_back(next_stress);
        const double decrease = cur - next_stress;
        cur = next_stress;
        if (cur == 0.0 || decrease < cfg.rel_tol * std::max(cur, 1e-300)) break;
    }

    e.coordinates = std::move(x);
    e.final_stress = cur;
    e.n_iter = iter;
    return e;
}

FeatureMatrix to_feature_matrix(const Embedding& e) {
    FeatureMatrix m;
    m.subject_ids = e.subject_ids;
    m.column_names = numbered_columns("mds", static_cast<int>(e.coordinates.cols()));
    m.values = e.coordinates;
    return m;
}

} // namespace seqfeat
