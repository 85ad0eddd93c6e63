#include "seqfeat/oss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "seqfeat/errors.hpp"
#include "seqfeat/io.hpp"

namespace seqfeat {

namespace {

// Occurrence positions (1-based) grouped by token, sorted by token id so a
// pair can be merge-joined.
struct IndexedSequence {
    std::vector<std::pair<int, std::vector<int>>> positions;
    long length = 0;
};

IndexedSequence index_sequence(const std::vector<int>& tokens, int n_tokens) {
    std::vector<std::vector<int>> by_token(static_cast<std::size_t>(n_tokens));
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        by_token[static_cast<std::size_t>(tokens[t])].push_back(static_cast<int>(t) + 1);
    }
    IndexedSequence out;
    out.length = static_cast<long>(tokens.size());
    for (int a = 0; a < n_tokens; ++a) {
        if (!by_token[static_cast<std::size_t>(a)].empty()) {
            out.positions.emplace_back(a, std::move(by_token[static_cast<std::size_t>(a)]));
        }
    }
    return out;
}

// d = (f_num / maxL + g) / (Li + Lj), evaluated as one division over exact
// integer sums: (f_num + g * maxL) / (maxL * (Li + Lj)).
double oss_from_indexed(const IndexedSequence& a, const IndexedSequence& b) {
    long f_num = 0;
    long g = 0;
    std::size_t i = 0, j = 0;
    while (i < a.positions.size() && j < b.positions.size()) {
        const int ta = a.positions[i].first;
        const int tb = b.positions[j].first;
        if (ta == tb) {
            const auto& pa = a.positions[i].second;
            const auto& pb = b.positions[j].second;
            const std::size_t k = std::min(pa.size(), pb.size());
            for (std::size_t m = 0; m < k; ++m) f_num += std::labs(pa[m] - pb[m]);
            ++i;
            ++j;
        } else if (ta < tb) {
            g += static_cast<long>(a.positions[i].second.size());
            ++i;
        } else {
            g += static_cast<long>(b.positions[j].second.size());
            ++j;
        }
    }
    for (; i < a.positions.size(); ++i) g += static_cast<long>(a.positions[i].second.size());
    for (; j < b.positions.size(); ++j) g += static_cast<long>(b.positions[j].second.size());

    const long max_l = std::max(a.length, b.length);
    return static_cast<double>(f_num + g * max_l) /
           static_cast<double>(max_l * (a.length + b.length));
}

int thread_count() {
    if (const char* env = std::getenv("SEQFEAT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace

void validate(const DissimilarityMatrix& d, double tol) {
    const int n = d.size();
    if (d.entries.cols() != n || static_cast<int>(d.subject_ids.size()) != n) {
        throw DataError("dissimilarity matrix shape/id mismatch");
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(d.entries(i, i)) > tol) throw DataError("dissimilarity diagonal not zero");
        for (int j = i + 1; j < n; ++j) {
            const double v = d.entries(i, j);
            if (!std::isfinite(v)) throw DataError("non-finite dissimilarity entry");
            if (std::abs(v - d.entries(j, i)) > tol) throw DataError("dissimilarity not symmetric");
            if (v < -tol || v > 1.0 + tol) throw DataError("dissimilarity outside [0, 1]");
        }
    }
}

double oss_distance(const ActionSequence& a, const ActionSequence& b) {
    if (a.tokens.empty() || b.tokens.empty()) throw DataError("oss_distance: empty sequence");
    Vocabulary vocab("pair");
    std::vector<int> ta, tb;
    ta.reserve(a.tokens.size());
    tb.reserve(b.tokens.size());
    for (const auto& t : a.tokens) ta.push_back(vocab.add(t));
    for (const auto& t : b.tokens) tb.push_back(vocab.add(t));
    return oss_from_indexed(index_sequence(ta, vocab.size()), index_sequence(tb, vocab.size()));
}

DissimilarityMatrix dissimilarity_matrix(const Cohort& cohort) {
    const int n = cohort.size();
    if (n < 2) throw DataError("dissimilarity_matrix: cohort needs at least 2 sequences");

    std::vector<IndexedSequence> indexed;
    indexed.reserve(static_cast<std::size_t>(n));
    for (const auto& seq : cohort.sequences) {
        indexed.push_back(index_sequence(index_tokens(seq, cohort.vocabulary),
                                         cohort.vocabulary.size()));
    }

    DissimilarityMatrix d;
    d.subject_ids.reserve(static_cast<std::size_t>(n));
    for (const auto& seq : cohort.sequences) d.subject_ids.push_back(seq.subject_id);
    d.entries = Eigen::MatrixXd::Zero(n, n);

    // Rows are independent; each (i, j) pair is written exactly once from row
    // min(i, j), so the result does not depend on the thread schedule.
    const int n_threads = std::min(thread_count(), n);
    auto worker = [&](int first_row) {
        for (int i = first_row; i < n; i += n_threads) {
            for (int j = i + 1; j < n; ++j) {
                const double v = oss_from_indexed(indexed[static_cast<std::size_t>(i)],
                                                  indexed[static_cast<std::size_t>(j)]);
                d.entries(i, j) = v;
                d.entries(j, i) = v;
            }
        }
    };
    if (n_threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    return d;
}

void write_dissimilarity_csv(const std::string& path, const DissimilarityMatrix& d) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out << "subject_id";
    for (const auto& id : d.subject_ids) out << ',' << id;
    out << '\n';
    for (int i = 0; i < d.size(); ++i) {
        out << d.subject_ids[static_cast<std::size_t>(i)];
        for (int j = 0; j < d.size(); ++j) out << ',' << format_double(d.entries(i, j));
        out << '\n';
    }
}

DissimilarityMatrix read_dissimilarity_csv(const std::string& path) {
    FeatureMatrix m = read_feature_matrix_csv(path);
    DissimilarityMatrix d;
    d.subject_ids = m.subject_ids;
    d.entries = std::move(m.values);
    if (m.column_names != d.subject_ids) {
        throw DataError("dissimilarity csv header ids disagree with row ids");
    }
    validate(d);
    return d;
}

namespace {
constexpr char kDissimMagic[4] = {'S', 'Q', 'D', 'M'};
}

void write_dissimilarity_binary(const std::string& path, const DissimilarityMatrix& d) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    out.write(kDissimMagic, 4);
    const std::uint32_t version = 1;
    const std::uint64_t n = static_cast<std::uint64_t>(d.size());
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    for (const auto& id : d.subject_ids) {
        const std::uint32_t len = static_cast<std::uint32_t>(id.size());
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(id.data(), static_cast<std::streamsize>(len));
    }
    out.write(reinterpret_cast<const char*>(d.entries.data()),
              static_cast<std::streamsize>(sizeof(double) * n * n));
}

DissimilarityMatrix read_dissimilarity_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path + "'");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kDissimMagic, 4)) {
        throw DataError("bad dissimilarity binary header in '" + path + "'");
    }
    std::uint32_t version = 0;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || version != 1) throw DataError("unsupported dissimilarity binary version");
    DissimilarityMatrix d;
    d.subject_ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof len);
        std::string id(len, '\0');
        in.read(id.data(), static_cast<std::streamsize>(len));
        d.subject_ids.push_back(std::move(id));
    }
    d.entries.resize(static_cast<long>(n), static_cast<long>(n));
    in.read(reinterpret_cast<char*>(d.entries.data()),
            static_cast<std::streamsize>(sizeof(double) * n * n));
    if (!in) throw DataError("truncated dissimilarity binary '" + path + "'");
    return d;
}

} // namespace seqfeat
