#include "seqfeat/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seqfeat/errors.hpp"

namespace seqfeat {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write file '" + path + "'");
    return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

ActionSequence parse_json_record(const std::string& line, long line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line_no) + ": malformed json (" + e.what() + ")");
    }
    ActionSequence seq;
    try {
        seq.subject_id = obj.at("subject_id").get<std::string>();
        seq.item_id = obj.at("item_id").get<std::string>();
        seq.tokens = obj.at("actions").get<std::vector<std::string>>();
        const auto& score = obj.at("score");
        if (!score.is_null()) seq.score = score.get<int>();
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line_no) + ": bad record (" + e.what() + ")");
    }
    return seq;
}

ActionSequence parse_csv_record(const std::string& line, long line_no) {
    const auto fields = split(line, ',');
    if (fields.size() != 4) {
        throw DataError("line " + std::to_string(line_no) + ": expected 4 csv fields, got " +
                        std::to_string(fields.size()));
    }
    ActionSequence seq;
    seq.subject_id = fields[0];
    seq.item_id = fields[1];
    if (!fields[2].empty()) {
        try {
            std::size_t pos = 0;
            seq.score = std::stoi(fields[2], &pos);
            if (pos != fields[2].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DataError("line " + std::to_string(line_no) + ": bad score '" + fields[2] + "'");
        }
    }
    if (!fields[3].empty()) seq.tokens = split(fields[3], '|');
    return seq;
}

double parse_double(const std::string& s, long line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    }
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<Cohort> ingest_sequences(const std::string& path, SequenceFormat format) {
    auto in = open_input(path);
    std::vector<std::string> item_order;
    std::map<std::string, std::vector<ActionSequence>> by_item;

    std::string line;
    long line_no = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (format == SequenceFormat::csv && !header_skipped) {
            header_skipped = true;
            continue;
        }
        ActionSequence seq = format == SequenceFormat::json_lines
                                 ? parse_json_record(line, line_no)
                                 : parse_csv_record(line, line_no);
        try {
            validate(seq);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!by_item.count(seq.item_id)) item_order.push_back(seq.item_id);
        by_item[seq.item_id].push_back(std::move(seq));
    }
    if (item_order.empty()) throw DataError("no records in '" + path + "'");

    std::vector<Cohort> cohorts;
    cohorts.reserve(item_order.size());
    for (const auto& item : item_order) {
        cohorts.push_back(make_cohort(item, std::move(by_item[item])));
    }
    return cohorts;
}

void emit_sequences_json_lines(const std::string& path, const std::vector<Cohort>& cohorts) {
    auto out = open_output(path);
    for (const auto& cohort : cohorts) {
        for (const auto& seq : cohort.sequences) {
            json obj;
            obj["subject_id"] = seq.subject_id;
            obj["item_id"] = seq.item_id;
            obj["actions"] = seq.tokens;
            if (seq.score) {
                obj["score"] = *seq.score;
            } else {
                obj["score"] = nullptr;
            }
            out << obj.dump() << '\n';
        }
    }
}

void emit_sequences_csv(const std::string& path, const std::vector<Cohort>& cohorts) {
    auto out = open_output(path);
    out << "subject_id,item_id,score,actions\n";
    for (const auto& cohort : cohorts) {
        for (const auto& seq : cohort.sequences) {
            out << seq.subject_id << ',' << seq.item_id << ',';
            if (seq.score) out << *seq.score;
            out << ',';
            for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
                if (i) out << '|';
                out << seq.tokens[i];
            }
            out << '\n';
        }
    }
}

CovariateTable read_covariates_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty covariate file '" + path + "'");
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "subject_id") {
        throw DataError("covariate csv must start with a subject_id column");
    }

    std::vector<std::string> ids;
    std::vector<std::vector<double>> cols(header.size() - 1);
    std::vector<std::vector<bool>> miss(header.size() - 1);
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        ids.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            if (fields[c].empty()) {
                cols[c - 1].push_back(0.0);
                miss[c - 1].push_back(true);
            } else {
                cols[c - 1].push_back(parse_double(fields[c], line_no));
                miss[c - 1].push_back(false);
            }
        }
    }

    CovariateTable table(std::move(ids));
    for (std::size_t c = 1; c < header.size(); ++c) {
        CovariateColumn col;
        col.values = std::move(cols[c - 1]);
        col.missing = std::move(miss[c - 1]);
        // Binary inference: at most two distinct integral codes.
        std::set<double> distinct;
        bool integral = true;
        for (std::size_t i = 0; i < col.values.size(); ++i) {
            if (col.missing[i]) continue;
            distinct.insert(col.values[i]);
            if (col.values[i] != std::floor(col.values[i])) integral = false;
        }
        col.kind = (integral && !distinct.empty() && distinct.size() <= 2)
                       ? CovariateColumn::Kind::binary
                       : CovariateColumn::Kind::continuous;
        table.add_column(header[c], std::move(col));
    }
    return table;
}

void write_covariates_csv(const std::string& path, const CovariateTable& table) {
    auto out = open_output(path);
    out << "subject_id";
    for (const auto& name : table.column_names()) out << ',' << name;
    out << '\n';
    for (int i = 0; i < table.n_subjects(); ++i) {
        out << table.subject_ids()[static_cast<std::size_t>(i)];
        for (const auto& name : table.column_names()) {
            const auto& col = table.column(name);
            out << ',';
            if (!col.missing[static_cast<std::size_t>(i)]) {
                out << format_double(col.values[static_cast<std::size_t>(i)]);
            }
        }
        out << '\n';
    }
}

FeatureMatrix read_feature_matrix_csv(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty feature file '" + path + "'");
    const auto header = split(line, ',');
    if (header.size() < 2 || header[0] != "subject_id") {
        throw DataError("feature csv must start with a subject_id column");
    }
    FeatureMatrix m;
    m.column_names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
        }
        m.subject_ids.push_back(fields[0]);
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(parse_double(fields[c], line_no));
        rows.push_back(std::move(row));
    }
    m.values.resize(static_cast<long>(rows.size()), static_cast<long>(m.column_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m.values(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_feature_matrix_csv(const std::string& path, const FeatureMatrix& m) {
    if (static_cast<long>(m.column_names.size()) != m.values.cols() ||
        static_cast<long>(m.subject_ids.size()) != m.values.rows()) {
        throw DataError("feature matrix header/shape mismatch");
    }
    auto out = open_output(path);
    out << "subject_id";
    for (const auto& name : m.column_names) out << ',' << name;
    out << '\n';
    for (long r = 0; r < m.values.rows(); ++r) {
        out << m.subject_ids[static_cast<std::size_t>(r)];
        for (long c = 0; c < m.values.cols(); ++c) out << ',' << format_double(m.values(r, c));
        out << '\n';
    }
}

} // namespace seqfeat
