#include "omc/ingest.hpp"

#include "omc/rsvd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace omc {

namespace {

[[noreturn]] void line_error(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& field, const std::string& path, std::size_t line_no) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &used);
    } catch (const std::exception&) {
        line_error(path, line_no, "not a number: '" + field + "'");
    }
    if (used != field.size()) line_error(path, line_no, "trailing garbage in '" + field + "'");
    return value;
}

std::int64_t parse_int(const std::string& field, const std::string& path, std::size_t line_no) {
    std::size_t used = 0;
    std::int64_t value = 0;
    try {
        value = std::stoll(field, &used);
    } catch (const std::exception&) {
        line_error(path, line_no, "not an integer: '" + field + "'");
    }
    if (used != field.size()) line_error(path, line_no, "trailing garbage in '" + field + "'");
    return value;
}

std::string utc_date(std::int64_t epoch) {
    const std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday);
    return buf;
}

}  // namespace

std::vector<RatingRecord> load_ratings(const std::string& path, const FileFormat& format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ratings file: " + path);
    const int needed = std::max({format.user_column, format.item_column, format.rating_column,
                                 format.timestamp_column}) +
                       1;
    std::vector<RatingRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && format.has_header) continue;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, format.delimiter)) fields.push_back(field);
        if (static_cast<int>(fields.size()) < needed)
            line_error(path, line_no,
                       "expected at least " + std::to_string(needed) + " fields, got " +
                           std::to_string(fields.size()));
        RatingRecord rec;
        rec.user_id = parse_int(fields[format.user_column], path, line_no);
        rec.item_id = parse_int(fields[format.item_column], path, line_no);
        rec.rating = parse_double(fields[format.rating_column], path, line_no);
        rec.timestamp = parse_int(fields[format.timestamp_column], path, line_no);
        if (format.scale) {
            const RatingScale& s = *format.scale;
            if (rec.rating < s.min_value || rec.rating > s.max_value)
                line_error(path, line_no,
                           "rating " + std::to_string(rec.rating) + " outside scale [" +
                               std::to_string(s.min_value) + ", " +
                               std::to_string(s.max_value) + "]");
            if (s.step > 0.0) {
                const double steps = (rec.rating - s.min_value) / s.step;
                if (std::abs(steps - std::round(steps)) > 1e-9)
                    line_error(path, line_no,
                               "rating " + std::to_string(rec.rating) + " is not on the " +
                                   std::to_string(s.step) + " step grid");
            }
        }
        records.push_back(rec);
    }
    return records;
}

MatrixSequence slice_sequence(const std::vector<RatingRecord>& records, const SliceSpec& spec) {
    if (spec.interval_days < 1)
        throw std::invalid_argument("slice_sequence: interval_days must be >= 1");
    if (spec.count < 1) throw std::invalid_argument("slice_sequence: count must be >= 1");
    if (records.empty()) throw DataError("slice_sequence: no rating records");

    // Latest timestamp wins per (user, item); later file position breaks
    // timestamp ties.
    std::map<std::pair<std::int64_t, std::int64_t>, std::pair<std::int64_t, std::size_t>> best;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto key = std::make_pair(records[i].user_id, records[i].item_id);
        const auto candidate = std::make_pair(records[i].timestamp, i);
        auto [it, inserted] = best.emplace(key, candidate);
        if (!inserted && candidate >= it->second) it->second = candidate;
    }
    std::vector<RatingRecord> unique;
    unique.reserve(best.size());
    for (const auto& [key, value] : best) unique.push_back(records[value.second]);

    std::map<std::int64_t, Index> user_degree;
    std::map<std::int64_t, Index> item_degree;
    for (const auto& rec : unique) {
        ++user_degree[rec.user_id];
        ++item_degree[rec.item_id];
    }
    std::vector<RatingRecord> kept;
    for (const auto& rec : unique)
        if (user_degree[rec.user_id] >= spec.min_user_ratings &&
            item_degree[rec.item_id] >= spec.min_item_ratings)
            kept.push_back(rec);
    if (kept.empty()) throw DataError("slice_sequence: rating-count filters removed everything");

    // Global id maps from the full filtered set, so dimensions are fixed
    // across the sequence.
    std::map<std::int64_t, Index> user_index;
    std::map<std::int64_t, Index> item_index;
    for (const auto& rec : kept) {
        user_index.emplace(rec.user_id, 0);
        item_index.emplace(rec.item_id, 0);
    }
    Index next = 0;
    for (auto& [id, at] : user_index) at = next++;
    next = 0;
    for (auto& [id, at] : item_index) at = next++;
    const Index m = static_cast<Index>(user_index.size());
    const Index n = static_cast<Index>(item_index.size());

    MatrixSequence seq;
    for (Index j = 1; j <= spec.count; ++j) {
        const std::int64_t cutoff = spec.start_epoch + j * spec.interval_days * 86400;
        std::vector<Triplet> entries;
        for (const auto& rec : kept)
            if (rec.timestamp <= cutoff)
                entries.push_back({user_index[rec.user_id], item_index[rec.item_id], rec.rating});
        if (entries.empty())
            throw DataError("slice_sequence: no ratings on or before cut " + utc_date(cutoff));
        seq.matrices.emplace_back(m, n, std::move(entries));
        seq.labels.push_back(utc_date(cutoff));
    }
    return seq;
}

std::pair<SparseMatrix, SparseMatrix> split_train_test(const SparseMatrix& x,
                                                       double train_fraction,
                                                       std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: fraction must be inside (0, 1)");
    std::vector<Index> order(x.nnz());
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 gen(derive_seed(seed, 11));
    std::shuffle(order.begin(), order.end(), gen);
    const Index n_train =
        static_cast<Index>(std::ceil(train_fraction * static_cast<double>(x.nnz())));
    std::vector<Triplet> train_entries;
    std::vector<Triplet> test_entries;
    train_entries.reserve(n_train);
    test_entries.reserve(x.nnz() - n_train);
    for (Index i = 0; i < x.nnz(); ++i) {
        const Index at = order[i];
        const Triplet entry{x.rows()[at], x.cols()[at], x.values()[at]};
        (i < n_train ? train_entries : test_entries).push_back(entry);
    }
    return {SparseMatrix(x.n_rows(), x.n_cols(), std::move(train_entries)),
            SparseMatrix(x.n_rows(), x.n_cols(), std::move(test_entries))};
}

}  // namespace omc
