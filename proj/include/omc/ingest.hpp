#pragma once

#include "omc/online.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace omc {

struct RatingRecord {
    std::int64_t user_id = 0;
    std::int64_t item_id = 0;
    double rating = 0.0;
    std::int64_t timestamp = 0;  // epoch seconds
};

/// Permitted rating values: [min_value, max_value], optionally on a step
/// grid anchored at min_value (step 0 disables the grid check).
struct RatingScale {
    double min_value = 0.5;
    double max_value = 5.0;
    double step = 0.5;
};

/// Shape of a delimited ratings file: one record per line, configurable
/// delimiter and column positions, optional single header line.
struct FileFormat {
    char delimiter = ',';
    int user_column = 0;
    int item_column = 1;
    int rating_column = 2;
    int timestamp_column = 3;
    bool has_header = false;
    std::optional<RatingScale> scale;  // nullopt skips rating validation
};

/// Cut points for a cumulative sequence: matrix j (1-based) holds every
/// rating with timestamp <= start_epoch + j * interval_days in seconds.
/// Users/items below the rating-count thresholds (counted once per
/// deduplicated pair over the whole record set) are dropped before
/// indexing, and row/column ids are fixed globally across the sequence.
struct SliceSpec {
    std::int64_t start_epoch = 0;
    Index interval_days = 30;
    Index count = 1;
    Index min_user_ratings = 0;
    Index min_item_ratings = 0;
};

/// Parse a ratings file. Malformed lines, short lines, and out-of-scale
/// ratings raise DataError naming the line number.
std::vector<RatingRecord> load_ratings(const std::string& path, const FileFormat& format);

/// Cumulative interval slices of the records; duplicate (user, item) pairs
/// keep the latest timestamp's value first. Labels are the cut dates
/// (UTC). An empty matrix at any cut point raises DataError.
MatrixSequence slice_sequence(const std::vector<RatingRecord>& records, const SliceSpec& spec);

/// Disjoint uniform split of the observed entries; train receives
/// ceil(train_fraction * nnz) of them. The fraction must lie strictly
/// inside (0, 1).
std::pair<SparseMatrix, SparseMatrix> split_train_test(const SparseMatrix& x,
                                                       double train_fraction,
                                                       std::uint64_t seed);

}  // namespace omc
