#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpmean {

struct StreamRecord {
    long t = 0;  // -1 when the file has no t column
    int user_id = 0;
    std::vector<double> values;
};

struct StreamFile {
    std::size_t dim = 0;
    bool has_t = false;
    std::vector<StreamRecord> records;
};

/// Parse a stream CSV: header row with columns user_id (required),
/// v1..vd (at least one), and optional t. Errors carry the line number
/// and, for a missing required column, its name.
StreamFile read_stream_csv(std::istream& in, const std::string& name);
StreamFile read_stream_csv(const std::string& path);

/// Round-robin stream of heavy-tailed positive amounts (lognormal), the
/// documented substitute for a transactions-style dataset: b users, d
/// columns, deterministic in the seed.
StreamFile synthetic_stream(std::size_t n, int users, std::size_t dim, std::uint64_t seed);

void write_stream_csv(std::ostream& out, const StreamFile& file);

}  // namespace dpmean
