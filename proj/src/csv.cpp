#include "dpmean/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpmean/rng.hpp"
#include "dpmean/util.hpp"

namespace dpmean {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        std::size_t a = cell.find_first_not_of(" \t\r");
        std::size_t b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

[[noreturn]] void fail(const std::string& name, std::size_t line_no, const std::string& why) {
    throw io_error(name + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

StreamFile read_stream_csv(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    do {
        if (!std::getline(in, line)) throw io_error(name + ": empty file");
        ++line_no;
    } while (!line.empty() && line[0] == '#');  // metadata comment lines

    const auto header = split_csv_line(line);
    int col_t = -1, col_user = -1;
    std::vector<int> col_v;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "t") col_t = static_cast<int>(i);
        else if (header[i] == "user_id") col_user = static_cast<int>(i);
        else if (header[i].size() >= 2 && header[i][0] == 'v') col_v.push_back(static_cast<int>(i));
    }
    if (col_user < 0) fail(name, line_no, "missing required column: user_id");
    if (col_v.empty()) fail(name, line_no, "missing value columns v1..vd");

    StreamFile file;
    file.dim = col_v.size();
    file.has_t = col_t >= 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (cells.size() < header.size()) fail(name, line_no, "expected " + std::to_string(header.size()) + " columns");
        StreamRecord rec;
        try {
            rec.t = col_t >= 0 ? std::stol(cells[static_cast<std::size_t>(col_t)]) : -1;
            rec.user_id = std::stoi(cells[static_cast<std::size_t>(col_user)]);
            for (int ci : col_v) {
                const double v = std::stod(cells[static_cast<std::size_t>(ci)]);
                if (!std::isfinite(v)) fail(name, line_no, "non-finite value");
                rec.values.push_back(v);
            }
        } catch (const io_error&) {
            throw;
        } catch (const std::exception&) {
            fail(name, line_no, "malformed numeric field");
        }
        if (rec.user_id < 0) fail(name, line_no, "user_id must be non-negative");
        file.records.push_back(std::move(rec));
    }
    return file;
}

StreamFile read_stream_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return read_stream_csv(in, path);
}

StreamFile synthetic_stream(std::size_t n, int users, std::size_t dim, std::uint64_t seed) {
    if (users < 1 || dim < 1) throw precondition_error("synthetic_stream: bad shape");
    StreamFile file;
    file.dim = dim;
    file.has_t = true;
    file.records.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        StreamRecord rec;
        rec.t = static_cast<long>(t + 1);
        rec.user_id = static_cast<int>(t % static_cast<std::size_t>(users));
        for (std::size_t j = 0; j < dim; ++j) {
            // lognormal amounts, median ~150, occasional values past 1000
            const double g = gaussian(seed, kDomainSyntheticData, t + 1, j);
            rec.values.push_back(std::exp(5.0 + 1.0 * g));
        }
        file.records.push_back(std::move(rec));
    }
    return file;
}

void write_stream_csv(std::ostream& out, const StreamFile& file) {
    out << "t,user_id";
    for (std::size_t j = 1; j <= file.dim; ++j) out << ",v" << j;
    out << "\n";
    char buf[64];
    for (const StreamRecord& rec : file.records) {
        out << rec.t << ',' << rec.user_id;
        for (double v : rec.values) {
            std::snprintf(buf, sizeof buf, "%.10g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace dpmean
