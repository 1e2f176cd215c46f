#include "hiref/dataset.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "hiref/errors.hpp"

namespace hiref {

Dataset::Dataset(RowMat p) : points(std::move(p)) {
    if (points.rows() < 1 || points.cols() < 1)
        throw SizeError("dataset needs n >= 1 and d >= 1");
    if (!points.allFinite())
        throw NumericalError("dataset contains non-finite coordinates");
}

Dataset gather(const Dataset& ds, std::span<const Index> idx) {
    RowMat out(static_cast<Index>(idx.size()), ds.dim());
    for (Index r = 0; r < out.rows(); ++r) {
        const Index i = idx[static_cast<std::size_t>(r)];
        if (i < 0 || i >= ds.size()) throw InvalidSubset("gather: index out of range");
        out.row(r) = ds.points.row(i);
    }
    return Dataset(std::move(out));
}

Vector uniform_weights(Index n) {
    return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

namespace {

bool numeric_token(const std::string& tok) {
    char* end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end != tok.c_str() && *end == '\0';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
        std::size_t s = 0;
        while (s < tok.size() && tok[s] == ' ') ++s;
        out.push_back(tok.substr(s));
    }
    return out;
}

}  // namespace

Dataset read_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto toks = split_csv_line(line);
        if (toks.empty()) continue;
        if (first) {
            first = false;
            bool all_numeric = true;
            for (const auto& t : toks) all_numeric = all_numeric && numeric_token(t);
            if (!all_numeric) continue;  // header row
        }
        std::vector<double> vals;
        vals.reserve(toks.size());
        for (const auto& t : toks) {
            if (!numeric_token(t)) throw IoError(path + ": non-numeric value '" + t + "'");
            vals.push_back(std::strtod(t.c_str(), nullptr));
        }
        if (dim == 0) dim = vals.size();
        if (vals.size() != dim) throw IoError(path + ": inconsistent column count");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw IoError(path + ": no points");
    RowMat m(static_cast<Index>(rows.size()), static_cast<Index>(dim));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return Dataset(std::move(m));
}

void write_points_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(17);
    for (Index i = 0; i < ds.size(); ++i) {
        for (Index j = 0; j < ds.dim(); ++j) {
            if (j) out << ',';
            out << ds.points(i, j);
        }
        out << '\n';
    }
}

namespace {
constexpr char kMagic[4] = {'O', 'T', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

Dataset read_points_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t n = 0, d = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError(path + ": bad magic");
    if (version != kVersion) throw IoError(path + ": unsupported version");
    RowMat m(static_cast<Index>(n), static_cast<Index>(d));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(n * d * sizeof(double)));
    if (!in) throw IoError(path + ": truncated file");
    return Dataset(std::move(m));
}

void write_points_binary(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(ds.size());
    const std::uint64_t d = static_cast<std::uint64_t>(ds.dim());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    out.write(reinterpret_cast<const char*>(ds.points.data()),
              static_cast<std::streamsize>(n * d * sizeof(double)));
}

namespace {
bool has_csv_ext(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}
}  // namespace

Dataset load_points(const std::string& path) {
    return has_csv_ext(path) ? read_points_csv(path) : read_points_binary(path);
}

void save_points(const Dataset& ds, const std::string& path) {
    if (has_csv_ext(path))
        write_points_csv(ds, path);
    else
        write_points_binary(ds, path);
}

}  // namespace hiref
