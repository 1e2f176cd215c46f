#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hiref {

using Index = std::int64_t;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A point cloud in R^d with implicit uniform weights 1/n.
struct Dataset {
    RowMat points;  // n x d

    Dataset() = default;
    explicit Dataset(RowMat p);

    Index size() const { return points.rows(); }
    int dim() const { return static_cast<int>(points.cols()); }
};

/// Rows of `ds` selected by `idx`, in order.
Dataset gather(const Dataset& ds, std::span<const Index> idx);

Vector uniform_weights(Index n);

// Point file IO. CSV: one point per row, optional header. Binary: magic
// "OTPT", u32 version=1, u64 n, u64 d, then n*d little-endian doubles
// row-major. `load_points`/`save_points` pick the format from the
// extension (".csv" -> CSV, anything else -> binary).
Dataset read_points_csv(const std::string& path);
void write_points_csv(const Dataset& ds, const std::string& path);
Dataset read_points_binary(const std::string& path);
void write_points_binary(const Dataset& ds, const std::string& path);
Dataset load_points(const std::string& path);
void save_points(const Dataset& ds, const std::string& path);

}  // namespace hiref
