#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <vector>

namespace spca {

/// Row-major so that one sample is contiguous in memory.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// N samples of dimension d, optionally labelled.
struct Dataset {
    PointMatrix points;
    std::optional<std::vector<int>> labels;

    Dataset() = default;
    explicit Dataset(PointMatrix pts, std::optional<std::vector<int>> lbl = std::nullopt)
        : points(std::move(pts)), labels(std::move(lbl)) {}

    Eigen::Index size() const noexcept { return points.rows(); }
    Eigen::Index dim() const noexcept { return points.cols(); }

    Vector point(Eigen::Index i) const { return points.row(i).transpose(); }

    /// Throws InvalidArgument unless N >= 1, d >= 1, all coordinates finite
    /// and the label count (if any) equals N.
    void validate() const;
};

Vector column_mean(const Dataset& data);

/// Rows selected by index, labels carried along.
Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows);

struct CsvOptions {
    /// The last column holds an integer class label.
    bool labeled = false;
    /// Significant digits written by save_csv; 17 round-trips doubles exactly.
    int precision = 17;
};

/// Comma-separated rows, '.' decimal separator; lines starting with '#' are skipped.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});
void save_csv(const Dataset& data, const std::filesystem::path& path, const CsvOptions& opts = {});

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string format_csv(const Dataset& data, const CsvOptions& opts = {});
Dataset parse_csv(const std::string& text, const CsvOptions& opts = {});

}  // namespace spca
