#include "spca/dataset.hpp"

#include "spca/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace spca {

void Dataset::validate() const {
    if (points.rows() < 1 || points.cols() < 1) {
        throw InvalidArgument("dataset must contain at least one sample of dimension >= 1");
    }
    if (!points.allFinite()) {
        throw InvalidArgument("dataset contains non-finite coordinates");
    }
    if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows()) {
        throw InvalidArgument("label count " + std::to_string(labels->size()) +
                              " does not match sample count " + std::to_string(points.rows()));
    }
}

Vector column_mean(const Dataset& data) {
    return data.points.colwise().mean().transpose();
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    PointMatrix pts(static_cast<Eigen::Index>(rows.size()), data.dim());
    std::optional<std::vector<int>> lbl;
    if (data.labels) lbl.emplace();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pts.row(static_cast<Eigen::Index>(i)) = data.points.row(rows[i]);
        if (lbl) lbl->push_back((*data.labels)[static_cast<std::size_t>(rows[i])]);
    }
    return Dataset(std::move(pts), std::move(lbl));
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t row) {
    field = trim(field);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(row) + ": non-numeric field '" + std::string(field) + "'",
                         row);
    }
    if (!std::isfinite(value)) {
        throw ParseError("row " + std::to_string(row) + ": non-finite value", row);
    }
    return value;
}

int parse_label(std::string_view field, std::size_t row) {
    field = trim(field);
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("row " + std::to_string(row) + ": label '" + std::string(field) +
                             "' is not an integer",
                         row);
    }
    return value;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& opts) {
    std::vector<double> values;
    std::vector<int> labels;
    std::size_t width = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = sv.find(',', start);
            fields.push_back(sv.substr(start, comma == std::string_view::npos ? sv.npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            width = fields.size();
            if (opts.labeled && width < 2) {
                throw ParseError("row " + std::to_string(line_no) + ": labelled rows need >= 2 fields",
                                 line_no);
            }
        } else if (fields.size() != width) {
            throw ParseError("row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                 " fields, found " + std::to_string(fields.size()),
                             line_no);
        }
        std::size_t ncoord = opts.labeled ? width - 1 : width;
        for (std::size_t j = 0; j < ncoord; ++j) values.push_back(parse_double(fields[j], line_no));
        if (opts.labeled) labels.push_back(parse_label(fields.back(), line_no));
        ++rows;
    }
    if (rows == 0) throw ParseError("no data rows", 0);

    std::size_t d = opts.labeled ? width - 1 : width;
    PointMatrix pts(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
    std::copy(values.begin(), values.end(), pts.data());
    Dataset out(std::move(pts));
    if (opts.labeled) out.labels = std::move(labels);
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), opts);
}

std::string format_csv(const Dataset& data, const CsvOptions& opts) {
    std::ostringstream out;
    out.precision(opts.precision);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) {
            if (j) out << ',';
            out << data.points(i, j);
        }
        if (opts.labeled) {
            if (!data.labels) throw InvalidArgument("labelled CSV requested for an unlabelled dataset");
            out << ',' << (*data.labels)[static_cast<std::size_t>(i)];
        }
        out << '\n';
    }
    return out.str();
}

void save_csv(const Dataset& data, const std::filesystem::path& path, const CsvOptions& opts) {
    write_file_atomic(path, format_csv(data, opts));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << contents;
        if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into '" + path.string() + "'");
    }
}

}  // namespace spca
