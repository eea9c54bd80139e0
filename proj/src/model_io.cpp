#include "spca/model_io.hpp"

#include "spca/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace spca {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_vec(const json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// q may be infinite, which JSON cannot hold.
json q_json(double q) { return std::isinf(q) ? json("inf") : json(q); }

double json_q(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ParseError("model: q must be a number or \"inf\"", 0);
    }
    return j.get<double>();
}

}  // namespace

std::string model_to_json(const SpcaModel& m) {
    const Eigen::Index d = m.dim();
    const PcParams& pc = m.pc_params();
    json doc;
    doc["format"] = kModelFormat;
    doc["version"] = kModelVersion;
    doc["gamma"] = m.metric.gamma;
    doc["density_k"] = m.metric.density_k;
    doc["rate_bits"] = m.rate_bits;
    doc["origin_mode"] = to_string(m.origin_mode);
    doc["pc_params"] = {{"k_frac", pc.k_frac},       {"tau", pc.tau},
                        {"q", q_json(pc.q)},         {"d_out", pc.d_out},
                        {"cross_tol", pc.cross_tol}, {"max_vertices", pc.max_vertices}};
    doc["origin"] = vec_json(m.origin);
    json basis = json::array();
    for (Eigen::Index j = 0; j < d; ++j) basis.push_back(vec_json(m.origin_basis.col(j)));
    doc["origin_basis_columns"] = basis;
    doc["dim_order"] = m.dim_order;
    doc["scaling"] = vec_json(m.scaling);
    doc["entropy"] = vec_json(m.entropy);
    json pts = json::array();
    const Dataset& t = *m.training;
    for (Eigen::Index i = 0; i < t.size(); ++i) pts.push_back(vec_json(t.point(i)));
    doc["training"] = {{"dim", d}, {"points", pts}};
    if (t.labels) doc["training"]["labels"] = *t.labels;
    return doc.dump(1) + "\n";
}

SpcaModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: invalid JSON: ") + e.what(), 0);
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw ParseError("model: unknown format", 0);
        if (doc.at("version").get<int>() != kModelVersion) throw ParseError("model: unsupported version", 0);

        const auto d = doc.at("training").at("dim").get<Eigen::Index>();
        const auto& rows = doc.at("training").at("points");
        PointMatrix pts(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Vector v = json_vec(rows[i]);
            if (v.size() != d) throw ParseError("model: training point of wrong dimension", i + 1);
            pts.row(static_cast<Eigen::Index>(i)) = v.transpose();
        }
        std::optional<std::vector<int>> labels;
        if (doc["training"].contains("labels")) labels = doc["training"]["labels"].get<std::vector<int>>();
        auto data = std::make_shared<const Dataset>(std::move(pts), std::move(labels));

        const auto& jp = doc.at("pc_params");
        PcParams pc;
        pc.k_frac = jp.at("k_frac").get<double>();
        pc.tau = jp.at("tau").get<double>();
        pc.q = json_q(jp.at("q"));
        pc.d_out = jp.at("d_out").get<double>();
        pc.cross_tol = jp.at("cross_tol").get<double>();
        pc.max_vertices = jp.at("max_vertices").get<Eigen::Index>();

        MetricConfig metric;
        metric.gamma = doc.at("gamma").get<double>();
        metric.density_k = doc.at("density_k").get<Eigen::Index>();

        Matrix basis(d, d);
        const auto& cols = doc.at("origin_basis_columns");
        if (static_cast<Eigen::Index>(cols.size()) != d) throw ParseError("model: basis must have d columns", 0);
        for (Eigen::Index j = 0; j < d; ++j) basis.col(j) = json_vec(cols[static_cast<std::size_t>(j)]);

        return assemble_model(data, pc, metric, parse_origin_mode(doc.at("origin_mode").get<std::string>()),
                              doc.at("rate_bits").get<double>(), json_vec(doc.at("origin")), basis,
                              doc.at("dim_order").get<std::vector<Eigen::Index>>(), json_vec(doc.at("scaling")),
                              json_vec(doc.at("entropy")));
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what(), 0);
    }
}

void save_model(const SpcaModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model));
}

SpcaModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace spca
