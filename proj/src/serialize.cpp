#include "dafr/serialize.hpp"

#include "dafr/error.hpp"

#include <fstream>
#include <sstream>

namespace dafr {
namespace {

Json vector_json(const Vector& v) {
    Json arr = Json::array();
    for (auto x : v) arr.push_back(x);
    return arr;
}

Vector vector_from(const Json& arr) {
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr.at(i).get<double>();
    return v;
}

std::optional<double> optional_double(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

LinearModel model_field(const Json& j, const char* key, Eigen::Index width) {
    auto model = linear_model_from_json(j.at(key));
    if (model.width() != width)
        throw PipelineError("model_parse", std::string(key) + " model width differs from the scaler width");
    return model;
}

}  // namespace

Json to_json(const LinearModel& model) {
    Json j;
    j["intercept"] = model.intercept();
    j["coefficients"] = vector_json(model.coefficients());
    j["ridge_lambda"] = model.ridge_lambda();
    j["training_rows"] = model.training_rows();
    return j;
}

LinearModel linear_model_from_json(const Json& j) {
    return LinearModel(j.at("intercept").get<double>(), vector_from(j.at("coefficients")),
                       j.at("ridge_lambda").get<double>(), j.at("training_rows").get<Eigen::Index>());
}

Json to_json(const Scaler& scaler) {
    Json j;
    j["means"] = vector_json(scaler.means());
    j["stddevs"] = vector_json(scaler.stddevs());
    Json constant = Json::array();
    for (bool c : scaler.constant()) constant.push_back(c);
    j["constant"] = std::move(constant);
    return j;
}

Scaler scaler_from_json(const Json& j) {
    std::vector<bool> constant;
    for (const auto& c : j.at("constant")) constant.push_back(c.get<bool>());
    return Scaler(vector_from(j.at("means")), vector_from(j.at("stddevs")), std::move(constant));
}

Json to_json(const DecileProfile& profile) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < profile.n_bins(); ++i) {
        Json row;
        row["bin"] = i + 1;
        row["count"] = profile.bin_counts[i];
        row["y_low"] = profile.bin_edges[i];
        row["y_high"] = profile.bin_edges[i + 1];
        row["mape"] = profile.bin_mapes[i];
        arr.push_back(std::move(row));
    }
    return arr;
}

DecileProfile profile_from_json(const Json& j) {
    DecileProfile profile;
    for (const auto& row : j) {
        if (profile.bin_edges.empty()) profile.bin_edges.push_back(row.at("y_low").get<double>());
        profile.bin_counts.push_back(row.at("count").get<std::size_t>());
        profile.bin_edges.push_back(row.at("y_high").get<double>());
        profile.bin_mapes.push_back(row.at("mape").get<double>());
    }
    return profile;
}

Json to_json(const SegmentSpec& spec) {
    Json j;
    j["q_front"] = spec.q_front;
    j["q_back"] = spec.q_back;
    j["t_front"] = spec.t_front ? Json(*spec.t_front) : Json(nullptr);
    j["t_back"] = spec.t_back ? Json(*spec.t_back) : Json(nullptr);
    return j;
}

Json to_json(const KnnRouter& router) {
    Json j;
    j["k"] = router.k();
    Json labels = Json::array();
    for (auto label : router.labels()) labels.push_back(std::string(to_string(label)));
    j["labels"] = std::move(labels);
    Json points = Json::array();
    const auto& ref = router.reference_points();
    for (Eigen::Index i = 0; i < ref.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < ref.cols(); ++c) row.push_back(ref(i, c));
        points.push_back(std::move(row));
    }
    j["reference_points"] = std::move(points);
    j["scaler"] = to_json(router.scaler());
    return j;
}

Json to_json(const BathtubReport& report) {
    Json j;
    j["front_mean"] = report.front_mean;
    j["mid_mean"] = report.mid_mean;
    j["back_mean"] = report.back_mean;
    j["is_bathtub"] = report.is_bathtub;
    return j;
}

Json to_json(const MetricSet& metrics) {
    Json j;
    j["mape"] = metrics.mape;
    j["rmse"] = metrics.rmse;
    j["mad"] = metrics.mad;
    return j;
}

Json to_json(const DiagnoseReport& report) {
    Json j;
    j["rows"] = report.rows;
    j["overall"]["baseline"] = to_json(report.baseline);
    j["overall"]["dafr"] = to_json(report.dafr);
    j["weighted_bin_mape"]["baseline"] = report.baseline_profile.weighted_mape();
    j["weighted_bin_mape"]["dafr"] = report.dafr_profile.weighted_mape();
    j["profiles"]["baseline"] = to_json(report.baseline_profile);
    j["profiles"]["dafr"] = to_json(report.dafr_profile);
    if (report.baseline_bathtub && report.dafr_bathtub) {
        j["bathtub"]["baseline"] = to_json(*report.baseline_bathtub);
        j["bathtub"]["dafr"] = to_json(*report.dafr_bathtub);
    }
    j["confusion"]["labels"] = {"front", "mid", "back"};
    Json counts = Json::array();
    for (const auto& row : report.confusion) counts.push_back(Json(row));
    j["confusion"]["true_by_routed"] = std::move(counts);
    return j;
}

Json to_json(const SynthConfig& config) {
    Json j;
    j["generator"] = std::string(to_string(config.kind));
    j["n"] = config.n;
    j["p"] = config.p;
    j["noise_sigma"] = config.noise_sigma;
    j["seed"] = config.seed;
    Json pieces = Json::array();
    for (const auto& piece : config.pieces) {
        Json pj;
        pj["intercept"] = piece.intercept;
        pj["coefficients"] = vector_json(piece.coefficients);
        pieces.push_back(std::move(pj));
    }
    j["pieces"] = std::move(pieces);
    if (config.kind == GeneratorKind::PiecewiseThree) j["breakpoints"] = config.breakpoints;
    if (config.kind == GeneratorKind::HeteroTails) {
        j["tail_noise_factor"] = config.tail_noise_factor;
        j["tail_fraction"] = config.tail_fraction;
    }
    return j;
}

std::string serialize_model(const DafrModel& model) {
    Json j;
    j["version"] = kModelFormatVersion;
    j["feature_names"] = model.feature_names;
    j["target_name"] = model.target_name;
    j["spec"] = to_json(model.spec);
    j["scaler"] = to_json(model.scaler);
    j["baseline"] = to_json(as_linear(*model.baseline));
    j["front"] = to_json(as_linear(*model.front));
    j["mid"] = to_json(as_linear(*model.mid));
    j["back"] = to_json(as_linear(*model.back));
    j["router"] = to_json(*model.router);
    j["profiles"]["before"] = to_json(model.train_profile_before);
    j["profiles"]["after"] = to_json(model.train_profile_after);
    return j.dump(1) + "\n";
}

DafrModel parse_model(std::string_view text) {
    try {
        const Json j = Json::parse(text);
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw PipelineError("model_parse", "unsupported model version " + j.at("version").dump());
        DafrModel model;
        model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        model.target_name = j.at("target_name").get<std::string>();
        const auto& spec = j.at("spec");
        model.spec.q_front = spec.at("q_front").get<double>();
        model.spec.q_back = spec.at("q_back").get<double>();
        model.spec.t_front = optional_double(spec, "t_front");
        model.spec.t_back = optional_double(spec, "t_back");
        model.spec.validate();
        if (!model.spec.resolved()) throw PipelineError("model_parse", "segment thresholds missing");
        model.scaler = scaler_from_json(j.at("scaler"));
        const auto p = model.scaler.width();
        if (static_cast<Eigen::Index>(model.feature_names.size()) != p)
            throw PipelineError("model_parse", "feature name count differs from the scaler width");
        model.baseline = std::make_shared<const LinearModel>(model_field(j, "baseline", p));
        model.front = std::make_shared<const LinearModel>(model_field(j, "front", p));
        model.mid = std::make_shared<const LinearModel>(model_field(j, "mid", p));
        model.back = std::make_shared<const LinearModel>(model_field(j, "back", p));

        const auto& rj = j.at("router");
        const auto& points = rj.at("reference_points");
        RowMatrix ref(static_cast<Eigen::Index>(points.size()), p);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (static_cast<Eigen::Index>(points[i].size()) != p)
                throw PipelineError("model_parse", "router reference row " + std::to_string(i) + " has wrong width");
            for (Eigen::Index c = 0; c < p; ++c)
                ref(static_cast<Eigen::Index>(i), c) = points[i][static_cast<std::size_t>(c)].get<double>();
        }
        std::vector<SegmentLabel> labels;
        for (const auto& label : rj.at("labels")) labels.push_back(parse_segment_label(label.get<std::string>()));
        model.router = std::make_shared<const KnnRouter>(std::move(ref), std::move(labels), rj.at("k").get<int>(),
                                                         scaler_from_json(rj.at("scaler")));
        model.train_profile_before = profile_from_json(j.at("profiles").at("before"));
        model.train_profile_after = profile_from_json(j.at("profiles").at("after"));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError("model_parse", std::string("malformed model document: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == "model_parse") throw;
        throw PipelineError("model_parse", std::string("invalid model document: ") + e.what());
    }
}

void save_model(const DafrModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_failed", "cannot write '" + path.string() + "'");
    out << serialize_model(model);
}

DafrModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("file_not_found", "cannot open model '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace dafr
