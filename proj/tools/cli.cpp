#include "cli.hpp"

#include "dafr/error.hpp"
#include "dafr/pipeline.hpp"
#include "dafr/serialize.hpp"
#include "dafr/synth.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace dafr::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
    std::string data;
    std::string target;
    std::vector<std::string> features;
    std::string model;
    std::string out;
    double q_front = 0.3;
    double q_back = 0.7;
    int k = kDefaultNeighbors;
    double ridge = 0.0;
    std::optional<double> test_fraction;
    std::uint64_t seed = 0;
    std::size_t bins = kDefaultBins;
    std::optional<Eigen::Index> min_segment_rows;
    bool trace = false;

    std::string generator;
    Eigen::Index n = 2000;
    Eigen::Index p = 3;
    double sigma = 1.0;
    std::optional<double> tail_fraction;
    double tail_magnitude = kDefaultTailMagnitude;
    std::optional<double> mid_fraction;
    double mid_sigma = kDefaultMidSigma;

    int seeds = 20;
    std::vector<std::uint64_t> seed_list;
};

template <class T>
Json json_value(const T& v) {
    return Json(v);
}

template <class T>
Json json_value(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

/// Binds options to RunConfig fields and remembers them so the resolved
/// values can be written back out as the run's effective config.
class Recorder {
public:
    explicit Recorder(CLI::App* app) : app_(app) {}

    template <class T>
    CLI::Option* option(const std::string& name, T& var, const std::string& help) {
        fields_.emplace_back(name, [&var] { return json_value(var); });
        return app_->add_option("--" + name, var, help)->capture_default_str();
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
        fields_.emplace_back(name, [&var] { return Json(var); });
        return app_->add_flag("--" + name, var, help);
    }

    Json effective(const std::string& command) const {
        Json j;
        j["command"] = command;
        for (const auto& [name, get] : fields_) j[name] = get();
        return j;
    }

private:
    CLI::App* app_;
    std::vector<std::pair<std::string, std::function<Json()>>> fields_;
};

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
    auto p = base;
    p.replace_extension();
    return p.string() + suffix;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_failed", "cannot write '" + path.string() + "'");
    out << text;
}

void write_effective_config(const Recorder& rec, const std::string& command, const fs::path& out) {
    write_file(with_suffix(out, ".config.json"), rec.effective(command).dump(2) + "\n");
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string bathtub_line(const BathtubReport& r) {
    return std::string(r.is_bathtub ? "yes" : "no") + " (front " + fixed(r.front_mean, 2) + ", mid " +
           fixed(r.mid_mean, 2) + ", back " + fixed(r.back_mean, 2) + ")";
}

Dataset load_training(const RunConfig& c, bool take_test_part) {
    auto ds = load_csv(c.data, c.target, c.features);
    if (!c.test_fraction) return ds;
    auto split = train_test_split(ds, *c.test_fraction, c.seed);
    return take_test_part ? std::move(split.test) : std::move(split.train);
}

TrainOptions train_options(const RunConfig& c) {
    TrainOptions o;
    o.k = c.k;
    o.spec.q_front = c.q_front;
    o.spec.q_back = c.q_back;
    o.min_segment_rows = c.min_segment_rows;
    o.n_bins = c.bins;
    return o;
}

int cmd_train(const RunConfig& c, const Recorder& rec, std::ostream& out) {
    const auto train = load_training(c, false);
    const auto model = dafr_train(train, OlsFit(c.ridge), train_options(c));

    const fs::path model_path = c.out;
    save_model(model, model_path);
    const fs::path dir = model_path.parent_path();
    const std::string stem = fs::path(c.data).stem().string();
    write_file(dir / (stem + ".profile_before.csv"), profile_to_csv(model.train_profile_before));
    write_file(dir / (stem + ".profile_after.csv"), profile_to_csv(model.train_profile_after));

    const Vector before = model.baseline->predict(train.features);
    const Vector segmented = dafr_score_oracle(model, train.features, train.target).predictions;
    const Vector routed = dafr_score(model, train.features).predictions;
    const auto mb = compute_metrics(train.target, before);
    const auto ms = compute_metrics(train.target, segmented);
    const auto mr = compute_metrics(train.target, routed);
    const auto sizes = model.segment_sizes();

    std::ostringstream s;
    s << "trained on " << train.rows() << " rows, " << train.cols() << " features\n";
    s << "segments: front " << sizes[0] << ", mid " << sizes[1] << ", back " << sizes[2] << " (thresholds "
      << format_double(*model.spec.t_front) << ", " << format_double(*model.spec.t_back) << ")\n";
    s << "metric  baseline  segmented  routed\n";
    s << "MAPE    " << fixed(mb.mape) << "  " << fixed(ms.mape) << "  " << fixed(mr.mape) << "\n";
    s << "RMSE    " << fixed(mb.rmse) << "  " << fixed(ms.rmse) << "  " << fixed(mr.rmse) << "\n";
    s << "MAD     " << fixed(mb.mad) << "  " << fixed(ms.mad) << "  " << fixed(mr.mad) << "\n";
    if (c.bins == 10) {
        s << "bathtub before: " << bathtub_line(bathtub_report(model.train_profile_before)) << "\n";
        s << "bathtub after:  " << bathtub_line(bathtub_report(model.train_profile_after)) << "\n";
    }
    out << s.str();
    write_file(with_suffix(model_path, ".summary.txt"), s.str());
    write_effective_config(rec, "train", model_path);
    return kExitOk;
}

int cmd_score(const RunConfig& c, const Recorder& rec, std::ostream& out) {
    const auto model = load_model(c.model);
    const auto& names = c.features.empty() ? model.feature_names : c.features;
    const Matrix x = load_feature_matrix(c.data, names);
    const auto scored = dafr_score(model, x);

    std::ostringstream csv;
    csv << "row,segment,prediction" << (c.trace ? ",nn_distance" : "") << "\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const auto iu = static_cast<std::size_t>(i);
        csv << i << ',' << to_string(scored.segments[iu]) << ',' << format_double(scored.predictions(i));
        if (c.trace) csv << ',' << format_double(scored.nearest_distances[iu]);
        csv << '\n';
    }
    write_file(c.out, csv.str());
    write_effective_config(rec, "score", c.out);
    out << "scored " << x.rows() << " rows -> " << c.out << "\n";
    return kExitOk;
}

int cmd_diagnose(const RunConfig& c, const Recorder& rec, std::ostream& out) {
    const auto model = load_model(c.model);
    RunConfig eval_cfg = c;
    if (eval_cfg.target.empty()) eval_cfg.target = model.target_name;
    if (eval_cfg.features.empty()) eval_cfg.features = model.feature_names;
    const auto eval = load_training(eval_cfg, true);
    const auto report = diagnose(model, eval, c.bins);

    write_file(c.out, to_json(report).dump(2) + "\n");
    std::ostringstream csv;
    csv << "bin,baseline_mape,dafr_mape\n";
    for (std::size_t b = 0; b < report.baseline_profile.n_bins(); ++b)
        csv << (b + 1) << ',' << format_double(report.baseline_profile.bin_mapes[b]) << ','
            << format_double(report.dafr_profile.bin_mapes[b]) << '\n';
    write_file(with_suffix(c.out, ".profile.csv"), csv.str());
    write_effective_config(rec, "diagnose", c.out);

    out << "evaluated " << report.rows << " rows: baseline MAPE " << fixed(report.baseline.mape) << ", dafr MAPE "
        << fixed(report.dafr.mape) << "\n";
    if (report.baseline_bathtub)
        out << "bathtub baseline: " << bathtub_line(*report.baseline_bathtub)
            << "\nbathtub dafr:     " << bathtub_line(*report.dafr_bathtub) << "\n";
    return kExitOk;
}

SynthConfig synth_config(const RunConfig& c, std::uint64_t seed) {
    auto config = SynthConfig::defaults(parse_generator_kind(c.generator), c.p);
    config.n = c.n;
    config.noise_sigma = c.sigma;
    config.seed = seed;
    return config;
}

int cmd_synth(const RunConfig& c, const Recorder& rec, std::ostream& out) {
    const auto config = synth_config(c, c.seed);
    auto ds = generate(config);
    Json sidecar;
    sidecar["config"] = to_json(config);
    if (c.tail_fraction) {
        ds = inject_tail_outliers(ds, *c.tail_fraction, c.tail_magnitude, c.seed);
        sidecar["tail_outliers"] = {{"fraction", *c.tail_fraction}, {"magnitude", c.tail_magnitude}, {"seed", c.seed}};
    }
    if (c.mid_fraction) {
        ds = inject_mid_noise(ds, *c.mid_fraction, c.mid_sigma, c.seed);
        sidecar["mid_noise"] = {{"fraction", *c.mid_fraction}, {"sigma", c.mid_sigma}, {"seed", c.seed}};
    }
    write_csv(ds, c.out);
    write_file(with_suffix(c.out, ".json"), sidecar.dump(2) + "\n");
    write_effective_config(rec, "synth", c.out);
    out << "wrote " << ds.rows() << " rows -> " << c.out << "\n";
    return kExitOk;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string status;
    double baseline = 0.0;
    double dafr = 0.0;
    double oracle = 0.0;
};

SeedOutcome run_seed(const RunConfig& c, std::uint64_t seed) {
    SeedOutcome r;
    r.seed = seed;
    try {
        const Dataset ds = c.generator.empty() ? load_csv(c.data, c.target, c.features) : generate(synth_config(c, seed));
        const auto split = train_test_split(ds, c.test_fraction.value_or(0.2), seed);
        const auto model = dafr_train(split.train, OlsFit(c.ridge), train_options(c));
        const auto& test = split.test;
        r.baseline = mape(test.target, model.baseline->predict(test.features));
        r.dafr = mape(test.target, dafr_score(model, test.features).predictions);
        r.oracle = mape(test.target, dafr_score_oracle(model, test.features, test.target).predictions);
        r.ok = true;
        r.status = "ok";
    } catch (const Error& e) {
        r.status = "error:" + e.code();
        spdlog::warn("seed {} failed: {}", seed, e.what());
    }
    return r;
}

int cmd_compare(const RunConfig& c, const Recorder& rec, std::ostream& out) {
    if (c.generator.empty() && c.data.empty())
        throw DataError("usage", "compare needs --generator or --data/--target");
    if (!c.generator.empty()) parse_generator_kind(c.generator);
    std::vector<std::uint64_t> seeds = c.seed_list;
    if (seeds.empty())
        for (int s = 1; s <= c.seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));

    std::vector<std::future<SeedOutcome>> jobs;
    for (auto s : seeds) jobs.push_back(std::async(std::launch::async, run_seed, std::cref(c), s));

    std::ostringstream csv;
    csv << "seed,baseline_mape,dafr_mape,oracle_mape,win,status\n";
    double sb = 0.0, sd = 0.0, so = 0.0;
    int ok = 0, wins = 0;
    for (auto& job : jobs) {
        const auto r = job.get();
        if (r.ok) {
            const bool win = r.dafr < r.baseline;
            csv << r.seed << ',' << format_double(r.baseline) << ',' << format_double(r.dafr) << ','
                << format_double(r.oracle) << ',' << (win ? 1 : 0) << ",ok\n";
            sb += r.baseline;
            sd += r.dafr;
            so += r.oracle;
            ++ok;
            wins += win ? 1 : 0;
        } else {
            csv << r.seed << ",,,,," << r.status << '\n';
        }
    }
    if (ok > 0) {
        csv << "mean," << format_double(sb / ok) << ',' << format_double(sd / ok) << ',' << format_double(so / ok)
            << ',' << wins << '/' << ok << ",aggregate\n";
    }
    write_file(c.out, csv.str());
    write_effective_config(rec, "compare", c.out);
    if (ok == 0) throw PipelineError("all_seeds_failed", "every seed failed; see warnings above");
    out << ok << "/" << seeds.size() << " seeds succeeded; mean baseline MAPE " << fixed(sb / ok) << ", mean dafr MAPE "
        << fixed(sd / ok) << ", wins " << wins << "\n";
    return kExitOk;
}

// Expands `--config file.json` into explicit arguments for every recorded key
// not already present on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> result;
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            result.push_back(args[i]);
        }
    }
    if (!config_path) return result;

    std::ifstream in(*config_path);
    if (!in) throw DataError("file_not_found", "cannot open config '" + *config_path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("config_parse", std::string("malformed config: ") + e.what());
    }
    if (result.empty() || result.front() != j.value("command", std::string()))
        throw DataError("usage", "config file is for command '" + j.value("command", std::string()) + "'");

    auto present = [&](const std::string& flag) {
        for (const auto& a : result)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string flag = "--" + it.key();
        if (it.key() == "command" || it->is_null() || present(flag)) continue;
        if (it->is_string() && it->get<std::string>().empty()) continue;
        const auto& v = *it;
        if (v.is_boolean()) {
            if (v.get<bool>()) result.push_back(flag);
        } else if (v.is_array()) {
            if (v.empty()) continue;
            std::string joined;
            for (const auto& e : v) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
            result.push_back(flag);
            result.push_back(joined);
        } else {
            result.push_back(flag);
            result.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    }
    return result;
}

void configure_logging() {
    auto logger = spdlog::get("dafr");
    if (!logger) {
        logger = spdlog::stderr_color_mt("dafr");
        spdlog::set_default_logger(logger);
    }
    const char* level = std::getenv("DAFR_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    configure_logging();

    RunConfig c;
    CLI::App app{"Distribution-assertive segmented regression"};
    app.name("dafr");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    auto* train = app.add_subcommand("train", "Fit baseline, segment models and router");
    auto* score = app.add_subcommand("score", "Route and score a feature CSV");
    auto* diag = app.add_subcommand("diagnose", "Decile profiles of baseline vs segmented model");
    auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
    auto* compare = app.add_subcommand("compare", "Baseline vs segmented held-out MAPE over seeds");

    Recorder rt(train), rs(score), rd(diag), ry(synth), rc(compare);
    for (auto* sub : {train, score, diag, synth, compare})
        sub->add_option("--config", "Effective-config JSON from a previous run");

    rt.option("data", c.data, "Training CSV")->required();
    rt.option("target", c.target, "Target column")->required();
    rt.option("features", c.features, "Feature columns (default: all numeric)")->delimiter(',');
    rt.option("q-front", c.q_front, "Front segment quantile");
    rt.option("q-back", c.q_back, "Back segment quantile");
    rt.option("k", c.k, "Router neighbours");
    rt.option("ridge", c.ridge, "Ridge penalty");
    rt.option("bins", c.bins, "Profile bins");
    rt.option("test-fraction", c.test_fraction, "Hold out this fraction before training");
    rt.option("seed", c.seed, "Split seed");
    rt.option("min-segment-rows", c.min_segment_rows, "Minimum rows per segment (default p+2)");
    rt.option("out", c.out, "Model JSON path")->required();

    rs.option("model", c.model, "Model JSON")->required();
    rs.option("data", c.data, "Feature CSV")->required();
    rs.option("features", c.features, "Override feature columns")->delimiter(',');
    rs.flag("trace", c.trace, "Add nearest-neighbour distance column");
    rs.option("out", c.out, "Predictions CSV path")->required();

    rd.option("model", c.model, "Model JSON")->required();
    rd.option("data", c.data, "Evaluation CSV")->required();
    rd.option("target", c.target, "Target column (default: model's)");
    rd.option("bins", c.bins, "Profile bins");
    rd.option("test-fraction", c.test_fraction, "Evaluate only the held-out split");
    rd.option("seed", c.seed, "Split seed");
    rd.option("out", c.out, "Report JSON path")->required();

    ry.option("generator", c.generator, "single_line | piecewise_three | hetero_tails")->required();
    ry.option("n", c.n, "Rows");
    ry.option("p", c.p, "Features");
    ry.option("sigma", c.sigma, "Noise standard deviation");
    ry.option("seed", c.seed, "Generator seed");
    ry.option("tail-fraction", c.tail_fraction, "Inject tail outliers into this fraction of rows");
    ry.option("tail-magnitude", c.tail_magnitude, "Tail outlier shift in target stddevs");
    ry.option("mid-fraction", c.mid_fraction, "Inject mid-decile noise into this fraction of rows");
    ry.option("mid-sigma", c.mid_sigma, "Mid noise stddev in target stddevs");
    ry.option("out", c.out, "CSV path")->required();

    rc.option("generator", c.generator, "Synthetic generator (or use --data)");
    rc.option("data", c.data, "CSV data instead of a generator");
    rc.option("target", c.target, "Target column for --data");
    rc.option("features", c.features, "Feature columns for --data")->delimiter(',');
    rc.option("n", c.n, "Rows per synthetic dataset");
    rc.option("p", c.p, "Synthetic features");
    rc.option("sigma", c.sigma, "Synthetic noise");
    rc.option("seeds", c.seeds, "Run seeds 1..N");
    rc.option("seed-list", c.seed_list, "Explicit seeds")->delimiter(',');
    rc.option("test-fraction", c.test_fraction, "Held-out fraction (default 0.2)");
    rc.option("q-front", c.q_front, "Front segment quantile");
    rc.option("q-back", c.q_back, "Back segment quantile");
    rc.option("k", c.k, "Router neighbours");
    rc.option("ridge", c.ridge, "Ridge penalty");
    rc.option("bins", c.bins, "Profile bins");
    rc.option("out", c.out, "Summary CSV path")->required();

    try {
        auto args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error[usage]: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error[" << e.code() << "]: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(c, rt, out);
        if (score->parsed()) return cmd_score(c, rs, out);
        if (diag->parsed()) return cmd_diagnose(c, rd, out);
        if (synth->parsed()) return cmd_synth(c, ry, out);
        return cmd_compare(c, rc, out);
    } catch (const DataError& e) {
        err << "error[" << e.code() << "]: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error[" << e.code() << "]: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const std::exception& e) {
        err << "error[runtime]: " << e.what() << "\n";
        return kExitPipeline;
    }
}

}  // namespace dafr::cli
