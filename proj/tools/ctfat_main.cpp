// ctfat — CT fat segmentation and visceral/subcutaneous ratio toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 data/algorithm error.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ctfat/bench.hpp"
#include "ctfat/fatseg.hpp"
#include "ctfat/metrics.hpp"
#include "ctfat/phantom.hpp"
#include "ctfat/scoring.hpp"
#include "ctfat/volume.hpp"

using nlohmann::json;

namespace {

// Flag-level problems detected after CLI11 parsing; mapped to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- shared flag bundles -------------------------------------------------

struct ThresholdFlags {
    int hu_min = -150;
    int hu_max = 0;
    bool no_opening = false;
};

struct SweepFlags {
    double granular = 0.05;
    std::string center;
    std::string ray_length = "diagonal";
    bool faithful_degrees = false;
};

void add_threshold_flags(CLI::App* cmd, ThresholdFlags& f) {
    cmd->add_option("--hu-min", f.hu_min, "Fat window lower bound in HU (inclusive)")
        ->capture_default_str();
    cmd->add_option("--hu-max", f.hu_max, "Fat window upper bound in HU (inclusive)")
        ->capture_default_str();
    cmd->add_flag("--no-opening", f.no_opening,
                  "Skip the morphological opening (erosion + dilation)");
}

void add_sweep_flags(CLI::App* cmd, SweepFlags& f) {
    cmd->add_option("--granular-degree", f.granular,
                    "Angular step of the radial sweep, degrees")
        ->capture_default_str();
    cmd->add_option("--center", f.center,
                    "Sweep center as x,y (default: image center)");
    cmd->add_option("--ray-length", f.ray_length,
                    "Ray extent: 'diagonal' (image diagonal) or 'half' (half the image extent)")
        ->check(CLI::IsMember({"diagonal", "half"}))
        ->capture_default_str();
    cmd->add_flag("--faithful-degrees", f.faithful_degrees,
                  "Weight sectors by the step in degrees instead of radians");
}

ctfat::ThresholdConfig to_threshold(const ThresholdFlags& f) {
    if (f.hu_min > f.hu_max) throw UsageError("--hu-min exceeds --hu-max");
    return {f.hu_min, f.hu_max};
}

ctfat::MorphologyConfig to_morphology(const ThresholdFlags& f) {
    if (f.no_opening) return {0, 0};
    return {};
}

ctfat::SweepConfig to_sweep(const SweepFlags& f) {
    ctfat::SweepConfig cfg;
    if (!(f.granular > 0.0) || f.granular > 90.0)
        throw UsageError("--granular-degree must lie in (0, 90]");
    cfg.granular_degree = f.granular;
    if (!f.center.empty()) {
        int x = 0, y = 0;
        const auto comma = f.center.find(',');
        auto parse = [&](std::string_view s, int& out) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
            return ec == std::errc{} && p == s.data() + s.size();
        };
        if (comma == std::string::npos ||
            !parse(std::string_view(f.center).substr(0, comma), x) ||
            !parse(std::string_view(f.center).substr(comma + 1), y))
            throw UsageError("--center expects x,y integers");
        cfg.center = ctfat::PixelPoint{x, y};
    }
    cfg.ray_length = f.ray_length == "half" ? ctfat::RayLengthMode::HalfExtent
                                            : ctfat::RayLengthMode::ImageDiagonal;
    cfg.faithful_degrees = f.faithful_degrees;
    return cfg;
}

ctfat::SliceSelector to_selector(const std::string& text) {
    try {
        return ctfat::SliceSelector::parse(text);
    } catch (const ctfat::Error& e) {
        throw UsageError(e.what());
    }
}

// Parses "a,b,c" into exactly `n` doubles.
std::vector<double> parse_csv_doubles(const std::string& text, std::size_t n,
                                      const char* flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string_view tok(text.data() + pos, comma - pos);
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc{} || p != tok.data() + tok.size())
            throw UsageError(std::string(flag) + ": bad number '" + std::string(tok) + "'");
        out.push_back(v);
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (out.size() != n)
        throw UsageError(std::string(flag) + " expects " + std::to_string(n) +
                         " comma-separated values");
    return out;
}

int checked_threads(int n) {
    if (n < 1) throw UsageError("--parallel must be >= 1");
    return n;
}

// ---- output helpers --------------------------------------------------------

void emit(const json& doc, const std::string& format) {
    if (format == "json") {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    // text: flat "key: value" lines in the JSON's (sorted) key order
    for (const auto& [key, value] : doc.items()) {
        if (value.is_structured())
            std::cout << key << ": " << value.dump() << "\n";
        else if (value.is_string())
            std::cout << key << ": " << value.get<std::string>() << "\n";
        else
            std::cout << key << ": " << value.dump() << "\n";
    }
}

json to_json(const ctfat::FatMeasurement& m) {
    return json{{"total_fat_px", m.total_fat},
                {"subcut_area_px2", m.subcut},
                {"visceral_area_px2", m.visceral},
                {"ratio", m.ratio},
                {"label", ctfat::to_string(m.label)},
                {"physical_total_mm3", m.physical_total_mm3}};
}

json to_json(const ctfat::ClassificationMetrics& m) {
    auto opt = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    return json{{"accuracy", opt(m.accuracy)},
                {"precision", opt(m.precision)},
                {"recall", opt(m.recall)},
                {"specificity", opt(m.specificity)},
                {"false_discovery_rate", opt(m.false_discovery_rate)},
                {"negative_predictive_value", opt(m.negative_predictive_value)},
                {"f1", opt(m.f1)},
                {"balanced_accuracy", opt(m.balanced_accuracy)},
                {"mcc", opt(m.mcc)}};
}

json to_json(const ctfat::StageStats& s) {
    return json{{"mean_s", s.mean_s}, {"std_s", s.std_s}};
}

json truth_to_json(const ctfat::PhantomTruth& t, int n_slices) {
    return json{{"analytic", {{"subcut_px2", t.analytic_subcut},
                              {"visceral_px2", t.analytic_visceral},
                              {"total_px2", t.analytic_total},
                              {"ratio", t.true_ratio}}},
                {"raster_per_slice", {{"subcut_px", t.raster_subcut_px},
                                      {"visceral_px", t.raster_visceral_px},
                                      {"total_px", t.raster_total_px},
                                      {"ratio", t.raster_ratio}}},
                {"n_slices", n_slices}};
}

std::vector<std::string> read_label_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ctfat::IoError("cannot read " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        std::size_t start = line.find_first_not_of(' ');
        if (start == std::string::npos) continue;
        out.push_back(line.substr(start));
    }
    return out;
}

std::vector<double> read_prob_lines(const std::filesystem::path& path) {
    std::vector<double> probs;
    for (const std::string& token : read_label_lines(path)) {
        double v = 0.0;
        auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || p != token.data() + token.size())
            throw ctfat::Error("bad probability line in " + path.string() + ": '" +
                               token + "'");
        probs.push_back(v);
    }
    return probs;
}

void write_trace_csv(const std::filesystem::path& path, const ctfat::SweepTrace& trace) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ctfat::IoError("cannot write " + path.string());
    out << "theta_deg,inner_x,inner_y,outer_x,outer_y,contribution\n";
    char buf[160];
    for (const ctfat::RayRecord& r : trace.rays) {
        auto point = [](const std::optional<ctfat::PixelPoint>& p, char* dst, std::size_t cap) {
            if (p) std::snprintf(dst, cap, "%d,%d", p->x, p->y);
            else std::snprintf(dst, cap, ",");
        };
        char inner[32], outer[32];
        point(r.hit.inner, inner, sizeof(inner));
        point(r.hit.outer, outer, sizeof(outer));
        std::snprintf(buf, sizeof(buf), "%.10g,%s,%s,%.17g\n", r.theta_deg, inner,
                      outer, r.contribution);
        out << buf;
    }
    if (!out.flush()) throw ctfat::IoError("write failed: " + path.string());
}

// ---- subcommands -----------------------------------------------------------

int cmd_mask(const std::string& input, const std::string& output,
             const ThresholdFlags& tf, const std::string& format) {
    const ctfat::ThresholdConfig thr = to_threshold(tf); // flag checks before I/O
    const ctfat::MorphologyConfig morph = to_morphology(tf);
    const ctfat::HuVolume vol = ctfat::load_volume(input);
    const ctfat::BinaryMask mask =
        ctfat::open_mask(ctfat::threshold_fat(vol, thr), morph);
    ctfat::save_mask(mask, output);

    std::uint64_t fg = 0;
    for (std::uint8_t v : mask.data) fg += v == ctfat::BinaryMask::kForeground;
    emit(json{{"output", output},
              {"foreground_px", fg},
              {"shape", {mask.shape.nx, mask.shape.ny, mask.shape.nz}}},
         format);
    return 0;
}

int cmd_segment(const std::string& input, const std::string& output,
                const std::string& slices, const ThresholdFlags& tf,
                const SweepFlags& sf, const std::string& trace_csv, int parallel,
                const std::string& format) {
    const auto sel = to_selector(slices);
    const auto sweep = to_sweep(sf);
    const int threads = checked_threads(parallel);
    const ctfat::ThresholdConfig thr = to_threshold(tf);
    const ctfat::MorphologyConfig morph = to_morphology(tf);

    const ctfat::HuVolume vol = ctfat::load_volume(input);
    auto [z0, z1] = sel.resolve(vol.shape.nz);
    if (!trace_csv.empty() && z0 != z1)
        throw UsageError("--trace-csv requires a single-slice selection");

    const ctfat::HuVolume selected = ctfat::extract_slices(vol, sel);
    const ctfat::BinaryMask opened =
        ctfat::open_mask(ctfat::threshold_fat(selected, thr), morph);

    json per_slice = json::array();
    double subcut_total = 0.0;
    for (int z = 0; z < opened.shape.nz; ++z) {
        const ctfat::SweepResult swept =
            ctfat::compute_subcut_area(opened.slice(z), sweep, threads);
        subcut_total += swept.area;
        per_slice.push_back(json{{"z", z0 + z},
                                 {"subcut_area_px2", swept.area},
                                 {"total_fat_px", ctfat::total_fat_area(opened.slice(z))}});
        if (!trace_csv.empty()) write_trace_csv(trace_csv, swept.trace);
    }

    const ctfat::BinaryMask band = ctfat::subcut_mask(opened, sweep, threads);
    ctfat::save_mask(band, output);

    emit(json{{"output", output},
              {"slices", per_slice},
              {"subcut_total_px2", subcut_total}},
         format);
    return 0;
}

int cmd_ratio(const std::string& input, const std::string& slices, bool mask_input,
              const ThresholdFlags& tf, const SweepFlags& sf, int parallel,
              const std::string& format) {
    const auto sel = to_selector(slices);
    const auto sweep = to_sweep(sf);
    const int threads = checked_threads(parallel);
    const ctfat::ThresholdConfig thr = to_threshold(tf);
    const ctfat::MorphologyConfig morph = to_morphology(tf);

    ctfat::RatioOutcome outcome;
    if (mask_input) {
        const ctfat::BinaryMask mask = ctfat::load_mask(input);
        outcome = ctfat::measure_mask(mask, sel, sweep, threads);
    } else {
        const ctfat::HuVolume vol = ctfat::load_volume(input);
        outcome = ctfat::fat_ratio_3d(vol, sel, thr, morph, sweep, threads);
    }

    json doc = to_json(outcome.measurement);
    doc["skipped_slices"] = outcome.skipped_slices;
    emit(doc, format);
    return 0;
}

int cmd_score(bool has_ratio, double ratio_flag, const std::string& input,
              const std::string& slices, const ThresholdFlags& tf, const SweepFlags& sf,
              int parallel, const std::string& ptb_csv, bool strict_top3, double coef_a,
              double coef_b, const std::string& format) {
    if (!has_ratio && input.empty())
        throw UsageError("provide either --ratio or an input volume");
    if (has_ratio && !input.empty())
        throw UsageError("--ratio and an input volume are mutually exclusive");

    double ratio = 0.0;
    std::optional<json> measurement;
    if (has_ratio) {
        ratio = ratio_flag;
    } else {
        const auto sel = to_selector(slices);
        const ctfat::HuVolume vol = ctfat::load_volume(input);
        const ctfat::RatioOutcome outcome =
            ctfat::fat_ratio_3d(vol, sel, to_threshold(tf), to_morphology(tf),
                                to_sweep(sf), checked_threads(parallel));
        ratio = outcome.measurement.ratio;
        measurement = to_json(outcome.measurement);
    }

    // Missing or empty probability series maps to p = 0 here; the series is
    // aggregated only when it has entries.
    double p_ptb = 0.0;
    std::size_t n_probs = 0;
    if (!ptb_csv.empty()) {
        const std::vector<double> probs = read_prob_lines(ptb_csv);
        n_probs = probs.size();
        if (!probs.empty() || strict_top3)
            p_ptb = ctfat::aggregate_ptb(probs, strict_top3);
    }

    ctfat::ScoringParams params;
    params.a = coef_a;
    params.b = coef_b;
    const ctfat::DiagnosisResult r = ctfat::compute_scores(ratio, p_ptb, params);

    json doc{{"fat_ratio", ratio},
             {"p_ptb", r.p_ptb},
             {"n_probabilities", n_probs},
             {"score_crohn", r.score_crohn},
             {"score_tb", r.score_tb},
             {"ptb_positive", r.ptb_positive},
             {"label", ctfat::to_string(r.label)}};
    if (measurement) doc["measurement"] = *measurement;
    emit(doc, format);
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& format) {
    const ctfat::BinaryMask a = ctfat::load_mask(path_a);
    const ctfat::BinaryMask b = ctfat::load_mask(path_b);
    const ctfat::OverlapReport r = ctfat::overlap(a, b);
    emit(json{{"dice", r.dice},
              {"jaccard", r.jaccard},
              {"intersection_px", r.intersection},
              {"size_a_px", r.size_a},
              {"size_b_px", r.size_b},
              {"union_px", r.set_union},
              {"both_empty", r.both_empty}},
         format);
    return 0;
}

int cmd_metrics(const std::string& pred_path, const std::string& truth_path,
                const std::string& positive, const std::string& format) {
    const auto pred = read_label_lines(pred_path);
    const auto truth = read_label_lines(truth_path);
    const ctfat::ConfusionCounts counts =
        ctfat::batch_classify_eval(pred, truth, positive);
    json doc = to_json(ctfat::classification_metrics(counts));
    doc["counts"] =
        json{{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}};
    emit(doc, format);
    return 0;
}

struct PhantomFlags {
    std::string output;
    std::string truth_json;
    std::string fat_mask;
    std::string size = "512,512";
    int num_slices = 1;
    std::string ring = "50,100";
    std::string body;
    std::vector<std::string> blobs;
    double target_ratio = -1.0; // < 0: not requested
    bool target_set = false;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    int artifact_lines = 0;
    std::string spacing = "1,1,1";
    int fat_hu = -100, muscle_hu = 40, skin_hu = 20, air_hu = -1000;
    std::string format = "json";
};

int cmd_phantom(const PhantomFlags& f) {
    ctfat::PhantomSpec spec;
    const auto size = parse_csv_doubles(f.size, 2, "--size");
    spec.width = static_cast<int>(size[0]);
    spec.height = static_cast<int>(size[1]);
    spec.n_slices = f.num_slices;
    const auto ring = parse_csv_doubles(f.ring, 2, "--ring");
    spec.ring_inner = {ring[0], ring[0]};
    spec.ring_outer = {ring[1], ring[1]};
    if (!f.body.empty()) {
        const auto body = parse_csv_doubles(f.body, 2, "--body");
        spec.body = ctfat::EllipseSpec{body[0], body[1]};
    }
    const auto spacing = parse_csv_doubles(f.spacing, 3, "--spacing");
    spec.spacing = {spacing[0], spacing[1], spacing[2]};
    for (const std::string& blob_text : f.blobs) {
        const auto blob = parse_csv_doubles(blob_text, 3, "--blob");
        spec.blobs.push_back({blob[0], blob[1], blob[2]});
    }
    spec.noise_sigma = f.noise_sigma;
    spec.seed = f.seed;
    auto clamp_hu = [](int v, const char* flag) {
        if (v < -32768 || v > 32767)
            throw UsageError(std::string(flag) + " outside signed 16-bit range");
        return static_cast<std::int16_t>(v);
    };
    spec.fat_hu = clamp_hu(f.fat_hu, "--fat-hu");
    spec.muscle_hu = clamp_hu(f.muscle_hu, "--muscle-hu");
    spec.skin_hu = clamp_hu(f.skin_hu, "--skin-hu");
    spec.air_hu = clamp_hu(f.air_hu, "--air-hu");

    if (f.target_set && !f.blobs.empty())
        throw UsageError("--target-ratio and --blob are mutually exclusive");
    if (f.target_set && f.artifact_lines > 0)
        throw UsageError("--target-ratio and --artifact-lines are mutually exclusive");

    ctfat::PhantomResult result;
    if (f.target_set) {
        result = ctfat::near_threshold_phantom(f.target_ratio, spec);
    } else {
        if (f.artifact_lines > 0)
            spec.artifact_lines = ctfat::default_artifact_lines(spec, f.artifact_lines);
        result = ctfat::generate_phantom(spec);
    }

    ctfat::save_volume(result.volume, f.output);
    const json truth = truth_to_json(result.truth, result.volume.shape.nz);
    const std::string truth_path =
        f.truth_json.empty() ? f.output + ".truth.json" : f.truth_json;
    {
        std::ofstream out(truth_path, std::ios::trunc);
        if (!out) throw ctfat::IoError("cannot write " + truth_path);
        out << truth.dump(2) << "\n";
    }
    if (!f.fat_mask.empty())
        ctfat::save_mask(ctfat::phantom_fat_mask(result.spec), f.fat_mask);

    json doc = truth;
    doc["output"] = f.output;
    doc["truth_json"] = truth_path;
    doc["blobs"] = static_cast<int>(result.spec.blobs.size());
    emit(doc, f.format);
    return 0;
}

int cmd_bench(const std::string& input, const std::string& slices,
              const ThresholdFlags& tf, const SweepFlags& sf, int repetitions,
              int parallel, const std::string& format) {
    if (repetitions < 3) throw UsageError("--repetitions must be >= 3");
    const ctfat::BenchReport r =
        ctfat::run_bench(input, to_selector(slices), to_threshold(tf),
                         to_morphology(tf), to_sweep(sf), repetitions,
                         checked_threads(parallel));
    emit(json{{"voxels", r.voxels},
              {"repetitions", r.repetitions},
              {"threads", r.threads},
              {"stages", {{"load", to_json(r.load)},
                          {"threshold", to_json(r.threshold)},
                          {"morphology", to_json(r.morphology)},
                          {"sweep", to_json(r.sweep)},
                          {"total", to_json(r.total)}}}},
         format);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CT visceral/subcutaneous fat ratio toolkit"};
    app.require_subcommand(1);

    std::function<int()> run;

    // mask
    {
        auto* cmd = app.add_subcommand("mask", "Threshold a volume into a fat mask");
        auto input = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto tf = std::make_shared<ThresholdFlags>();
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("-i,--input", *input, "Input volume (.nii/.nii.gz)")->required();
        cmd->add_option("-o,--output", *output, "Output mask path")->required();
        add_threshold_flags(cmd, *tf);
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, input, output, tf, format] {
            run = [=] { return cmd_mask(*input, *output, *tf, *format); };
        });
    }

    // segment
    {
        auto* cmd = app.add_subcommand("segment",
                                       "Extract the subcutaneous band of a volume");
        auto input = std::make_shared<std::string>();
        auto output = std::make_shared<std::string>();
        auto slices = std::make_shared<std::string>("all");
        auto tf = std::make_shared<ThresholdFlags>();
        auto sf = std::make_shared<SweepFlags>();
        auto trace = std::make_shared<std::string>();
        auto parallel = std::make_shared<int>(1);
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("-i,--input", *input, "Input volume")->required();
        cmd->add_option("-o,--output", *output, "Output subcutaneous mask")->required();
        cmd->add_option("--slices", *slices, "Slice selection: z, z0:z1, or all")
            ->capture_default_str();
        add_threshold_flags(cmd, *tf);
        add_sweep_flags(cmd, *sf);
        cmd->add_option("--trace-csv", *trace,
                        "Write the per-ray sweep trace (single slice only)");
        cmd->add_option("--parallel", *parallel, "Worker threads")->capture_default_str();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, input, output, slices, tf, sf, trace, parallel, format] {
            run = [=] {
                return cmd_segment(*input, *output, *slices, *tf, *sf, *trace,
                                   *parallel, *format);
            };
        });
    }

    // ratio
    {
        auto* cmd = app.add_subcommand("ratio",
                                       "Visceral-to-subcutaneous fat ratio of a volume");
        auto input = std::make_shared<std::string>();
        auto slices = std::make_shared<std::string>("all");
        auto mask_input = std::make_shared<bool>(false);
        auto tf = std::make_shared<ThresholdFlags>();
        auto sf = std::make_shared<SweepFlags>();
        auto parallel = std::make_shared<int>(1);
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("-i,--input", *input, "Input volume (or mask with --mask-input)")
            ->required();
        cmd->add_option("--slices", *slices, "Slice selection: z, z0:z1, or all")
            ->capture_default_str();
        cmd->add_flag("--mask-input", *mask_input,
                      "Treat the input as a binary fat mask (skip threshold/opening)");
        add_threshold_flags(cmd, *tf);
        add_sweep_flags(cmd, *sf);
        cmd->add_option("--parallel", *parallel, "Worker threads")->capture_default_str();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, input, slices, mask_input, tf, sf, parallel, format] {
            run = [=] {
                return cmd_ratio(*input, *slices, *mask_input, *tf, *sf, *parallel,
                                 *format);
            };
        });
    }

    // score
    {
        auto* cmd = app.add_subcommand("score", "Combined diagnosis scores");
        auto ratio = std::make_shared<double>(0.0);
        auto input = std::make_shared<std::string>();
        auto slices = std::make_shared<std::string>("all");
        auto tf = std::make_shared<ThresholdFlags>();
        auto sf = std::make_shared<SweepFlags>();
        auto parallel = std::make_shared<int>(1);
        auto ptb = std::make_shared<std::string>();
        auto strict = std::make_shared<bool>(false);
        auto coef_a = std::make_shared<double>(1.0);
        auto coef_b = std::make_shared<double>(1.0);
        auto format = std::make_shared<std::string>("json");
        auto* ratio_opt = cmd->add_option("--ratio", *ratio, "Use this precomputed fat ratio");
        cmd->add_option("-i,--input", *input, "Compute the ratio from this volume");
        cmd->add_option("--slices", *slices, "Slice selection: z, z0:z1, or all")
            ->capture_default_str();
        add_threshold_flags(cmd, *tf);
        add_sweep_flags(cmd, *sf);
        cmd->add_option("--parallel", *parallel, "Worker threads")->capture_default_str();
        cmd->add_option("--ptb-csv", *ptb, "PTB probabilities, one per line");
        cmd->add_flag("--strict-top3", *strict,
                      "Require at least three probabilities");
        cmd->add_option("--coef-a", *coef_a, "Ratio-margin weight in the TB score")
            ->capture_default_str();
        cmd->add_option("--coef-b", *coef_b, "Probability weight in the TB score")
            ->capture_default_str();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, ratio, input, slices, tf, sf, parallel, ptb, strict,
                       coef_a, coef_b, format, ratio_opt] {
            const bool has_ratio = ratio_opt->count() > 0;
            run = [=] {
                return cmd_score(has_ratio, *ratio, *input, *slices, *tf, *sf,
                                 *parallel, *ptb, *strict, *coef_a, *coef_b, *format);
            };
        });
    }

    // compare
    {
        auto* cmd = app.add_subcommand("compare", "Overlap metrics between two masks");
        auto path_a = std::make_shared<std::string>();
        auto path_b = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("mask_a", *path_a, "First mask")->required();
        cmd->add_option("mask_b", *path_b, "Second mask")->required();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, path_a, path_b, format] {
            run = [=] { return cmd_compare(*path_a, *path_b, *format); };
        });
    }

    // metrics
    {
        auto* cmd = app.add_subcommand("metrics",
                                       "Classification metrics from label files");
        auto pred = std::make_shared<std::string>();
        auto truth = std::make_shared<std::string>();
        auto positive = std::make_shared<std::string>("CD");
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("--pred", *pred, "Predicted labels, one per line")->required();
        cmd->add_option("--truth", *truth, "Ground-truth labels, one per line")
            ->required();
        cmd->add_option("--positive", *positive, "Positive class")
            ->check(CLI::IsMember({"CD", "ITB"}))
            ->capture_default_str();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, pred, truth, positive, format] {
            run = [=] { return cmd_metrics(*pred, *truth, *positive, *format); };
        });
    }

    // phantom
    {
        auto* cmd = app.add_subcommand("phantom",
                                       "Generate a synthetic phantom with ground truth");
        auto f = std::make_shared<PhantomFlags>();
        cmd->add_option("-o,--output", f->output, "Output volume path")->required();
        cmd->add_option("--truth-json", f->truth_json,
                        "Truth sidecar path (default: OUTPUT.truth.json)");
        cmd->add_option("--fat-mask", f->fat_mask,
                        "Also write the ideal fat mask to this path");
        cmd->add_option("--size", f->size, "Image size as W,H")->capture_default_str();
        cmd->add_option("--num-slices", f->num_slices, "Slice count")
            ->capture_default_str();
        cmd->add_option("--ring", f->ring, "Subcut ring radii as INNER,OUTER")
            ->capture_default_str();
        cmd->add_option("--body", f->body, "Body semi-axes as A,B (default ring+5)");
        cmd->add_option("--blob", f->blobs,
                        "Visceral blob as CX,CY,R (repeatable; offsets from center)");
        auto* target_opt = cmd->add_option("--target-ratio", f->target_ratio,
                                           "Pack blobs to hit this visceral/subcut ratio");
        cmd->add_option("--noise-sigma", f->noise_sigma, "Gaussian HU noise sigma")
            ->capture_default_str();
        cmd->add_option("--seed", f->seed, "Noise RNG seed")->capture_default_str();
        cmd->add_option("--artifact-lines", f->artifact_lines,
                        "Number of 1-px streak artifacts in the air margin")
            ->capture_default_str();
        cmd->add_option("--spacing", f->spacing, "Voxel spacing as X,Y,Z mm")
            ->capture_default_str();
        cmd->add_option("--fat-hu", f->fat_hu)->capture_default_str();
        cmd->add_option("--muscle-hu", f->muscle_hu)->capture_default_str();
        cmd->add_option("--skin-hu", f->skin_hu)->capture_default_str();
        cmd->add_option("--air-hu", f->air_hu)->capture_default_str();
        cmd->add_option("--format", f->format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, f, target_opt] {
            f->target_set = target_opt->count() > 0;
            run = [=] { return cmd_phantom(*f); };
        });
    }

    // bench
    {
        auto* cmd = app.add_subcommand("bench", "Time the pipeline stages");
        auto input = std::make_shared<std::string>();
        auto slices = std::make_shared<std::string>("all");
        auto tf = std::make_shared<ThresholdFlags>();
        auto sf = std::make_shared<SweepFlags>();
        auto reps = std::make_shared<int>(5);
        auto parallel = std::make_shared<int>(1);
        auto format = std::make_shared<std::string>("json");
        cmd->add_option("-i,--input", *input, "Input volume")->required();
        cmd->add_option("--slices", *slices, "Slice selection: z, z0:z1, or all")
            ->capture_default_str();
        add_threshold_flags(cmd, *tf);
        add_sweep_flags(cmd, *sf);
        cmd->add_option("--repetitions", *reps, "Timed repetitions (>= 3)")
            ->capture_default_str();
        cmd->add_option("--parallel", *parallel, "Worker threads")->capture_default_str();
        cmd->add_option("--format", *format)->check(CLI::IsMember({"json", "text"}));
        cmd->callback([&run, input, slices, tf, sf, reps, parallel, format] {
            run = [=] {
                return cmd_bench(*input, *slices, *tf, *sf, *reps, *parallel, *format);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run ? run() : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ctfat::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
