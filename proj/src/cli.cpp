#include "hppm/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hppm/body_parts.hpp"
#include "hppm/bundle.hpp"
#include "hppm/error.hpp"
#include "hppm/fuse.hpp"
#include "hppm/synth_body.hpp"

namespace hppm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct Context {
    std::ostream& out;
    std::ostream& err;
    bool json = false;
    std::string config_path;

    RunConfig config() const
    {
        std::string path = config_path;
        if (path.empty()) {
            if (const char* env = std::getenv("HPPM_CONFIG"))
                path = env;
        }
        if (path.empty())
            throw ConfigError("no configuration: pass --config <path> or set HPPM_CONFIG");
        return load_run_config(path);
    }

    std::optional<RunConfig> maybe_config() const
    {
        if (config_path.empty() && !std::getenv("HPPM_CONFIG"))
            return std::nullopt;
        return config();
    }

    void emit(const ojson& j, const std::string& text) const
    {
        if (json)
            out << j.dump(1) << '\n';
        else
            out << text;
    }
};

// `*.obj` files of a directory (sorted) or the file itself.
std::vector<fs::path> expand_meshes(const std::vector<std::string>& inputs)
{
    std::vector<fs::path> out;
    for (const auto& s : inputs) {
        const fs::path p(s);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".obj")
                    found.push_back(e.path());
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::exists(p)) {
            out.push_back(p);
        } else {
            throw ConfigError("input '" + s + "' does not exist");
        }
    }
    return out;
}

fs::path joints_sidecar(const fs::path& mesh)
{
    return mesh.parent_path() / (mesh.stem().string() + ".joints.json");
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext)
{
    if (!fs::is_directory(dir))
        throw ConfigError("directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ext)
            out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Points3> decode_all(const HppmModel& model, const SampleAnnotation& ann)
{
    if (static_cast<int>(ann.parts.size()) != model.part_count())
        throw DataError("annotation " + ann.sample_id + " has " + std::to_string(ann.parts.size()) +
                        " parts, the model has " + std::to_string(model.part_count()));
    std::vector<Points3> out(ann.parts.size());
    for (std::size_t i = 0; i < ann.parts.size(); ++i) {
        const int p = ann.parts[i].part_id;
        if (p != static_cast<int>(i))
            throw DataError("annotation " + ann.sample_id + " lists parts out of order");
        if (ann.parts[i].shape.size() != model.shapes[p].k())
            throw DataError("annotation " + ann.sample_id + ": part " + std::to_string(p) + " has " +
                            std::to_string(ann.parts[i].shape.size()) + " shape parameters, model has " +
                            std::to_string(model.shapes[p].k()));
        out[i] = decode_part(model.shapes[p], ann.parts[i]);
    }
    return out;
}

std::vector<Points3> regress_all(const HppmModel& model, const std::vector<Points3>& parts)
{
    std::vector<Points3> out;
    for (int p = 0; p < model.part_count(); ++p)
        out.push_back(regress_joints(model.regressors[p], parts[p]));
    return out;
}

ojson template_summary(const HppmTemplateSet& set, std::string& text)
{
    ojson parts = ojson::array();
    text += fmt::format("{:<16} {:>6} {:>6}  overlaps\n", "Part Names", "N_p", "core");
    for (const auto& part : set.parts) {
        ojson ov = ojson::object();
        std::string ovtext;
        for (const auto& [q, ids] : part.overlap) {
            ov[set.parts[q].name] = ids.size();
            ovtext += fmt::format(" {}:{}", set.parts[q].name, ids.size());
        }
        parts.push_back({{"id", part.part_id},
                         {"name", part.name},
                         {"vertex_count", part.vertex_count()},
                         {"core_count", part.core_ids.size()},
                         {"overlaps", ov}});
        text += fmt::format("{:<16} {:>6} {:>6} {}\n", part.name, part.vertex_count(), part.core_ids.size(), ovtext);
    }
    text += fmt::format("{} parts, {} neighbor pairs, dilation {}\n", set.part_count(), set.neighbors.size(),
                        set.dilation);
    return {{"parts", parts}, {"neighbors", set.neighbors.size()}, {"dilation", set.dilation}};
}

int cmd_synth(const Context& ctx, const std::string& out_dir, int n_train, int n_test, std::uint64_t seed,
              double pose_scale)
{
    if (n_train < 0 || n_test < 0)
        throw ConfigError("sample counts must be >= 0");
    SynthBodySpec spec = default_body_spec();
    spec.seed = seed;
    spec.pose_scale = pose_scale;
    const SynthBody body(spec);
    const fs::path root(out_dir);
    fs::create_directories(root / "train");
    fs::create_directories(root / "test");

    save_mesh(body.template_mesh(), root / "template.obj");
    save_joints(body.template_joints(), root / "template.joints.json");
    std::vector<std::string> bones;
    for (const auto& b : spec.bones)
        bones.push_back(b.name);
    save_blend_weights(body.weights(), bones, root / "weights.json");
    save_merge_map(default_merge_map(spec), root / "merge_map.json");

    auto write_set = [&](const char* name, int count, std::uint64_t stream) {
        for (int i = 0; i < count; ++i) {
            const std::uint64_t s = mix_seed(mix_seed(seed, stream), static_cast<std::uint64_t>(i));
            const SynthSample sample = body.instance(body.sample_shape(s), body.sample_pose(s));
            const std::string stem = fmt::format("sample_{:04d}", i);
            save_mesh(sample.mesh, root / name / (stem + ".obj"));
            save_joints(sample.joints, root / name / (stem + ".joints.json"));
        }
    };
    write_set("train", n_train, 1);
    write_set("test", n_test, 2);

    RunConfig cfg;
    cfg.body_template = "template.obj";
    cfg.blend_weights = "weights.json";
    cfg.merge_map = "merge_map.json";
    cfg.data_dir = "train";
    cfg.output_dir = "bundle";
    cfg.template_joints = "template.joints.json";
    cfg.seed = seed;
    save_run_config(cfg, root / "config.json");

    ojson j{{"out", root.generic_string()},
            {"vertex_count", body.template_mesh().vertex_count()},
            {"face_count", body.template_mesh().face_count()},
            {"bones", spec.bone_count()},
            {"train", n_train},
            {"test", n_test},
            {"config", (root / "config.json").generic_string()}};
    ctx.emit(j, fmt::format("synthetic body: {} vertices, {} faces, {} bones\nwrote {} train and {} test samples "
                            "to {}\nconfig: {}\n",
                            body.template_mesh().vertex_count(), body.template_mesh().face_count(),
                            spec.bone_count(), n_train, n_test, root.string(), (root / "config.json").string()));
    return 0;
}

int cmd_build_template(const Context& ctx, std::optional<int> dilation)
{
    const RunConfig cfg = ctx.config();
    const int n = dilation.value_or(cfg.dilation);
    if (n < 0)
        throw ConfigError("dilation must be >= 0");
    const Mesh body = load_mesh(cfg.body_template);
    const BlendWeights w = load_blend_weights(cfg.blend_weights);
    const MergeMap map = load_merge_map(cfg.merge_map);
    const HppmTemplateSet set = build_templates(body, w, map, n);
    fs::create_directories(cfg.output_dir);
    const fs::path path = cfg.output_dir / "templates.json";
    save_templates(set, path);
    std::string text;
    ojson j = template_summary(set, text);
    j["templates"] = path.generic_string();
    text += "wrote " + path.string() + "\n";
    ctx.emit(j, text);
    return 0;
}

int cmd_train(const Context& ctx)
{
    const RunConfig cfg = ctx.config();
    const HppmTemplateSet templates = load_templates(cfg.output_dir / "templates.json");
    const MergeMap map = load_merge_map(cfg.merge_map);
    if (map.hash() != templates.merge_map_hash)
        throw DataError("templates.json was built from a different merge map; rerun build-template");
    const auto files = list_files(cfg.data_dir, ".obj");
    if (files.size() < 2)
        throw DataError("training needs at least 2 meshes in " + cfg.data_dir.string());
    std::vector<Mesh> bodies;
    std::vector<Points3> joints;
    for (const auto& f : files) {
        bodies.push_back(load_mesh(f));
        const fs::path jp = joints_sidecar(f);
        if (!fs::exists(jp))
            throw DataError("missing joint sidecar " + jp.string());
        joints.push_back(load_joints(jp));
    }
    TrainingData data{bodies, joints, std::nullopt};
    if (cfg.template_joints)
        data.template_joints = load_joints(*cfg.template_joints);
    const HppmModel model = train_model(templates, map, data, cfg.training);
    save_bundle(model, cfg.output_dir);

    ojson parts = ojson::array();
    std::string text = fmt::format("{:<16} {:>4} {:>6} {:>5} {:>14} {:>14}\n", "Part Names", "k_p", "N_p", "|J_p|",
                                   "Vertex Errors", "Joint Errors");
    double vsum = 0.0, jsum = 0.0;
    for (int p = 0; p < model.part_count(); ++p) {
        const auto& s = model.shapes[p];
        const auto& r = s.report;
        vsum += r.vertex_error_mm;
        jsum += r.joint_error_mm;
        parts.push_back({{"id", p},
                         {"name", model.templates.parts[p].name},
                         {"k", s.k()},
                         {"vertex_count", s.vertex_count()},
                         {"joint_count", model.regressors[p].joint_count()},
                         {"vertex_error_mm", r.vertex_error_mm},
                         {"joint_error_mm", r.joint_error_mm},
                         {"budget_violated", r.budget_violated},
                         {"rank_clamped", r.rank_clamped}});
        text += fmt::format("{:<16} {:>4} {:>6} {:>5} {:>14.2f} {:>14.2f}{}\n", model.templates.parts[p].name, s.k(),
                            s.vertex_count(), model.regressors[p].joint_count(), r.vertex_error_mm, r.joint_error_mm,
                            r.budget_violated ? "  (budget not met at k_max)" : "");
    }
    const double np = static_cast<double>(model.part_count());
    text += fmt::format("{:<16} {:>4} {:>6} {:>5} {:>14.2f} {:>14.2f}\n", "Average", "-", "-", "-", vsum / np,
                        jsum / np);
    text += fmt::format("trained on {} meshes; bundle written to {}\n", files.size(), cfg.output_dir.string());
    ctx.emit({{"samples", files.size()},
              {"bundle", cfg.output_dir.generic_string()},
              {"parts", parts},
              {"average_vertex_error_mm", vsum / np},
              {"average_joint_error_mm", jsum / np}},
             text);
    return 0;
}

int cmd_annotate(const Context& ctx, std::vector<std::string> inputs, std::string bundle_dir, std::string out_dir,
                 std::string mode)
{
    const auto cfg = ctx.maybe_config();
    if (bundle_dir.empty()) {
        if (!cfg)
            throw ConfigError("annotate needs --bundle or a configuration");
        bundle_dir = cfg->output_dir.string();
    }
    if (out_dir.empty())
        out_dir = (fs::path(bundle_dir) / "annotations").string();
    if (inputs.empty()) {
        if (!cfg)
            throw ConfigError("annotate needs input meshes or a configuration");
        inputs.push_back(cfg->data_dir.string());
    }
    AnnotateOptions options;
    options.mode = mode.empty() ? (cfg ? cfg->fit_mode : FitMode::Rigid) : parse_fit_mode(mode);
    const CameraIntrinsics cam = cfg ? cfg->camera : CameraIntrinsics{};

    const HppmModel model = load_bundle(bundle_dir);
    const auto meshes = expand_meshes(inputs);
    if (meshes.empty())
        throw DataError("no meshes to annotate");
    fs::create_directories(out_dir);

    const int np = model.part_count();
    std::vector<double> vsum(np, 0.0), jsum(np, 0.0);
    ojson files = ojson::array();
    for (const auto& path : meshes) {
        const Mesh body = load_mesh(path);
        if (body.vertex_count() != model.templates.body.vertex_count())
            throw DataError(path.string() + " has " + std::to_string(body.vertex_count()) +
                            " vertices, the template has " +
                            std::to_string(model.templates.body.vertex_count()));
        std::optional<Points3> joints;
        if (fs::exists(joints_sidecar(path)))
            joints = load_joints(joints_sidecar(path));
        const std::string id = path.stem().string();
        const SampleAnnotation ann = annotate_sample(model, body, cam, options, joints, id);
        const fs::path dest = fs::path(out_dir) / (id + ".json");
        save_annotation(ann, dest);
        files.push_back(dest.generic_string());
        for (const auto& r : ann.fit_report) {
            vsum[r.part_id] += r.vertex_error_mm;
            jsum[r.part_id] += r.joint_error_mm;
        }
    }
    const double n = static_cast<double>(meshes.size());
    ojson parts = ojson::array();
    std::string text =
        fmt::format("{:<16} {:>14} {:>14}\n", "Part Names", "Vertex Errors", "Joint Errors");
    double vavg = 0.0, javg = 0.0;
    for (int p = 0; p < np; ++p) {
        parts.push_back({{"id", p},
                         {"name", model.templates.parts[p].name},
                         {"vertex_error_mm", vsum[p] / n},
                         {"joint_error_mm", jsum[p] / n}});
        text += fmt::format("{:<16} {:>14.3f} {:>14.3f}\n", model.templates.parts[p].name, vsum[p] / n, jsum[p] / n);
        vavg += vsum[p] / n / np;
        javg += jsum[p] / n / np;
    }
    text += fmt::format("{:<16} {:>14.3f} {:>14.3f}\n", "Average", vavg, javg);
    text += fmt::format("annotated {} meshes ({} fit) into {}\n", meshes.size(), fit_mode_name(options.mode), out_dir);
    ctx.emit({{"annotations", files},
              {"mode", fit_mode_name(options.mode)},
              {"parts", parts},
              {"average_vertex_error_mm", vavg},
              {"average_joint_error_mm", javg}},
             text);
    return 0;
}

std::vector<bool> parse_visible(const std::string& spec, int part_count)
{
    std::vector<bool> vis(part_count, false);
    if (spec == "all")
        return std::vector<bool>(part_count, true);
    if (spec == "none")
        return vis;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            continue;
        int id = -1;
        try {
            std::size_t used = 0;
            id = std::stoi(tok, &used);
            if (used != tok.size())
                id = -1;
        } catch (const std::exception&) {
            id = -1;
        }
        if (id < 0) {
            try {
                id = part_index(tok);
            } catch (const Error&) {
                id = -1;
            }
        }
        if (id < 0 || id >= part_count)
            throw ConfigError("unknown part '" + tok + "' in --visible");
        vis[id] = true;
    }
    return vis;
}

int cmd_decode_fuse(const Context& ctx, std::string bundle_dir, const std::string& annotation_path,
                    const std::string& visible_spec, std::string out_path)
{
    if (bundle_dir.empty()) {
        const auto cfg = ctx.maybe_config();
        if (!cfg)
            throw ConfigError("decode-fuse needs --bundle or a configuration");
        bundle_dir = cfg->output_dir.string();
    }
    const HppmModel model = load_bundle(bundle_dir);
    const SampleAnnotation ann = load_annotation(annotation_path);
    const auto parts = decode_all(model, ann);
    std::vector<bool> visible;
    if (visible_spec.empty()) {
        for (const auto& s : ann.parts)
            visible.push_back(s.visible);
    } else {
        visible = parse_visible(visible_spec, model.part_count());
    }
    if (std::none_of(visible.begin(), visible.end(), [](bool v) { return v; }))
        throw DataError("no visible parts to fuse");
    const FusedMesh fused = gradual_connect(model.templates, FusionInput{parts, visible});
    if (out_path.empty())
        out_path = (fs::path(annotation_path).parent_path() / (ann.sample_id + ".fused.obj")).string();
    save_mesh(fused.mesh(), out_path);
    const fs::path sidecar = fs::path(out_path).replace_extension(".json");
    ojson side;
    side["sample_id"] = ann.sample_id;
    side["visible"] = std::vector<int>(visible.begin(), visible.end());
    side["template_ids"] = fused.template_ids;
    side["warnings"] = fused.warnings;
    std::ofstream(sidecar) << side.dump(1) << '\n';

    int nvis = static_cast<int>(std::count(visible.begin(), visible.end(), true));
    std::string text = fmt::format("fused {} visible parts: {} vertices, {} faces -> {}\n", nvis,
                                   fused.vertices.rows(), fused.faces.size(), out_path);
    for (const auto& w : fused.warnings)
        text += "warning: " + w + "\n";
    ctx.emit({{"mesh", out_path},
              {"sidecar", sidecar.generic_string()},
              {"visible_parts", nvis},
              {"vertex_count", fused.vertices.rows()},
              {"face_count", fused.faces.size()},
              {"warnings", fused.warnings}},
             text);
    return 0;
}

int cmd_gen_pv(const Context& ctx, std::string bundle_dir, std::string annotations_dir, std::string out_path,
               std::optional<int> attempts, std::optional<std::uint64_t> seed_override)
{
    const auto cfg = ctx.maybe_config();
    if (bundle_dir.empty()) {
        if (!cfg)
            throw ConfigError("gen-pv needs --bundle or a configuration");
        bundle_dir = cfg->output_dir.string();
    }
    if (annotations_dir.empty())
        annotations_dir = (fs::path(bundle_dir) / "annotations").string();
    if (out_path.empty())
        out_path = (fs::path(bundle_dir) / "pv_manifest.jsonl").string();
    CropConfig crops = cfg ? cfg->crops : CropConfig{};
    if (attempts)
        crops.attempts = *attempts;
    crops.validate();
    const std::uint64_t seed = seed_override.value_or(cfg ? cfg->seed : 0);

    const HppmModel model = load_bundle(bundle_dir);
    const auto files = list_files(annotations_dir, ".json");
    const fs::path manifest_dir = fs::absolute(out_path).parent_path();
    std::vector<ManifestRecord> records;
    std::map<int, int> histogram;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const SampleAnnotation ann = load_annotation(files[i]);
        const auto parts = decode_all(model, ann);
        std::vector<Box2> boxes;
        Box2 human{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& p : parts) {
            const Box2 b = bbox_of(project(ann.camera, p));
            boxes.push_back(b);
            human = {std::min(human.x0, b.x0), std::min(human.y0, b.y0), std::max(human.x1, b.x1),
                     std::max(human.y1, b.y1)};
        }
        const auto found = gen_crops(boxes, human, mix_seed(seed, i), crops, ann.sample_id);
        const std::string rel = fs::relative(fs::absolute(files[i]), manifest_dir).generic_string();
        for (const auto& c : found) {
            ++histogram[c.visible_count()];
            records.push_back({c, rel});
        }
    }
    if (!manifest_dir.empty())
        fs::create_directories(manifest_dir);
    save_manifest(records, out_path);

    ojson hist = ojson::object();
    std::string text = fmt::format("{} crops from {} annotations -> {}\nvisible parts  crops\n", records.size(),
                                   files.size(), out_path);
    for (const auto& [k, v] : histogram) {
        hist[std::to_string(k)] = v;
        text += fmt::format("{:>13}  {:>5}\n", k, v);
    }
    ctx.emit({{"manifest", out_path}, {"records", records.size()}, {"samples", files.size()}, {"histogram", hist}},
             text);
    return 0;
}

struct Decoded {
    std::vector<Points3> parts, joints;
    std::vector<PartState> states;  // empty for mesh predictions
    CameraIntrinsics camera;
};

Decoded decode_annotation(const HppmModel& model, const SampleAnnotation& ann)
{
    Decoded d;
    d.parts = decode_all(model, ann);
    d.joints = regress_all(model, d.parts);
    d.states = ann.parts;
    d.camera = ann.camera;
    return d;
}

// Predicted part vertices for one sample: `<dir>/<id>.json` annotation, or
// per-part meshes `<dir>/<id>/part_<p>.obj`.
Decoded load_prediction(const HppmModel& model, const fs::path& dir, const std::string& id)
{
    const fs::path ann = dir / (id + ".json");
    if (fs::exists(ann))
        return decode_annotation(model, load_annotation(ann));
    const fs::path sub = dir / id;
    if (!fs::is_directory(sub))
        throw DataError("no prediction for sample " + id + " in " + dir.string());
    Decoded out;
    for (int p = 0; p < model.part_count(); ++p) {
        const fs::path f = sub / ("part_" + std::to_string(p) + ".obj");
        Mesh m = load_mesh(f);
        if (m.vertex_count() != model.templates.parts[p].vertex_count())
            throw DataError(f.string() + " does not match the part template vertex count");
        out.parts.push_back(std::move(m.vertices));
    }
    out.joints = regress_all(model, out.parts);
    return out;
}

std::vector<PartSample> part_samples(const Decoded& d)
{
    std::vector<PartSample> out;
    for (std::size_t p = 0; p < d.parts.size(); ++p)
        out.push_back({d.parts[p], d.joints[p], d.states[p]});
    return out;
}

void add_losses(LossBreakdown& sum, const LossBreakdown& b)
{
    sum.vertex += b.vertex;
    sum.joint3d += b.joint3d;
    sum.joint2d += b.joint2d;
    sum.shape += b.shape;
    sum.rotation += b.rotation;
    sum.translation += b.translation;
    sum.overlap += b.overlap;
    sum.depth += b.depth;
    sum.divide += b.divide;
    sum.fusion += b.fusion;
    sum.total += b.total;
}

int cmd_eval(const Context& ctx, std::string bundle_dir, std::string manifest_path, std::string predictions,
             const std::string& out_path)
{
    const auto cfg = ctx.maybe_config();
    if (bundle_dir.empty()) {
        if (!cfg)
            throw ConfigError("eval needs --bundle or a configuration");
        bundle_dir = cfg->output_dir.string();
    }
    if (manifest_path.empty())
        manifest_path = (fs::path(bundle_dir) / "pv_manifest.jsonl").string();
    if (predictions.empty())
        throw ConfigError("eval needs --predictions");
    const HppmModel model = load_bundle(bundle_dir);
    const auto records = load_manifest(manifest_path);
    const fs::path manifest_dir = fs::absolute(manifest_path).parent_path();

    const LossWeights weights = cfg ? cfg->loss_weights : LossWeights{};
    std::map<std::string, Decoded> gt_cache, pred_cache;
    MetricsReport report;
    // Training losses are only defined when predictions carry parameters.
    std::optional<LossBreakdown> losses = LossBreakdown{};
    for (const auto& r : records) {
        if (static_cast<int>(r.crop.visible.size()) != model.part_count())
            throw DataError("manifest record for " + r.crop.sample_id + " has the wrong number of visibility flags");
        auto git = gt_cache.find(r.annotation);
        if (git == gt_cache.end()) {
            const fs::path ap = fs::path(r.annotation).is_absolute() ? fs::path(r.annotation)
                                                                      : manifest_dir / r.annotation;
            const SampleAnnotation ann = load_annotation(ap);
            if (ann.sample_id != r.crop.sample_id)
                throw DataError("manifest sample " + r.crop.sample_id + " points at annotation of " + ann.sample_id);
            git = gt_cache.emplace(r.annotation, decode_annotation(model, ann)).first;
        }
        auto pit = pred_cache.find(r.crop.sample_id);
        if (pit == pred_cache.end()) {
            pit = pred_cache.emplace(r.crop.sample_id, load_prediction(model, predictions, r.crop.sample_id)).first;
        }
        const Decoded& pred = pit->second;
        const Decoded& gt = git->second;
        accumulate_metrics(report, pred.parts, gt.parts, pred.joints, gt.joints, r.crop.visible);
        if (pred.states.empty())
            losses.reset();
        if (losses && r.crop.visible_count() > 0) {
            const auto ps = part_samples(pred), gs = part_samples(gt);
            add_losses(*losses, total_loss(LossInputs{ps, gs, model.templates, gt.camera, r.crop.visible}, weights));
        }
    }
    if (report.vertex_count == 0)
        throw DataError("manifest " + manifest_path + " has no visible parts to evaluate");
    const std::string js = metrics_json(report, losses);
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f)
            throw DataError("cannot write " + out_path);
        f << js << '\n';
    }
    if (ctx.json) {
        ctx.out << js << '\n';
    } else {
        ctx.out << fmt::format("MPVE  {:.3f} mm over {} vertices\nMPJPE {:.3f} mm over {} joints\n{} crops\n",
                               report.mpve_mm(), report.vertex_count, report.mpjpe_mm(), report.joint_count,
                               report.sample_count);
        if (losses)
            ctx.out << fmt::format("loss  total {:.6g} (divide {:.6g}, fusion {:.6g})\n", losses->total,
                                   losses->divide, losses->fusion);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Part-based human body model toolkit", "hppm"};
    app.require_subcommand(1);
    Context ctx{out, err, false, {}};
    app.add_option("--config", ctx.config_path, "run configuration JSON (or set HPPM_CONFIG)");
    app.add_flag("--json", ctx.json, "machine-readable JSON on stdout");

    std::string synth_out = ".";
    int n_train = 200, n_test = 50;
    std::uint64_t synth_seed = 0;
    double pose_scale = 1.0;
    auto* synth = app.add_subcommand("synth", "write a synthetic dataset and config");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--train", n_train, "training samples")->capture_default_str();
    synth->add_option("--test", n_test, "test samples")->capture_default_str();
    synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
    synth->add_option("--pose-scale", pose_scale, "multiplier on joint angle limits")->capture_default_str();

    std::optional<int> dilation;
    auto* build = app.add_subcommand("build-template", "segment the template into part templates");
    build->add_option("--dilation", dilation, "overlap dilation steps (overrides config)");

    auto* train = app.add_subcommand("train", "train per-part shape models and joint regressors");

    std::vector<std::string> ann_inputs;
    std::string bundle_dir, ann_out, ann_mode;
    auto* annotate = app.add_subcommand("annotate", "fit part parameters to ground-truth meshes");
    annotate->add_option("meshes", ann_inputs, "OBJ files or directories (default: config data_dir)");
    annotate->add_option("--bundle", bundle_dir, "model bundle directory");
    annotate->add_option("--out", ann_out, "annotation output directory");
    annotate->add_option("--mode", ann_mode, "rigid or affine");

    std::string df_annotation, df_visible, df_out;
    auto* decode = app.add_subcommand("decode-fuse", "decode an annotation and fuse its visible parts");
    decode->add_option("annotation", df_annotation, "annotation JSON")->required();
    decode->add_option("--bundle", bundle_dir, "model bundle directory");
    decode->add_option("--visible", df_visible, "comma-separated part ids or names, 'all' or 'none'");
    decode->add_option("--out", df_out, "output OBJ path");

    std::string pv_annotations, pv_out;
    std::optional<int> pv_attempts;
    std::optional<std::uint64_t> pv_seed;
    auto* genpv = app.add_subcommand("gen-pv", "generate the partial-visibility crop manifest");
    genpv->add_option("--bundle", bundle_dir, "model bundle directory");
    genpv->add_option("--annotations", pv_annotations, "annotation directory");
    genpv->add_option("--out", pv_out, "manifest path (JSON lines)");
    genpv->add_option("--attempts", pv_attempts, "crop attempts per sample");
    genpv->add_option("--seed", pv_seed, "random seed (overrides config)");

    std::string ev_manifest, ev_predictions, ev_out;
    auto* eval = app.add_subcommand("eval", "MPVE / MPJPE of predictions over a manifest");
    eval->add_option("--bundle", bundle_dir, "model bundle directory");
    eval->add_option("--manifest", ev_manifest, "benchmark manifest");
    eval->add_option("--predictions", ev_predictions, "directory of predicted annotations or part meshes");
    eval->add_option("--out", ev_out, "write the metrics report JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    auto report_error = [&](const std::string& msg, int code) {
        err << "hppm: error: " << msg << '\n';
        if (ctx.json)
            out << ojson{{"error", msg}, {"exit_code", code}}.dump() << '\n';
        return code;
    };
    try {
        if (*synth)
            return cmd_synth(ctx, synth_out, n_train, n_test, synth_seed, pose_scale);
        if (*build)
            return cmd_build_template(ctx, dilation);
        if (*train)
            return cmd_train(ctx);
        if (*annotate)
            return cmd_annotate(ctx, ann_inputs, bundle_dir, ann_out, ann_mode);
        if (*decode)
            return cmd_decode_fuse(ctx, bundle_dir, df_annotation, df_visible, df_out);
        if (*genpv)
            return cmd_gen_pv(ctx, bundle_dir, pv_annotations, pv_out, pv_attempts, pv_seed);
        if (*eval)
            return cmd_eval(ctx, bundle_dir, ev_manifest, ev_predictions, ev_out);
    } catch (const Error& e) {
        return report_error(e.what(), e.exit_code());
    } catch (const fs::filesystem_error& e) {
        return report_error(e.what(), 3);
    } catch (const std::exception& e) {
        return report_error(e.what(), 1);
    }
    return 0;
}

}  // namespace hppm
