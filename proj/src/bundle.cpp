#include "hppm/bundle.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"

namespace hppm {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

nlohmann::json read_json(const fs::path& path, bool config)
{
    std::ifstream in(path);
    if (!in) {
        if (config)
            throw ConfigError("cannot open " + path.string());
        throw DataError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        if (config)
            throw ConfigError(path.string() + ": " + e.what());
        throw ParseError(path.string(), 0, e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << text;
    if (!out)
        throw DataError("failed writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j)
{
    write_text(path, j.dump(1) + "\n");
}

// Wraps json access errors into DataError naming the file.
template <class F>
auto parse_fields(const fs::path& path, F&& f)
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + path.string() + ": " + e.what());
    }
}

ojson points_json(const Points3& p)
{
    ojson a = ojson::array();
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        a.push_back({p(i, 0), p(i, 1), p(i, 2)});
    return a;
}

Points3 points_from(const nlohmann::json& a)
{
    Points3 p(static_cast<Eigen::Index>(a.size()), 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& row = a.at(i);
        if (row.size() != 3)
            throw DataError("point " + std::to_string(i) + " does not have 3 coordinates");
        for (int c = 0; c < 3; ++c)
            p(static_cast<Eigen::Index>(i), c) = row.at(c).get<double>();
    }
    return p;
}

ojson faces_json(const std::vector<Face>& faces)
{
    ojson a = ojson::array();
    for (const Face& f : faces)
        a.push_back({f[0], f[1], f[2]});
    return a;
}

std::vector<Face> faces_from(const nlohmann::json& a)
{
    std::vector<Face> faces;
    faces.reserve(a.size());
    for (const auto& f : a)
        faces.push_back({f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});
    return faces;
}

ojson training_json(const TrainingConfig& t)
{
    return {{"max_error_mm", t.max_error_mm},
            {"k_min", t.k_min},
            {"k_max", t.k_max},
            {"regressor_mode", t.regressor_mode == RegressorMode::PerSample ? "per_sample" : "template"}};
}

TrainingConfig training_from(const nlohmann::json& j, TrainingConfig t = {})
{
    t.max_error_mm = j.value("max_error_mm", t.max_error_mm);
    t.k_min = j.value("k_min", t.k_min);
    t.k_max = j.value("k_max", t.k_max);
    if (j.contains("regressor_mode")) {
        const auto m = j.at("regressor_mode").get<std::string>();
        if (m == "per_sample")
            t.regressor_mode = RegressorMode::PerSample;
        else if (m == "template")
            t.regressor_mode = RegressorMode::Template;
        else
            throw ConfigError("unknown regressor_mode '" + m + "'");
    }
    return t;
}

ojson merge_map_json(const MergeMap& m)
{
    ojson j;
    j["part_names"] = m.part_names;
    j["segment_to_part"] = m.segment_to_part;
    j["segment_names"] = m.segment_names;
    return j;
}

MergeMap merge_map_from(const nlohmann::json& j)
{
    MergeMap m;
    m.part_names = j.at("part_names").get<std::vector<std::string>>();
    m.segment_to_part = j.at("segment_to_part").get<std::vector<int>>();
    m.segment_names = j.value("segment_names", std::vector<std::string>{});
    m.validate();
    return m;
}

void put_f64(std::string& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.append(buf, 8);
}

double get_f64(const std::string& in, std::size_t& pos)
{
    std::uint64_t bits;
    std::memcpy(&bits, in.data() + pos, 8);
    if constexpr (std::endian::native == std::endian::big)
        bits = __builtin_bswap64(bits);
    pos += 8;
    return std::bit_cast<double>(bits);
}

std::string read_binary(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void save_templates(const HppmTemplateSet& set, const fs::path& path)
{
    ojson j;
    j["format"] = kBundleFormat;
    j["dilation"] = set.dilation;
    j["merge_map_hash"] = set.merge_map_hash;
    j["neighbors"] = ojson::array();
    for (const auto& [p, q] : set.neighbors)
        j["neighbors"].push_back({p, q});
    j["body"] = {{"vertices", points_json(set.body.vertices)}, {"faces", faces_json(set.body.faces)}};
    ojson parts = ojson::array();
    for (const auto& part : set.parts) {
        ojson overlaps = ojson::object();
        for (const auto& [q, ids] : part.overlap)
            overlaps[std::to_string(q)] = ids;
        parts.push_back({{"id", part.part_id},
                         {"name", part.name},
                         {"global_ids", part.global_ids},
                         {"core_ids", part.core_ids},
                         {"local_faces", faces_json(part.local_faces)},
                         {"overlaps", overlaps}});
    }
    j["parts"] = std::move(parts);
    write_json(path, j);
}

HppmTemplateSet load_templates(const fs::path& path)
{
    const auto j = read_json(path, false);
    auto set = parse_fields(path, [&] {
        HppmTemplateSet s;
        if (j.at("format").get<std::string>() != kBundleFormat)
            throw DataError(path.string() + ": unsupported format " + j.at("format").dump());
        s.dilation = j.at("dilation").get<int>();
        s.merge_map_hash = j.at("merge_map_hash").get<std::string>();
        for (const auto& e : j.at("neighbors"))
            s.neighbors.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        s.body.vertices = points_from(j.at("body").at("vertices"));
        s.body.faces = faces_from(j.at("body").at("faces"));
        s.body.validate();
        for (const auto& pj : j.at("parts")) {
            auto ids = pj.at("global_ids").get<std::vector<int>>();
            for (int g : ids) {
                if (g < 0 || g >= s.body.vertex_count())
                    throw DataError(path.string() + ": part vertex id out of range");
            }
            PartTemplate part;
            part.part_id = pj.at("id").get<int>();
            part.name = pj.at("name").get<std::string>();
            part.global_ids = std::move(ids);
            part.core_ids = pj.at("core_ids").get<std::vector<int>>();
            part.local_faces = faces_from(pj.at("local_faces"));
            part.template_vertices.resize(static_cast<Eigen::Index>(part.global_ids.size()), 3);
            for (std::size_t i = 0; i < part.global_ids.size(); ++i)
                part.template_vertices.row(static_cast<Eigen::Index>(i)) = s.body.vertices.row(part.global_ids[i]);
            for (const auto& [key, ids_j] : pj.at("overlaps").items())
                part.overlap[std::stoi(key)] = ids_j.get<std::vector<int>>();
            s.parts.push_back(std::move(part));
        }
        return s;
    });
    set.validate();
    return set;
}

void save_bundle(const HppmModel& model, const fs::path& dir)
{
    model.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw DataError("cannot create bundle directory " + dir.string() + ": " + ec.message());
    save_templates(model.templates, dir / "templates.json");

    ojson j;
    j["format"] = kBundleFormat;
    j["seed_mixing"] = "splitmix64(seed ^ splitmix64(index))";
    j["dilation"] = model.templates.dilation;
    j["merge_map"] = merge_map_json(model.merge_map);
    j["merge_map_hash"] = model.merge_map.hash();
    j["training"] = training_json(model.training);
    j["neighbors"] = ojson::array();
    for (const auto& [p, q] : model.templates.neighbors)
        j["neighbors"].push_back({p, q});
    ojson parts = ojson::array();
    for (int p = 0; p < model.part_count(); ++p) {
        const auto& shape = model.shapes[p];
        const auto& reg = model.regressors[p];
        const auto& rep = shape.report;
        const std::string file = "part_" + std::to_string(p) + ".bin";
        parts.push_back({{"id", p},
                         {"name", model.templates.parts[p].name},
                         {"vertex_count", shape.vertex_count()},
                         {"k", shape.k()},
                         {"joints", reg.joint_names},
                         {"joint_ids", model.part_joint_ids[p]},
                         {"file", file},
                         {"report",
                          {{"vertex_error_mm", rep.vertex_error_mm},
                           {"joint_error_mm", rep.joint_error_mm},
                           {"rank", rep.rank},
                           {"budget_violated", rep.budget_violated},
                           {"rank_clamped", rep.rank_clamped},
                           {"vertex_error_curve_mm", rep.vertex_error_curve_mm},
                           {"joint_error_curve_mm", rep.joint_error_curve_mm}}}});

        std::string bin;
        const auto n3 = shape.mean.size();
        bin.reserve(static_cast<std::size_t>(8 * (n3 + n3 * shape.k() + reg.matrix.size())));
        for (Eigen::Index i = 0; i < n3; ++i)
            put_f64(bin, shape.mean(i));
        for (Eigen::Index c = 0; c < shape.basis.cols(); ++c)
            for (Eigen::Index r = 0; r < shape.basis.rows(); ++r)
                put_f64(bin, shape.basis(r, c));
        for (Eigen::Index r = 0; r < reg.matrix.rows(); ++r)
            for (Eigen::Index c = 0; c < reg.matrix.cols(); ++c)
                put_f64(bin, reg.matrix(r, c));
        write_text(dir / file, bin);
    }
    j["parts"] = std::move(parts);
    write_json(dir / "model.json", j);
}

HppmModel load_bundle(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw ConfigError("model bundle " + dir.string() + " does not exist");
    const fs::path model_path = dir / "model.json";
    const auto j = read_json(model_path, false);
    HppmModel model;
    model.templates = load_templates(dir / "templates.json");
    parse_fields(model_path, [&] {
        if (j.at("format").get<std::string>() != kBundleFormat)
            throw DataError(model_path.string() + ": unsupported format " + j.at("format").dump());
        model.merge_map = merge_map_from(j.at("merge_map"));
        model.training = training_from(j.at("training"));
        if (j.at("dilation").get<int>() != model.templates.dilation)
            throw DataError(model_path.string() + ": dilation differs from templates.json");
        const auto& parts = j.at("parts");
        if (static_cast<int>(parts.size()) != model.templates.part_count())
            throw DataError(model_path.string() + ": part count differs from templates.json");
        for (int p = 0; p < static_cast<int>(parts.size()); ++p) {
            const auto& pj = parts.at(p);
            if (pj.at("id").get<int>() != p)
                throw DataError(model_path.string() + ": parts must be listed in id order");
            const int n = pj.at("vertex_count").get<int>();
            const int k = pj.at("k").get<int>();
            if (n != model.templates.parts[p].vertex_count() || k < 0)
                throw DataError(model_path.string() + ": part " + std::to_string(p) + " dimensions do not match");
            PartShapeModel shape;
            shape.part_id = p;
            JointRegressor reg;
            reg.part_id = p;
            reg.joint_names = pj.at("joints").get<std::vector<std::string>>();
            model.part_joint_ids.push_back(pj.at("joint_ids").get<std::vector<int>>());
            const auto& rj = pj.at("report");
            auto& rep = shape.report;
            rep.vertex_error_mm = rj.at("vertex_error_mm").get<double>();
            rep.joint_error_mm = rj.at("joint_error_mm").get<double>();
            rep.rank = rj.at("rank").get<int>();
            rep.budget_violated = rj.at("budget_violated").get<bool>();
            rep.rank_clamped = rj.at("rank_clamped").get<bool>();
            rep.vertex_error_curve_mm = rj.at("vertex_error_curve_mm").get<std::vector<double>>();
            rep.joint_error_curve_mm = rj.at("joint_error_curve_mm").get<std::vector<double>>();

            const fs::path bin_path = dir / pj.at("file").get<std::string>();
            const std::string bin = read_binary(bin_path);
            const std::size_t nj = reg.joint_names.size();
            const std::size_t n3 = 3 * static_cast<std::size_t>(n);
            const std::size_t expected = 8 * (n3 + n3 * k + nj * n);
            if (bin.size() != expected)
                throw DataError(bin_path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                                std::to_string(bin.size()));
            std::size_t pos = 0;
            shape.mean.resize(static_cast<Eigen::Index>(n3));
            for (std::size_t i = 0; i < n3; ++i)
                shape.mean(static_cast<Eigen::Index>(i)) = get_f64(bin, pos);
            shape.basis.resize(static_cast<Eigen::Index>(n3), k);
            for (int c = 0; c < k; ++c)
                for (std::size_t r = 0; r < n3; ++r)
                    shape.basis(static_cast<Eigen::Index>(r), c) = get_f64(bin, pos);
            reg.matrix.resize(static_cast<Eigen::Index>(nj), n);
            for (std::size_t r = 0; r < nj; ++r)
                for (int c = 0; c < n; ++c)
                    reg.matrix(static_cast<Eigen::Index>(r), c) = get_f64(bin, pos);
            model.shapes.push_back(std::move(shape));
            model.regressors.push_back(std::move(reg));
        }
        return 0;
    });
    model.validate();
    return model;
}

void save_blend_weights(const BlendWeights& w, const std::vector<std::string>& bone_names, const fs::path& path)
{
    ojson j;
    j["bones"] = bone_names;
    j["vertex_count"] = w.vertex_count();
    ojson entries = ojson::array();
    for (int v = 0; v < w.vertex_count(); ++v)
        for (int b = 0; b < w.bone_count(); ++b)
            if (w.weights(v, b) != 0.0)
                entries.push_back({v, b, w.weights(v, b)});
    j["entries"] = std::move(entries);
    write_text(path, j.dump() + "\n");
}

BlendWeights load_blend_weights(const fs::path& path)
{
    const auto j = read_json(path, true);
    BlendWeights w = parse_fields(path, [&] {
        const auto bones = j.at("bones").get<std::vector<std::string>>();
        const int n = j.at("vertex_count").get<int>();
        if (n <= 0 || bones.empty())
            throw DataError(path.string() + ": empty blend weights");
        BlendWeights out;
        out.weights = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(bones.size()));
        for (const auto& e : j.at("entries")) {
            const int v = e.at(0).get<int>();
            const int b = e.at(1).get<int>();
            if (v < 0 || v >= n || b < 0 || b >= static_cast<int>(bones.size()))
                throw DataError(path.string() + ": weight entry out of range");
            out.weights(v, b) = e.at(2).get<double>();
        }
        return out;
    });
    w.validate();
    return w;
}

void save_joints(const Points3& joints, const fs::path& path)
{
    ojson j;
    ojson names = ojson::array();
    for (Eigen::Index i = 0; i < joints.rows(); ++i)
        names.push_back(i < kJointCount ? std::string(kJointNames[i]) : "joint_" + std::to_string(i));
    j["names"] = std::move(names);
    j["joints"] = points_json(joints);
    write_json(path, j);
}

Points3 load_joints(const fs::path& path)
{
    const auto j = read_json(path, false);
    return parse_fields(path, [&] { return points_from(j.at("joints")); });
}

void save_annotation(const SampleAnnotation& ann, const fs::path& path)
{
    ojson j;
    j["sample_id"] = ann.sample_id;
    j["camera"] = {{"fx", ann.camera.fx}, {"fy", ann.camera.fy}, {"cx", ann.camera.cx}, {"cy", ann.camera.cy}};
    ojson parts = ojson::array();
    for (const auto& s : ann.parts) {
        parts.push_back({{"part_id", s.part_id},
                         {"visible", s.visible},
                         {"S", std::vector<double>(s.shape.data(), s.shape.data() + s.shape.size())},
                         {"rot6d", s.rotation.values},
                         {"T", {s.translation.x(), s.translation.y(), s.translation.z()}}});
    }
    j["parts"] = std::move(parts);
    ojson report = ojson::array();
    for (const auto& r : ann.fit_report) {
        report.push_back({{"part_id", r.part_id},
                          {"vertex_error_mm", r.vertex_error_mm},
                          {"joint_error_mm", r.joint_error_mm},
                          {"fit_residual_mm", r.fit_residual_mm}});
    }
    j["fit_report"] = std::move(report);
    write_json(path, j);
}

SampleAnnotation load_annotation(const fs::path& path)
{
    const auto j = read_json(path, false);
    return parse_fields(path, [&] {
        SampleAnnotation ann;
        ann.sample_id = j.at("sample_id").get<std::string>();
        const auto& c = j.at("camera");
        ann.camera = {c.at("fx").get<double>(), c.at("fy").get<double>(), c.at("cx").get<double>(),
                      c.at("cy").get<double>()};
        ann.camera.validate();
        for (const auto& pj : j.at("parts")) {
            PartState s;
            s.part_id = pj.at("part_id").get<int>();
            s.visible = pj.value("visible", true);
            const auto shape = pj.at("S").get<std::vector<double>>();
            s.shape = Eigen::Map<const Eigen::VectorXd>(shape.data(), static_cast<Eigen::Index>(shape.size()));
            s.rotation.values = pj.at("rot6d").get<std::array<double, 6>>();
            const auto t = pj.at("T").get<std::array<double, 3>>();
            s.translation = Vec3(t[0], t[1], t[2]);
            ann.parts.push_back(std::move(s));
        }
        if (j.contains("fit_report")) {
            for (const auto& rj : j.at("fit_report")) {
                ann.fit_report.push_back({rj.at("part_id").get<int>(), rj.at("vertex_error_mm").get<double>(),
                                          rj.at("joint_error_mm").get<double>(),
                                          rj.at("fit_residual_mm").get<double>()});
            }
        }
        return ann;
    });
}

void save_manifest(const std::vector<ManifestRecord>& records, const fs::path& path)
{
    std::string text;
    for (const auto& r : records) {
        ojson j;
        j["sample_id"] = r.crop.sample_id;
        j["crop"] = {{"cx", r.crop.center.x()}, {"cy", r.crop.center.y()}, {"side", r.crop.side}};
        std::vector<int> flags(r.crop.visible.begin(), r.crop.visible.end());
        j["visible"] = flags;
        j["annotation"] = r.annotation;
        text += j.dump();
        text += '\n';
    }
    write_text(path, text);
}

std::vector<ManifestRecord> load_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open manifest " + path.string());
    std::vector<ManifestRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ManifestRecord r;
            r.crop.sample_id = j.at("sample_id").get<std::string>();
            const auto& c = j.at("crop");
            r.crop.center = Vec2(c.at("cx").get<double>(), c.at("cy").get<double>());
            r.crop.side = c.at("side").get<double>();
            for (int f : j.at("visible").get<std::vector<int>>())
                r.crop.visible.push_back(f != 0);
            r.annotation = j.at("annotation").get<std::string>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), lineno, e.what());
        }
    }
    return out;
}

std::string metrics_json(const MetricsReport& report, const std::optional<LossBreakdown>& losses)
{
    ojson j;
    j["mpve_mm"] = report.mpve_mm();
    j["mpjpe_mm"] = report.mpjpe_mm();
    j["vertex_count"] = report.vertex_count;
    j["joint_count"] = report.joint_count;
    j["sample_count"] = report.sample_count;
    ojson parts = ojson::array();
    for (const auto& p : report.per_part) {
        parts.push_back({{"part_id", p.part_id},
                         {"name", p.part_id < kPartCount ? std::string(kPartNames[p.part_id]) : std::string()},
                         {"mpve_mm", p.mpve_mm()},
                         {"mpjpe_mm", p.mpjpe_mm()},
                         {"vertex_count", p.vertex_count},
                         {"joint_count", p.joint_count}});
    }
    j["per_part"] = std::move(parts);
    if (losses) {
        const LossBreakdown& b = *losses;
        j["losses"] = {{"vertex", b.vertex},   {"joint3d", b.joint3d},         {"joint2d", b.joint2d},
                       {"shape", b.shape},     {"rotation", b.rotation},       {"translation", b.translation},
                       {"overlap", b.overlap}, {"depth", b.depth},             {"divide", b.divide},
                       {"fusion", b.fusion},   {"total", b.total}};
    }
    return j.dump(1);
}

std::string fit_mode_name(FitMode m)
{
    return m == FitMode::Rigid ? "rigid" : "affine";
}

FitMode parse_fit_mode(const std::string& s)
{
    if (s == "rigid")
        return FitMode::Rigid;
    if (s == "affine")
        return FitMode::Affine;
    throw ConfigError("unknown fit mode '" + s + "' (expected rigid or affine)");
}

void RunConfig::validate() const
{
    training.validate();
    loss_weights.validate();
    crops.validate();
    camera.validate();
    if (dilation < 0)
        throw ConfigError("dilation must be >= 0");
    auto need = [](const fs::path& p, const char* what) {
        if (p.empty() || !fs::exists(p))
            throw ConfigError(std::string(what) + " '" + p.string() + "' does not exist");
    };
    need(body_template, "body_template");
    need(blend_weights, "blend_weights");
    need(merge_map, "merge_map");
    need(data_dir, "data_dir");
    if (template_joints)
        need(*template_joints, "template_joints");
    if (output_dir.empty())
        throw ConfigError("output_dir is required");
}

RunConfig load_run_config(const fs::path& path)
{
    const auto j = read_json(path, true);
    const fs::path base = path.parent_path();
    auto resolve = [&base](const std::string& s) {
        const fs::path p(s);
        return p.is_absolute() ? p : (base / p).lexically_normal();
    };
    RunConfig cfg;
    try {
        cfg.body_template = resolve(j.at("body_template").get<std::string>());
        cfg.blend_weights = resolve(j.at("blend_weights").get<std::string>());
        cfg.merge_map = resolve(j.at("merge_map").get<std::string>());
        cfg.data_dir = resolve(j.at("data_dir").get<std::string>());
        cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
        if (j.contains("template_joints"))
            cfg.template_joints = resolve(j.at("template_joints").get<std::string>());
        cfg.dilation = j.value("dilation", cfg.dilation);
        if (j.contains("training"))
            cfg.training = training_from(j.at("training"));
        if (j.contains("loss_weights")) {
            const auto& w = j.at("loss_weights");
            auto& lw = cfg.loss_weights;
            lw.vertex = w.value("vertex", lw.vertex);
            lw.joint3d = w.value("joint3d", lw.joint3d);
            lw.joint2d = w.value("joint2d", lw.joint2d);
            lw.shape = w.value("shape", lw.shape);
            lw.rotation = w.value("rotation", lw.rotation);
            lw.translation = w.value("translation", lw.translation);
            lw.overlap = w.value("overlap", lw.overlap);
            lw.depth = w.value("depth", lw.depth);
        }
        if (j.contains("crops")) {
            const auto& c = j.at("crops");
            cfg.crops.attempts = c.value("attempts", cfg.crops.attempts);
            cfg.crops.keep_min = c.value("keep_min", cfg.crops.keep_min);
            cfg.crops.keep_max = c.value("keep_max", cfg.crops.keep_max);
            cfg.crops.side_min = c.value("side_min", cfg.crops.side_min);
            cfg.crops.side_max = c.value("side_max", cfg.crops.side_max);
        }
        if (j.contains("fit_mode"))
            cfg.fit_mode = parse_fit_mode(j.at("fit_mode").get<std::string>());
        if (j.contains("camera")) {
            const auto& c = j.at("camera");
            cfg.camera = {c.value("fx", cfg.camera.fx), c.value("fy", cfg.camera.fy), c.value("cx", cfg.camera.cx),
                          c.value("cy", cfg.camera.cy)};
        }
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    cfg.validate();
    return cfg;
}

void save_run_config(const RunConfig& cfg, const fs::path& path)
{
    ojson j;
    j["body_template"] = cfg.body_template.generic_string();
    j["blend_weights"] = cfg.blend_weights.generic_string();
    j["merge_map"] = cfg.merge_map.generic_string();
    j["data_dir"] = cfg.data_dir.generic_string();
    j["output_dir"] = cfg.output_dir.generic_string();
    if (cfg.template_joints)
        j["template_joints"] = cfg.template_joints->generic_string();
    j["dilation"] = cfg.dilation;
    j["training"] = training_json(cfg.training);
    const auto& lw = cfg.loss_weights;
    j["loss_weights"] = {{"vertex", lw.vertex},     {"joint3d", lw.joint3d},
                         {"joint2d", lw.joint2d},   {"shape", lw.shape},
                         {"rotation", lw.rotation}, {"translation", lw.translation},
                         {"overlap", lw.overlap},   {"depth", lw.depth}};
    j["crops"] = {{"attempts", cfg.crops.attempts},
                  {"keep_min", cfg.crops.keep_min},
                  {"keep_max", cfg.crops.keep_max},
                  {"side_min", cfg.crops.side_min},
                  {"side_max", cfg.crops.side_max}};
    j["fit_mode"] = fit_mode_name(cfg.fit_mode);
    j["camera"] = {{"fx", cfg.camera.fx}, {"fy", cfg.camera.fy}, {"cx", cfg.camera.cx}, {"cy", cfg.camera.cy}};
    j["seed"] = cfg.seed;
    write_json(path, j);
}

}  // namespace hppm
