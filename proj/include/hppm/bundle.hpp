#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hppm/annotate.hpp"
#include "hppm/losses.hpp"
#include "hppm/model.hpp"
#include "hppm/part_template.hpp"
#include "hppm/pv.hpp"

namespace hppm {

inline constexpr const char* kBundleFormat = "hppm-bundle/1";

void save_templates(const HppmTemplateSet& set, const std::filesystem::path& path);
HppmTemplateSet load_templates(const std::filesystem::path& path);

/// Writes model.json, templates.json and part_<id>.bin into `dir`.
void save_bundle(const HppmModel& model, const std::filesystem::path& dir);
HppmModel load_bundle(const std::filesystem::path& dir);

/// Sparse per-vertex weights: {"bones": [...], "vertex_count": N, "entries": [[v, b, w], ...]}.
void save_blend_weights(const BlendWeights& w, const std::vector<std::string>& bone_names,
                        const std::filesystem::path& path);
BlendWeights load_blend_weights(const std::filesystem::path& path);

/// Joint table sidecar {"names": [...], "joints": [[x, y, z], ...]}.
void save_joints(const Points3& joints, const std::filesystem::path& path);
Points3 load_joints(const std::filesystem::path& path);

void save_annotation(const SampleAnnotation& ann, const std::filesystem::path& path);
SampleAnnotation load_annotation(const std::filesystem::path& path);

/// One benchmark manifest record (one JSON line).
struct ManifestRecord {
    CropSpec crop;
    std::string annotation;  // path of the ground-truth annotation
};

void save_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);

/// Metrics report as JSON; `losses` adds the summed training-loss breakdown.
std::string metrics_json(const MetricsReport& report, const std::optional<LossBreakdown>& losses = std::nullopt);

struct RunConfig {
    std::filesystem::path body_template;
    std::filesystem::path blend_weights;
    std::filesystem::path merge_map;
    std::filesystem::path data_dir;
    std::filesystem::path output_dir;
    std::optional<std::filesystem::path> template_joints;
    int dilation = kDefaultDilation;
    TrainingConfig training;
    LossWeights loss_weights;
    CropConfig crops;
    FitMode fit_mode = FitMode::Rigid;
    CameraIntrinsics camera;
    std::uint64_t seed = 0;

    /// Numeric checks plus existence of every input path.
    void validate() const;
};

/// Relative paths resolve against the config file's directory. Missing keys
/// keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

std::string fit_mode_name(FitMode m);
FitMode parse_fit_mode(const std::string& s);

}  // namespace hppm
