#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hppm/geom.hpp"

namespace hppm {

/// Axis-aligned rectangle in pixels, [x0, x1] x [y0, y1].
struct Box2 {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const;  // 0 for empty or inverted boxes
    Box2 intersect(const Box2& other) const;
    bool operator==(const Box2&) const = default;
};

Box2 bbox_of(const Points2& points);

/// δ = 1 iff at least half of the part box lies inside the crop. Boxes with
/// zero area are never visible.
bool box_visible(const Box2& part_box, const Box2& crop);

std::vector<bool> part_visibility(std::span<const Points2> parts_2d, const Box2& crop);
std::vector<bool> part_visibility(std::span<const Box2> part_boxes, const Box2& crop);

struct CropSpec {
    std::string sample_id;
    Vec2 center = Vec2::Zero();
    double side = 0.0;
    std::vector<bool> visible;

    Box2 rect() const;
    int visible_count() const;
};

struct CropConfig {
    int attempts = 20;
    int keep_min = 1;
    int keep_max = 4;
    double side_min = 0.2;  // fractions of the larger human bbox dimension
    double side_max = 1.2;

    void validate() const;
};

/// Random square crops of one sample. Centers are uniform in the human box,
/// sides uniform in [side_min, side_max] * max(width, height); crops whose
/// visible-part count falls outside [keep_min, keep_max] are dropped.
std::vector<CropSpec> gen_crops(std::span<const Box2> part_boxes, const Box2& human_box, std::uint64_t seed,
                                const CropConfig& cfg = {}, const std::string& sample_id = {});

struct PartMetrics {
    int part_id = 0;
    double vertex_error_sum_mm = 0.0;
    double joint_error_sum_mm = 0.0;
    long vertex_count = 0;
    long joint_count = 0;

    double mpve_mm() const;
    double mpjpe_mm() const;
};

/// Accumulated benchmark metrics. Overall MPVE is over visible-part vertices;
/// overall MPJPE is over joints with at least one visible owning part.
struct MetricsReport {
    double vertex_error_sum_mm = 0.0;
    double joint_error_sum_mm = 0.0;
    long vertex_count = 0;
    long joint_count = 0;
    long sample_count = 0;
    std::vector<PartMetrics> per_part;

    double mpve_mm() const;
    double mpjpe_mm() const;
};

/// Mean l2 distance in mm over the vertices of visible parts. Throws
/// DataError when nothing is compared.
double mpve(std::span<const Points3> pred, std::span<const Points3> gt, const std::vector<bool>& visible);
/// Mean l2 distance in mm over joints whose `counted` flag is set.
double mpjpe(const Points3& pred, const Points3& gt, const std::vector<bool>& counted);

/// Joints (kJointNames order) with at least one visible owning part.
std::vector<bool> counted_joints(const std::vector<bool>& visible_parts);

/// Whole-body joint estimate from per-part regressed joints: the mean over
/// the visible parts owning each joint. Uncounted rows are zero.
Points3 merge_part_joints(std::span<const Points3> part_joints, const std::vector<bool>& visible_parts);

/// Adds one sample. Part joints are in part_joints() order; whole-body joints
/// on both sides are merged with merge_part_joints before comparison.
void accumulate_metrics(MetricsReport& report, std::span<const Points3> pred_parts,
                        std::span<const Points3> gt_parts, std::span<const Points3> pred_part_joints,
                        std::span<const Points3> gt_part_joints, const std::vector<bool>& visible);

}  // namespace hppm
