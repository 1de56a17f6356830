#include "hppm/pv.hpp"

#include <algorithm>
#include <random>

#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"

namespace hppm {

double Box2::area() const
{
    const double w = x1 - x0;
    const double h = y1 - y0;
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

Box2 Box2::intersect(const Box2& o) const
{
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
}

Box2 bbox_of(const Points2& points)
{
    if (points.rows() == 0)
        return {};
    const auto lo = points.colwise().minCoeff();
    const auto hi = points.colwise().maxCoeff();
    return {lo(0), lo(1), hi(0), hi(1)};
}

bool box_visible(const Box2& part_box, const Box2& crop)
{
    const double area = part_box.area();
    if (!(area > 0.0))
        return false;
    return part_box.intersect(crop).area() / area >= 0.5;
}

std::vector<bool> part_visibility(std::span<const Box2> part_boxes, const Box2& crop)
{
    if (!(crop.area() > 0.0))
        throw DataError("crop rectangle must have positive side");
    std::vector<bool> out;
    out.reserve(part_boxes.size());
    for (const Box2& b : part_boxes)
        out.push_back(box_visible(b, crop));
    return out;
}

std::vector<bool> part_visibility(std::span<const Points2> parts_2d, const Box2& crop)
{
    std::vector<Box2> boxes;
    boxes.reserve(parts_2d.size());
    for (const auto& p : parts_2d)
        boxes.push_back(bbox_of(p));
    return part_visibility(boxes, crop);
}

Box2 CropSpec::rect() const
{
    const double h = 0.5 * side;
    return {center.x() - h, center.y() - h, center.x() + h, center.y() + h};
}

int CropSpec::visible_count() const
{
    return static_cast<int>(std::count(visible.begin(), visible.end(), true));
}

void CropConfig::validate() const
{
    if (attempts < 0)
        throw ConfigError("crop attempts must be >= 0");
    if (keep_min < 0 || keep_min > keep_max)
        throw ConfigError("crop keep range must satisfy 0 <= keep_min <= keep_max");
    if (!(side_min > 0.0) || !(side_min <= side_max))
        throw ConfigError("crop side range must satisfy 0 < side_min <= side_max");
}

std::vector<CropSpec> gen_crops(std::span<const Box2> part_boxes, const Box2& human_box, std::uint64_t seed,
                                const CropConfig& cfg, const std::string& sample_id)
{
    cfg.validate();
    const double extent = std::max(human_box.width(), human_box.height());
    if (!(extent > 0.0))
        throw DataError("human bounding box of " + sample_id + " is empty");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    std::vector<CropSpec> out;
    for (int a = 0; a < cfg.attempts; ++a) {
        CropSpec c;
        c.sample_id = sample_id;
        c.center = {uniform(human_box.x0, human_box.x1), uniform(human_box.y0, human_box.y1)};
        c.side = uniform(cfg.side_min, cfg.side_max) * extent;
        c.visible = part_visibility(part_boxes, c.rect());
        const int n = c.visible_count();
        if (n >= cfg.keep_min && n <= cfg.keep_max)
            out.push_back(std::move(c));
    }
    return out;
}

double PartMetrics::mpve_mm() const
{
    return vertex_count > 0 ? vertex_error_sum_mm / static_cast<double>(vertex_count) : 0.0;
}

double PartMetrics::mpjpe_mm() const
{
    return joint_count > 0 ? joint_error_sum_mm / static_cast<double>(joint_count) : 0.0;
}

double MetricsReport::mpve_mm() const
{
    return vertex_count > 0 ? vertex_error_sum_mm / static_cast<double>(vertex_count) : 0.0;
}

double MetricsReport::mpjpe_mm() const
{
    return joint_count > 0 ? joint_error_sum_mm / static_cast<double>(joint_count) : 0.0;
}

namespace {

double distance_sum_mm(const Points3& a, const Points3& b)
{
    if (a.rows() != b.rows())
        throw DataError("prediction and ground truth have different point counts");
    return (a - b).rowwise().norm().sum() * 1000.0;
}

}  // namespace

double mpve(std::span<const Points3> pred, std::span<const Points3> gt, const std::vector<bool>& visible)
{
    if (pred.size() != gt.size() || pred.size() != visible.size())
        throw DataError("mpve: prediction, ground truth and visibility sizes differ");
    double sum = 0.0;
    long count = 0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!visible[p])
            continue;
        sum += distance_sum_mm(pred[p], gt[p]);
        count += pred[p].rows();
    }
    if (count == 0)
        throw DataError("mpve: no visible vertices to compare");
    return sum / static_cast<double>(count);
}

double mpjpe(const Points3& pred, const Points3& gt, const std::vector<bool>& counted)
{
    if (pred.rows() != gt.rows() || static_cast<std::size_t>(pred.rows()) != counted.size())
        throw DataError("mpjpe: prediction, ground truth and mask sizes differ");
    double sum = 0.0;
    long count = 0;
    for (Eigen::Index j = 0; j < pred.rows(); ++j) {
        if (!counted[j])
            continue;
        sum += (pred.row(j) - gt.row(j)).norm() * 1000.0;
        ++count;
    }
    if (count == 0)
        throw DataError("mpjpe: no joints to compare");
    return sum / static_cast<double>(count);
}

std::vector<bool> counted_joints(const std::vector<bool>& visible_parts)
{
    if (visible_parts.size() != static_cast<std::size_t>(kPartCount))
        throw DataError("visibility must cover all " + std::to_string(kPartCount) + " parts");
    std::vector<bool> out(kJointCount, false);
    for (int p = 0; p < kPartCount; ++p) {
        if (!visible_parts[p])
            continue;
        for (int j : part_joints(p))
            out[j] = true;
    }
    return out;
}

Points3 merge_part_joints(std::span<const Points3> part_joints_in, const std::vector<bool>& visible_parts)
{
    if (part_joints_in.size() != static_cast<std::size_t>(kPartCount) || visible_parts.size() != part_joints_in.size())
        throw DataError("per-part joints must cover all " + std::to_string(kPartCount) + " parts");
    Points3 sum = Points3::Zero(kJointCount, 3);
    std::vector<int> n(kJointCount, 0);
    for (int p = 0; p < kPartCount; ++p) {
        if (!visible_parts[p])
            continue;
        const auto ids = part_joints(p);
        if (part_joints_in[p].rows() != static_cast<Eigen::Index>(ids.size()))
            throw DataError("part " + std::string(kPartNames[p]) + " has the wrong number of joints");
        for (std::size_t i = 0; i < ids.size(); ++i) {
            sum.row(ids[i]) += part_joints_in[p].row(static_cast<Eigen::Index>(i));
            ++n[ids[i]];
        }
    }
    for (int j = 0; j < kJointCount; ++j) {
        if (n[j] > 1)
            sum.row(j) /= static_cast<double>(n[j]);
    }
    return sum;
}

void accumulate_metrics(MetricsReport& report, std::span<const Points3> pred_parts, std::span<const Points3> gt_parts,
                        std::span<const Points3> pred_part_joints, std::span<const Points3> gt_part_joints,
                        const std::vector<bool>& visible)
{
    if (pred_parts.size() != static_cast<std::size_t>(kPartCount) || gt_parts.size() != pred_parts.size() ||
        visible.size() != pred_parts.size())
        throw DataError("metrics need predictions, ground truth and visibility for every part");
    if (pred_part_joints.size() != pred_parts.size() || gt_part_joints.size() != pred_parts.size())
        throw DataError("metrics need predicted and ground-truth joints for every part");
    if (report.per_part.empty()) {
        for (int p = 0; p < kPartCount; ++p)
            report.per_part.push_back({p});
    }
    for (int p = 0; p < kPartCount; ++p) {
        if (!visible[p])
            continue;
        const double s = distance_sum_mm(pred_parts[p], gt_parts[p]);
        report.vertex_error_sum_mm += s;
        report.vertex_count += pred_parts[p].rows();
        auto& pm = report.per_part[p];
        pm.vertex_error_sum_mm += s;
        pm.vertex_count += pred_parts[p].rows();
        pm.joint_error_sum_mm += distance_sum_mm(pred_part_joints[p], gt_part_joints[p]);
        pm.joint_count += pred_part_joints[p].rows();
    }
    const auto counted = counted_joints(visible);
    const Points3 merged = merge_part_joints(pred_part_joints, visible);
    const Points3 gt_joints = merge_part_joints(gt_part_joints, visible);
    for (int j = 0; j < kJointCount; ++j) {
        if (!counted[j])
            continue;
        report.joint_error_sum_mm += (merged.row(j) - gt_joints.row(j)).norm() * 1000.0;
        ++report.joint_count;
    }
    ++report.sample_count;
}

}  // namespace hppm
