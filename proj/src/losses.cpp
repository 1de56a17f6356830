#include "hppm/losses.hpp"

#include <cmath>

#include "hppm/error.hpp"

namespace hppm {

void LossWeights::validate() const
{
    for (double w : {vertex, joint3d, joint2d, shape, rotation, translation, overlap, depth}) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError("loss weights must be finite and >= 0");
    }
}

namespace {

void check_sizes(std::size_t a, std::size_t b, const Visibility& vis, const char* what)
{
    if (a != b || a != vis.size())
        throw DataError(std::string(what) + ": prediction, ground truth and visibility sizes differ");
}

double sum_point_distances(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const Visibility& vis,
                           const char* what)
{
    check_sizes(pred.size(), gt.size(), vis, what);
    double total = 0.0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!vis[p])
            continue;
        if (pred[p].rows() != gt[p].rows())
            throw DataError(std::string(what) + ": shape mismatch in part " + std::to_string(p));
        total += (pred[p] - gt[p]).rowwise().norm().sum();
    }
    return total;
}

}  // namespace

double loss_vertex(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const Visibility& vis)
{
    return sum_point_distances(pred, gt, vis, "loss_vertex");
}

double loss_joint3d(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const Visibility& vis)
{
    return sum_point_distances(pred, gt, vis, "loss_joint3d");
}

double loss_joint2d(const std::vector<Points3>& pred, const std::vector<Points3>& gt, const CameraIntrinsics& cam,
                    const Visibility& vis)
{
    check_sizes(pred.size(), gt.size(), vis, "loss_joint2d");
    double total = 0.0;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!vis[p])
            continue;
        if (pred[p].rows() != gt[p].rows())
            throw DataError("loss_joint2d: shape mismatch in part " + std::to_string(p));
        total += (project(cam, pred[p]) - project(cam, gt[p])).rowwise().norm().sum();
    }
    return total;
}

ParamLosses loss_params(const std::vector<PartState>& pred, const std::vector<PartState>& gt, const Visibility& vis)
{
    check_sizes(pred.size(), gt.size(), vis, "loss_params");
    ParamLosses out;
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!vis[p])
            continue;
        if (pred[p].shape.size() != gt[p].shape.size())
            throw DataError("loss_params: shape parameter dimension mismatch in part " + std::to_string(p));
        out.shape += (pred[p].shape - gt[p].shape).norm();
        out.rotation += (pred[p].rotation.vector() - gt[p].rotation.vector()).norm();
        out.translation += (pred[p].translation - gt[p].translation).norm();
    }
    return out;
}

double loss_overlap(const std::vector<Points3>& parts, const HppmTemplateSet& set, const Visibility& vis,
                    OverlapMean mean)
{
    if (static_cast<int>(parts.size()) != set.part_count() || vis.size() != parts.size())
        throw DataError("loss_overlap: inputs must cover every part");
    double total = 0.0;
    for (const auto& [p, q] : set.neighbors) {
        if (!vis[p] || !vis[q])
            continue;
        const auto& tp = set.parts[p];
        const auto& tq = set.parts[q];
        const auto& shared = tp.overlap.at(q);
        if (mean == OverlapMean::PerVertex) {
            for (int g : shared) {
                const Vec3 a = parts[p].row(tp.local_index(g)).transpose();
                const Vec3 b = parts[q].row(tq.local_index(g)).transpose();
                const Vec3 mid = 0.5 * (a + b);
                total += (a - mid).norm() + (b - mid).norm();
            }
        } else {
            Vec3 centroid = Vec3::Zero();
            for (int g : shared)
                centroid += parts[p].row(tp.local_index(g)).transpose() + parts[q].row(tq.local_index(g)).transpose();
            centroid /= 2.0 * static_cast<double>(shared.size());
            for (int g : shared) {
                total += (parts[p].row(tp.local_index(g)).transpose() - centroid).norm();
                total += (parts[q].row(tq.local_index(g)).transpose() - centroid).norm();
            }
        }
    }
    return total;
}

double loss_depth_consistency(const std::vector<Points3>& parts, const Visibility& vis)
{
    if (vis.size() != parts.size())
        throw DataError("loss_depth_consistency: visibility size mismatch");
    double zsum = 0.0;
    long count = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (!vis[p])
            continue;
        zsum += parts[p].col(2).sum();
        count += parts[p].rows();
    }
    if (count == 0)
        throw DataError("loss_depth_consistency needs at least one visible vertex");
    const double zbar = zsum / static_cast<double>(count);
    double total = 0.0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (vis[p])
            total += (parts[p].col(2).array() - zbar).abs().sum();
    }
    return total;
}

LossBreakdown total_loss(const LossInputs& in, const LossWeights& weights)
{
    weights.validate();
    const std::size_t n = in.pred.size();
    check_sizes(n, in.gt.size(), in.visible, "total_loss");
    std::vector<Points3> pv(n), gv(n), pj(n), gj(n);
    std::vector<PartState> ps(n), gs(n);
    for (std::size_t p = 0; p < n; ++p) {
        pv[p] = in.pred[p].vertices;
        gv[p] = in.gt[p].vertices;
        pj[p] = in.pred[p].joints;
        gj[p] = in.gt[p].joints;
        ps[p] = in.pred[p].state;
        gs[p] = in.gt[p].state;
    }
    LossBreakdown b;
    b.vertex = loss_vertex(pv, gv, in.visible);
    b.joint3d = loss_joint3d(pj, gj, in.visible);
    b.joint2d = loss_joint2d(pj, gj, in.camera, in.visible);
    const ParamLosses params = loss_params(ps, gs, in.visible);
    b.shape = params.shape;
    b.rotation = params.rotation;
    b.translation = params.translation;
    b.overlap = loss_overlap(pv, in.templates, in.visible, in.overlap_mean);
    b.depth = loss_depth_consistency(pv, in.visible);
    b.divide = weights.vertex * b.vertex + weights.joint3d * b.joint3d + weights.joint2d * b.joint2d +
               weights.shape * b.shape + weights.rotation * b.rotation + weights.translation * b.translation;
    b.fusion = weights.overlap * b.overlap + weights.depth * b.depth;
    b.total = b.divide + b.fusion;
    return b;
}

}  // namespace hppm
