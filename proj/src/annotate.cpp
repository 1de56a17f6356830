#include "hppm/annotate.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hppm/error.hpp"

namespace hppm {

FitResult fit_global_transform(const Points3& v_gt, const Points3& v0, FitMode mode)
{
    if (v_gt.rows() != v0.rows())
        throw DataError("fit_global_transform: vertex counts differ");
    const Eigen::Index n = v0.rows();
    const Eigen::Index needed = mode == FitMode::Affine ? 4 : 3;
    if (n < needed)
        throw NumericError("fit_global_transform: too few points");

    const Vec3 c_src = v0.colwise().mean().transpose();
    const Vec3 c_dst = v_gt.colwise().mean().transpose();
    const Points3 src = v0.rowwise() - c_src.transpose();
    const Points3 dst = v_gt.rowwise() - c_dst.transpose();
    const double scale = std::max(src.cwiseAbs().maxCoeff(), 1e-300);

    FitResult out;
    if (mode == FitMode::Rigid) {
        const Mat3 cross = src.transpose() * dst;  // sum src_i dst_i^T
        Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec3 sv = svd.singularValues();
        if (!(sv(0) > 1e-24 * scale * scale) || !(sv(1) > 1e-12 * sv(0)))
            throw NumericError("rigid fit: point configuration is collinear or degenerate");
        Mat3 d = Mat3::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
        out.transform.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    } else {
        const Mat3 gram = src.transpose() * src;
        Eigen::SelfAdjointEigenSolver<Mat3> es(gram);
        if (!(es.eigenvalues()(0) > 1e-12 * es.eigenvalues()(2)))
            throw NumericError("affine fit: point configuration is coplanar or degenerate");
        const Mat3 rhs = src.transpose() * dst;
        out.transform.rotation = gram.ldlt().solve(rhs).transpose();
    }
    out.transform.translation = c_dst - out.transform.rotation * c_src;
    const Points3 moved = apply_transform(out.transform, v0);
    out.rms_residual = std::sqrt((moved - v_gt).squaredNorm() / static_cast<double>(n));
    return out;
}

Points3 to_canonical(const PartTransform& fit, const Points3& world, CanonicalMap map)
{
    if (map == CanonicalMap::Inverse)
        return apply_transform(fit.inverse(), world);
    Points3 shifted = world.rowwise() - fit.translation.transpose();
    return shifted * fit.rotation;  // rows: (A^T (v - t))^T
}

Points3 part_gt_joints(const HppmModel& model, int part_id, const Points3& slice,
                       const std::optional<Points3>& gt_joints)
{
    if (gt_joints)
        return select_joints(*gt_joints, model.part_joint_ids.at(part_id));
    return regress_joints(model.regressors.at(part_id), slice);
}

namespace {

double mean_distance(const Points3& a, const Points3& b)
{
    if (a.rows() == 0)
        return 0.0;
    return (a - b).rowwise().norm().mean();
}

}  // namespace

SampleAnnotation annotate_sample(const HppmModel& model, const Mesh& body_gt, const CameraIntrinsics& cam,
                                 const AnnotateOptions& options, const std::optional<Points3>& gt_joints,
                                 std::string sample_id)
{
    cam.validate();
    SampleAnnotation ann;
    ann.sample_id = std::move(sample_id);
    ann.camera = cam;
    for (int p = 0; p < model.part_count(); ++p) {
        const auto& part = model.templates.parts[p];
        const Points3 slice = slice_part(model.templates, p, body_gt.vertices);
        const FitResult fit = fit_global_transform(slice, part.template_vertices, options.mode);
        const Points3 canon = to_canonical(fit.transform, slice, options.canonical);

        PartState state;
        state.part_id = p;
        state.shape = encode_shape(model.shapes[p], canon);
        state.translation = fit.transform.translation;
        if (options.mode == FitMode::Rigid) {
            state.rotation = matrix_to_rot6d(fit.transform.rotation);
        } else {
            // Annotations store rotations; keep the closest rotation of the affine block.
            Eigen::JacobiSVD<Mat3> svd(fit.transform.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
            Mat3 d = Mat3::Identity();
            d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
            state.rotation = matrix_to_rot6d(svd.matrixU() * d * svd.matrixV().transpose());
        }

        // Recovery check against the fitted transform itself.
        const Points3 recovered = apply_transform(fit.transform, decode_canonical(model.shapes[p], state.shape));
        PartFitReport rep;
        rep.part_id = p;
        rep.vertex_error_mm = mean_distance(recovered, slice) * 1000.0;
        rep.joint_error_mm =
            mean_distance(regress_joints(model.regressors[p], recovered), part_gt_joints(model, p, slice, gt_joints)) *
            1000.0;
        rep.fit_residual_mm = fit.rms_residual * 1000.0;
        ann.parts.push_back(std::move(state));
        ann.fit_report.push_back(rep);
    }
    return ann;
}

std::vector<PartRecovery> recovery_report(const SampleAnnotation& annotation, const Mesh& body_gt,
                                          const HppmModel& model, const std::optional<Points3>& gt_joints)
{
    if (static_cast<int>(annotation.parts.size()) != model.part_count())
        throw DataError("annotation part count does not match the model");
    std::vector<PartRecovery> out;
    for (const auto& state : annotation.parts) {
        const int p = state.part_id;
        const Points3 slice = slice_part(model.templates, p, body_gt.vertices);
        const Points3 decoded = decode_part(model.shapes.at(p), state);
        PartRecovery r;
        r.part_id = p;
        r.vertex_error_mm = mean_distance(decoded, slice) * 1000.0;
        r.joint_error_mm = mean_distance(regress_joints(model.regressors.at(p), decoded),
                                         part_gt_joints(model, p, slice, gt_joints)) *
                           1000.0;
        out.push_back(r);
    }
    return out;
}

}  // namespace hppm
