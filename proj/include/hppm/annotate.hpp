#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hppm/geom.hpp"
#include "hppm/model.hpp"
#include "hppm/shape_model.hpp"

namespace hppm {

enum class FitMode { Affine, Rigid };

/// How a fitted transform maps ground truth into canonical space.
enum class CanonicalMap {
    Inverse,    // true inverse of the fitted transform (default)
    Transpose,  // A^T (v - t); equals Inverse when the fit is rigid
};

struct FitResult {
    PartTransform transform;
    double rms_residual = 0.0;  // meters
};

/// Least-squares transform taking `v0` onto `v_gt` (same vertex order).
/// Rigid uses centroid-aligned SVD with reflection correction; affine solves
/// the normal equations. Throws NumericError on degenerate configurations.
FitResult fit_global_transform(const Points3& v_gt, const Points3& v0, FitMode mode);

Points3 to_canonical(const PartTransform& fit, const Points3& world, CanonicalMap map);

struct PartFitReport {
    int part_id = 0;
    double vertex_error_mm = 0.0;
    double joint_error_mm = 0.0;
    double fit_residual_mm = 0.0;
};

struct SampleAnnotation {
    std::string sample_id;
    CameraIntrinsics camera;
    std::vector<PartState> parts;
    std::vector<PartFitReport> fit_report;
};

struct AnnotateOptions {
    FitMode mode = FitMode::Rigid;
    CanonicalMap canonical = CanonicalMap::Inverse;
};

/// Per-part transform + shape parameters for a whole-body ground-truth mesh.
/// `gt_joints` (kJointCount x 3) feeds the joint recovery error; without it the
/// joints regressed from the ground-truth slice are used.
SampleAnnotation annotate_sample(const HppmModel& model, const Mesh& body_gt,
                                 const CameraIntrinsics& cam, const AnnotateOptions& options = {},
                                 const std::optional<Points3>& gt_joints = std::nullopt,
                                 std::string sample_id = {});

struct PartRecovery {
    int part_id = 0;
    double vertex_error_mm = 0.0;
    double joint_error_mm = 0.0;
};

/// Mean l2 distance between decoded parts (and their joints) and ground truth.
std::vector<PartRecovery> recovery_report(const SampleAnnotation& annotation, const Mesh& body_gt,
                                          const HppmModel& model,
                                          const std::optional<Points3>& gt_joints = std::nullopt);

/// Ground-truth joints a part's regressor should reproduce: rows of `gt_joints`
/// for the part's joints, or the regressor applied to the slice.
Points3 part_gt_joints(const HppmModel& model, int part_id, const Points3& slice,
                       const std::optional<Points3>& gt_joints);

}  // namespace hppm
