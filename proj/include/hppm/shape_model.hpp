#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hppm/geom.hpp"

namespace hppm {

enum class RegressorMode {
    PerSample,  // fit against every training sample (default)
    Template,   // fit against the template mesh only
};

struct TrainingConfig {
    double max_error_mm = 2.0;  // vertex and joint budget
    int k_min = 16;
    int k_max = 100;
    RegressorMode regressor_mode = RegressorMode::PerSample;

    void validate() const;
};

struct TrainingReport {
    double vertex_error_mm = 0.0;
    double joint_error_mm = 0.0;
    int rank = 0;                 // numerical rank of the centered data
    bool budget_violated = false; // no k <= k_max met the budget
    bool rank_clamped = false;    // rank < k_min
    std::vector<double> vertex_error_curve_mm;  // index k = 0..k_max_effective
    std::vector<double> joint_error_curve_mm;
};

/// Linear part model: canonical shape = mean + basis * S.
struct PartShapeModel {
    int part_id = 0;
    Eigen::MatrixXd basis;  // 3N_p x k, orthonormal columns
    Eigen::VectorXd mean;   // 3N_p, interleaved xyz
    TrainingReport report;

    int k() const { return static_cast<int>(basis.cols()); }
    int vertex_count() const { return static_cast<int>(mean.size() / 3); }
};

struct JointRegressor {
    int part_id = 0;
    std::vector<std::string> joint_names;
    Eigen::MatrixXd matrix;  // |J_p| x N_p

    int joint_count() const { return static_cast<int>(matrix.rows()); }
    int vertex_count() const { return static_cast<int>(matrix.cols()); }
};

struct PartState {
    int part_id = 0;
    Eigen::VectorXd shape;
    Rotation6D rotation;
    Vec3 translation = Vec3::Zero();
    bool visible = true;

    PartTransform transform() const;
};

struct RegressorOptions {
    double ridge = 1e-8;
    double row_sum_weight = 1e-3;  // soft pull of each row sum toward 1
};

/// Least squares joint regressor over paired (vertices, joints) samples.
/// Minimizes sum_s ||J_s - R V_s||_F^2 + ridge ||R||_F^2 + w sum_r (1^T r - 1)^2.
JointRegressor train_joint_regressor(int part_id, std::span<const Points3> part_vertices,
                                     std::span<const Points3> joints,
                                     std::vector<std::string> joint_names,
                                     const RegressorOptions& options = {});

/// Objective minimized by train_joint_regressor, for optimality checks.
double regressor_objective(const Eigen::MatrixXd& matrix, std::span<const Points3> part_vertices,
                           std::span<const Points3> joints, const RegressorOptions& options = {});

Points3 regress_joints(const JointRegressor& reg, const Points3& part_vertices);

/// PCA with the smallest k in [k_min, k_max] meeting both error budgets.
/// Samples must already be in the part's canonical frame.
PartShapeModel train_part_pca(int part_id, std::span<const Points3> samples,
                              const JointRegressor& regressor, std::span<const Points3> gt_joints,
                              const TrainingConfig& cfg);

/// Mean vertex and joint errors (mm) of reconstructing the samples with the
/// first k basis columns of `model`.
std::pair<double, double> reconstruction_errors_mm(const PartShapeModel& model, int k,
                                                   std::span<const Points3> samples,
                                                   const JointRegressor& regressor,
                                                   std::span<const Points3> gt_joints);

/// S = U^T (flatten(v) - mean).
Eigen::VectorXd encode_shape(const PartShapeModel& model, const Points3& canonical_vertices);
Points3 decode_canonical(const PartShapeModel& model, const Eigen::VectorXd& shape);
/// Canonical shape mapped by the state's rotation and translation.
Points3 decode_part(const PartShapeModel& model, const PartState& state);

}  // namespace hppm
