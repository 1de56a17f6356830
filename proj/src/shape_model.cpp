#include "hppm/shape_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "hppm/error.hpp"

namespace hppm {

void TrainingConfig::validate() const
{
    if (!(max_error_mm > 0.0))
        throw ConfigError("training max_error_mm must be > 0");
    if (k_min < 1 || k_max < k_min)
        throw ConfigError("training needs 1 <= k_min <= k_max");
}

PartTransform PartState::transform() const
{
    PartTransform t;
    t.rotation = rot6d_to_matrix(rotation);
    t.translation = translation;
    return t;
}

namespace {

void check_pairs(std::span<const Points3> vertices, std::span<const Points3> joints)
{
    if (vertices.empty())
        throw DataError("no training samples");
    if (vertices.size() != joints.size())
        throw DataError("vertex and joint sample counts differ");
    for (std::size_t s = 0; s < vertices.size(); ++s) {
        if (vertices[s].rows() != vertices[0].rows())
            throw DataError("inconsistent vertex counts across samples");
        if (joints[s].rows() != joints[0].rows())
            throw DataError("inconsistent joint counts across samples");
    }
}

}  // namespace

JointRegressor train_joint_regressor(int part_id, std::span<const Points3> part_vertices,
                                     std::span<const Points3> joints,
                                     std::vector<std::string> joint_names,
                                     const RegressorOptions& options)
{
    check_pairs(part_vertices, joints);
    const Eigen::Index nj = joints[0].rows();
    const Eigen::Index nv = part_vertices[0].rows();
    if (nj == 0)
        throw DataError("part " + std::to_string(part_id) + " has no joints to regress");
    if (!joint_names.empty() && static_cast<Eigen::Index>(joint_names.size()) != nj)
        throw DataError("joint name count does not match joint rows");

    // R * G = B, with G = sum V V^T + ridge I + w 1 1^T and B = sum J V^T + w 1 1^T.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, nj);
    for (std::size_t s = 0; s < part_vertices.size(); ++s) {
        gram.selfadjointView<Eigen::Lower>().rankUpdate(part_vertices[s]);
        rhs.noalias() += part_vertices[s] * joints[s].transpose();
    }
    gram.diagonal().array() += options.ridge;
    gram.array() += options.row_sum_weight;
    rhs.array() += options.row_sum_weight;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram.selfadjointView<Eigen::Lower>());
    if (ldlt.info() != Eigen::Success)
        throw NumericError("joint regressor normal equations failed");
    JointRegressor reg;
    reg.part_id = part_id;
    reg.joint_names = std::move(joint_names);
    reg.matrix = ldlt.solve(rhs).transpose();
    if (!reg.matrix.allFinite())
        throw NumericError("joint regressor is not finite");
    return reg;
}

double regressor_objective(const Eigen::MatrixXd& matrix, std::span<const Points3> part_vertices,
                           std::span<const Points3> joints, const RegressorOptions& options)
{
    double total = 0.0;
    for (std::size_t s = 0; s < part_vertices.size(); ++s)
        total += (joints[s] - matrix * part_vertices[s]).squaredNorm();
    total += options.ridge * matrix.squaredNorm();
    total += options.row_sum_weight * (matrix.rowwise().sum().array() - 1.0).square().sum();
    return total;
}

Points3 regress_joints(const JointRegressor& reg, const Points3& part_vertices)
{
    if (part_vertices.rows() != reg.vertex_count())
        throw DataError("regressor expects " + std::to_string(reg.vertex_count()) + " vertices, got " +
                        std::to_string(part_vertices.rows()));
    return reg.matrix * part_vertices;
}

namespace {

struct PcaBasis {
    Eigen::MatrixXd basis;  // orthonormal, decreasing variance
    int rank = 0;
};

// Principal directions of the centered data (columns are samples). Variance
// below the rounding level of coordinates of size `scale` counts as zero.
PcaBasis principal_directions(const Eigen::MatrixXd& centered, double scale)
{
    const Eigen::Index n = centered.rows();
    const Eigen::Index m = centered.cols();
    PcaBasis out;
    Eigen::MatrixXd dirs;
    Eigen::VectorXd eig;
    if (m < n) {
        // Gram trick: eigenvectors of X^T X lifted through X.
        const Eigen::MatrixXd gram = centered.transpose() * centered;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success)
            throw NumericError("PCA eigendecomposition failed");
        eig = es.eigenvalues().reverse();
        dirs = centered * es.eigenvectors().rowwise().reverse();
    } else {
        const Eigen::MatrixXd cov = centered * centered.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success)
            throw NumericError("PCA eigendecomposition failed");
        eig = es.eigenvalues().reverse();
        dirs = es.eigenvectors().rowwise().reverse();
    }
    const double top = eig.size() > 0 ? eig(0) : 0.0;
    int rank = 0;
    const double noise = static_cast<double>(n * m) * std::pow(64.0 * std::numeric_limits<double>::epsilon() * scale, 2);
    if (top > std::max(noise, 1e-300)) {
        while (rank < eig.size() && eig(rank) > 1e-12 * top)
            ++rank;
    }
    out.rank = rank;
    if (rank == 0) {
        out.basis = Eigen::MatrixXd(n, 0);
        return out;
    }
    Eigen::MatrixXd cols = dirs.leftCols(rank);
    for (int c = 0; c < rank; ++c)
        cols.col(c).normalize();
    // Re-orthonormalize; the lifted Gram vectors lose orthogonality for small
    // eigenvalues.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
    for (int c = 0; c < rank; ++c) {
        if (q.col(c).dot(cols.col(c)) < 0.0)
            q.col(c) = -q.col(c);
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index imax = 0;
        q.col(c).cwiseAbs().maxCoeff(&imax);
        if (q(imax, c) < 0.0)
            q.col(c) = -q.col(c);
    }
    out.basis = std::move(q);
    return out;
}

double mean_point_error(const Eigen::MatrixXd& residual)
{
    // residual: 3N x m, interleaved per column.
    double sum = 0.0;
    const Eigen::Index npts = residual.rows() / 3;
    for (Eigen::Index s = 0; s < residual.cols(); ++s) {
        for (Eigen::Index i = 0; i < npts; ++i)
            sum += residual.block<3, 1>(3 * i, s).norm();
    }
    return npts == 0 || residual.cols() == 0 ? 0.0 : sum / static_cast<double>(npts * residual.cols());
}

// |J| x 3 joint offsets produced by a flattened vertex displacement.
Eigen::MatrixXd regress_flat(const Eigen::MatrixXd& reg, const Eigen::Ref<const Eigen::VectorXd>& flat)
{
    const Eigen::Map<const Points3> pts(flat.data(), flat.size() / 3, 3);
    return reg * pts;
}

}  // namespace

PartShapeModel train_part_pca(int part_id, std::span<const Points3> samples,
                              const JointRegressor& regressor, std::span<const Points3> gt_joints,
                              const TrainingConfig& cfg)
{
    cfg.validate();
    check_pairs(samples, gt_joints);
    if (samples.size() < 2)
        throw DataError("PCA needs at least 2 samples");
    const Eigen::Index npts = samples[0].rows();
    const Eigen::Index n = 3 * npts;
    const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
    if (regressor.vertex_count() != npts || gt_joints[0].rows() != regressor.joint_count())
        throw DataError("joint regressor does not match the part samples");

    Eigen::MatrixXd data(n, m);
    for (Eigen::Index s = 0; s < m; ++s)
        data.col(s) = flatten(samples[s]);
    PartShapeModel model;
    model.part_id = part_id;
    model.mean = data.rowwise().mean();
    Eigen::MatrixXd residual = data.colwise() - model.mean;

    const PcaBasis pca = principal_directions(residual, data.cwiseAbs().maxCoeff());
    TrainingReport& rep = model.report;
    rep.rank = pca.rank;
    const int k_cap = std::min<int>({cfg.k_max, static_cast<int>(n), pca.rank});
    const int k_lo = std::min(cfg.k_min, k_cap);
    rep.rank_clamped = pca.rank < cfg.k_min;

    // Joint residual of each sample: regress(recon) - gt, tracked as the
    // reconstruction residual shrinks.
    const Eigen::MatrixXd& R = regressor.matrix;
    std::vector<Eigen::MatrixXd> joint_res(m);
    for (Eigen::Index s = 0; s < m; ++s)
        joint_res[s] = regress_flat(R, data.col(s)) - gt_joints[s] - regress_flat(R, residual.col(s));
    auto mean_joint_error = [&] {
        double sum = 0.0;
        long count = 0;
        for (const auto& jr : joint_res) {
            sum += jr.rowwise().norm().sum();
            count += jr.rows();
        }
        return count == 0 ? 0.0 : sum / static_cast<double>(count);
    };

    const Eigen::MatrixXd coeffs = pca.basis.leftCols(k_cap).transpose() * residual;
    rep.vertex_error_curve_mm.push_back(mean_point_error(residual) * 1000.0);
    rep.joint_error_curve_mm.push_back(mean_joint_error() * 1000.0);
    for (int k = 1; k <= k_cap; ++k) {
        const auto u = pca.basis.col(k - 1);
        residual.noalias() -= u * coeffs.row(k - 1);
        const Eigen::MatrixXd ju = regress_flat(R, u);
        for (Eigen::Index s = 0; s < m; ++s)
            joint_res[s] += ju * coeffs(k - 1, s);
        rep.vertex_error_curve_mm.push_back(mean_point_error(residual) * 1000.0);
        rep.joint_error_curve_mm.push_back(mean_joint_error() * 1000.0);
    }

    int chosen = -1;
    for (int k = k_lo; k <= k_cap; ++k) {
        if (rep.vertex_error_curve_mm[k] <= cfg.max_error_mm && rep.joint_error_curve_mm[k] <= cfg.max_error_mm) {
            chosen = k;
            break;
        }
    }
    if (chosen < 0) {
        chosen = k_cap;
        rep.budget_violated = true;
    }
    rep.vertex_error_mm = rep.vertex_error_curve_mm[chosen];
    rep.joint_error_mm = rep.joint_error_curve_mm[chosen];
    model.basis = pca.basis.leftCols(chosen);
    return model;
}

std::pair<double, double> reconstruction_errors_mm(const PartShapeModel& model, int k,
                                                   std::span<const Points3> samples,
                                                   const JointRegressor& regressor,
                                                   std::span<const Points3> gt_joints)
{
    if (k < 0 || k > model.k())
        throw DataError("k outside the model basis");
    const auto U = model.basis.leftCols(k);
    double vsum = 0.0, jsum = 0.0;
    long vcount = 0, jcount = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const Eigen::VectorXd x = flatten(samples[s]);
        const Eigen::VectorXd recon = model.mean + U * (U.transpose() * (x - model.mean));
        const Points3 rp = unflatten(recon);
        vsum += (rp - samples[s]).rowwise().norm().sum();
        vcount += rp.rows();
        const Points3 j = regress_joints(regressor, rp);
        jsum += (j - gt_joints[s]).rowwise().norm().sum();
        jcount += j.rows();
    }
    return {vcount ? vsum / vcount * 1000.0 : 0.0, jcount ? jsum / jcount * 1000.0 : 0.0};
}

Eigen::VectorXd encode_shape(const PartShapeModel& model, const Points3& canonical_vertices)
{
    if (3 * canonical_vertices.rows() != model.mean.size())
        throw DataError("encode_shape: expected " + std::to_string(model.vertex_count()) +
                        " vertices, got " + std::to_string(canonical_vertices.rows()));
    return model.basis.transpose() * (flatten(canonical_vertices) - model.mean);
}

Points3 decode_canonical(const PartShapeModel& model, const Eigen::VectorXd& shape)
{
    if (shape.size() != model.k())
        throw DataError("shape parameter length " + std::to_string(shape.size()) + " does not match k=" +
                        std::to_string(model.k()));
    return unflatten(model.mean + model.basis * shape);
}

Points3 decode_part(const PartShapeModel& model, const PartState& state)
{
    return apply_transform(state.transform(), decode_canonical(model, state.shape));
}

}  // namespace hppm
