#include "hppm/model.hpp"

#include <string>

#include "hppm/annotate.hpp"
#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"

namespace hppm {

void HppmModel::validate() const
{
    templates.validate();
    const auto n = static_cast<std::size_t>(part_count());
    if (shapes.size() != n || regressors.size() != n || part_joint_ids.size() != n)
        throw DataError("model part tables have inconsistent sizes");
    for (int p = 0; p < part_count(); ++p) {
        const auto& t = templates.parts[p];
        if (shapes[p].vertex_count() != t.vertex_count() || shapes[p].basis.rows() != 3 * t.vertex_count())
            throw DataError("shape model of part " + t.name + " does not match its template");
        if (regressors[p].vertex_count() != t.vertex_count() ||
            regressors[p].joint_count() != static_cast<int>(part_joint_ids[p].size()))
            throw DataError("joint regressor of part " + t.name + " does not match its template");
    }
}

Points3 slice_part(const HppmTemplateSet& templates, int part_id, const Points3& body_vertices)
{
    const auto& part = templates.part(part_id);
    if (body_vertices.rows() != templates.body.vertex_count())
        throw DataError("body has " + std::to_string(body_vertices.rows()) + " vertices, template has " +
                        std::to_string(templates.body.vertex_count()));
    Points3 out(part.vertex_count(), 3);
    for (int i = 0; i < part.vertex_count(); ++i)
        out.row(i) = body_vertices.row(part.global_ids[i]);
    return out;
}

Points3 select_joints(const Points3& joints, const std::vector<int>& ids)
{
    Points3 out(static_cast<Eigen::Index>(ids.size()), 3);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] < 0 || ids[r] >= joints.rows())
            throw DataError("joint index out of range");
        out.row(static_cast<Eigen::Index>(r)) = joints.row(ids[r]);
    }
    return out;
}

HppmModel train_model(const HppmTemplateSet& templates, const MergeMap& merge_map,
                      const TrainingData& data, const TrainingConfig& cfg)
{
    cfg.validate();
    if (data.bodies.size() < 2)
        throw DataError("training needs at least 2 meshes");
    if (data.joints.size() != data.bodies.size())
        throw DataError("training needs one joint table per mesh");
    for (const auto& j : data.joints) {
        if (j.rows() != kJointCount)
            throw DataError("training joints must have " + std::to_string(kJointCount) + " rows");
    }
    if (cfg.regressor_mode == RegressorMode::Template && !data.template_joints)
        throw DataError("template regressor mode needs template joints");

    HppmModel model;
    model.templates = templates;
    model.merge_map = merge_map;
    model.training = cfg;
    for (int p = 0; p < templates.part_count(); ++p) {
        const auto& part = templates.parts[p];
        const std::vector<int> jids = part_joints(part_index(part.name));
        std::vector<std::string> jnames;
        for (int j : jids)
            jnames.emplace_back(kJointNames[j]);

        std::vector<Points3> canon(data.bodies.size());
        std::vector<Points3> canon_joints(data.bodies.size());
        for (std::size_t s = 0; s < data.bodies.size(); ++s) {
            const Points3 slice = slice_part(templates, p, data.bodies[s].vertices);
            const FitResult fit = fit_global_transform(slice, part.template_vertices, FitMode::Rigid);
            const PartTransform inv = fit.transform.inverse();
            canon[s] = apply_transform(inv, slice);
            canon_joints[s] = apply_transform(inv, select_joints(data.joints[s], jids));
        }

        JointRegressor reg;
        if (cfg.regressor_mode == RegressorMode::PerSample) {
            reg = train_joint_regressor(p, canon, canon_joints, jnames);
        } else {
            const Points3 tj = select_joints(*data.template_joints, jids);
            reg = train_joint_regressor(p, std::span<const Points3>(&part.template_vertices, 1),
                                        std::span<const Points3>(&tj, 1), jnames);
        }
        model.shapes.push_back(train_part_pca(p, canon, reg, canon_joints, cfg));
        model.regressors.push_back(std::move(reg));
        model.part_joint_ids.push_back(jids);
    }
    return model;
}

}  // namespace hppm
