#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hppm/part_template.hpp"
#include "hppm/shape_model.hpp"

namespace hppm {

/// Templates plus one shape model and joint regressor per part.
struct HppmModel {
    HppmTemplateSet templates;
    MergeMap merge_map;
    TrainingConfig training;
    std::vector<PartShapeModel> shapes;
    std::vector<JointRegressor> regressors;
    std::vector<std::vector<int>> part_joint_ids;  // indices into kJointNames

    int part_count() const { return templates.part_count(); }
    void validate() const;
};

/// Vertices of `body` belonging to part `part_id`, in local order.
Points3 slice_part(const HppmTemplateSet& templates, int part_id, const Points3& body_vertices);

/// Rows of a full joint table selected by `ids`.
Points3 select_joints(const Points3& joints, const std::vector<int>& ids);

struct TrainingData {
    std::span<const Mesh> bodies;
    std::span<const Points3> joints;  // kJointCount x 3 per body
    std::optional<Points3> template_joints;  // required by RegressorMode::Template
};

/// Canonicalizes every part slice with a rigid fit to the part template, then
/// trains the joint regressor and the adaptive-dimension shape model per part.
HppmModel train_model(const HppmTemplateSet& templates, const MergeMap& merge_map,
                      const TrainingData& data, const TrainingConfig& cfg);

}  // namespace hppm
