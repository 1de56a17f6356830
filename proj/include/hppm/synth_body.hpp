#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hppm/geom.hpp"
#include "hppm/part_template.hpp"

namespace hppm {

/// Body region of a bone; shape factors are shared within a region.
enum class BoneGroup { Torso, Head, Arm, Leg };

/// One tube of the synthetic body. Rest positions are in meters, y up.
struct BoneSpec {
    std::string name;
    int parent = -1;
    Vec3 head = Vec3::Zero();
    Vec3 tail = Vec3::Zero();
    double radius_head = 0.05;
    double radius_tail = 0.05;
    int rings = 6;
    double angle_limit = 0.4;  // max local rotation, radians
    BoneGroup group = BoneGroup::Torso;
};

/// A joint rigidly attached to a bone, in the bone's local frame:
/// head + t * length * axis + radius(t) * (radial_u * u + radial_w * w).
struct SynthJointSpec {
    std::string name;
    int bone = 0;
    double t = 0.0;
    double radial_u = 0.0;
    double radial_w = 0.0;
};

struct SynthBodySpec {
    std::uint64_t seed = 7;
    std::vector<BoneSpec> bones;
    std::vector<SynthJointSpec> joints;
    int ring_segments = 12;
    // Shapes come from five factors: stature (all lengths), girth (all radii),
    // arm length, leg length and torso girth.
    double length_scale_min = 0.92;
    double length_scale_max = 1.08;
    double radius_scale_min = 0.88;
    double radius_scale_max = 1.12;
    double limb_scale_min = 0.95;  // arm length, leg length, torso girth
    double limb_scale_max = 1.05;
    double pose_scale = 1.0;       // multiplies every angle_limit
    double yaw_limit = 0.6;        // global rotation about the vertical axis
    double depth_min = 2.6;        // camera distance of the body center
    double depth_max = 3.4;
    double lateral_limit = 0.3;    // horizontal/vertical placement offset

    int bone_count() const { return static_cast<int>(bones.size()); }
    void validate() const;
};

/// 23-bone humanoid with the 17 evaluation joints.
SynthBodySpec default_body_spec();
/// Merge map of the default humanoid onto the 15 model parts.
MergeMap default_merge_map(const SynthBodySpec& spec);

struct BodyShape {
    std::vector<double> length_scale;  // per bone
    std::vector<double> radius_scale;
};

struct BodyPose {
    std::vector<Mat3> local_rotation;  // per bone, about its head, rest axes
    PartTransform global;              // applied after skinning
};

struct SynthSample {
    Mesh mesh;
    BlendWeights weights;
    Points3 joints;  // spec.joints order
};

/// Deterministic articulated tube body. The rest mesh is built once; posed
/// instances come from linear blend skinning of a per-sample shaped rest mesh.
class SynthBody {
public:
    explicit SynthBody(SynthBodySpec spec);

    const SynthBodySpec& spec() const { return spec_; }
    const Mesh& template_mesh() const { return template_; }
    const BlendWeights& weights() const { return weights_; }
    Points3 template_joints() const;

    BodyShape neutral_shape() const;
    BodyPose rest_pose() const;
    BodyShape sample_shape(std::uint64_t seed) const;
    BodyPose sample_pose(std::uint64_t seed) const;

    /// Rest mesh vertices and joints for a shape.
    Points3 shaped_vertices(const BodyShape& shape) const;
    Points3 shaped_joints(const BodyShape& shape) const;
    /// Shaped bone heads (rest), per bone.
    std::vector<Vec3> shaped_heads(const BodyShape& shape) const;

    /// Per-bone skinning transforms for a shape and pose.
    std::vector<PartTransform> skinning_transforms(const BodyShape& shape, const BodyPose& pose) const;

    SynthSample instance(const BodyShape& shape, const BodyPose& pose) const;

private:
    // Rest point of bone `bone` mapped by that bone's shape scaling.
    Vec3 shape_point(const BodyShape& shape, const std::vector<Vec3>& heads, int bone, const Vec3& rest) const;
    Vec3 rest_joint(const SynthJointSpec& j) const;

    SynthBodySpec spec_;
    std::vector<Vec3> axis_, frame_u_, frame_w_;
    std::vector<double> length_;
    std::vector<int> vertex_bone_;  // bone whose tube emitted each vertex
    Mesh template_;
    BlendWeights weights_;
};

/// Template (no pose seed) or a seeded random shape + pose instance.
SynthSample synth_body(const SynthBodySpec& spec, std::optional<std::uint64_t> pose_seed = std::nullopt);

/// splitmix64 mixing of a base seed and a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace hppm
