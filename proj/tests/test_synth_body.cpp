#include <doctest.h>

#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"
#include "hppm/synth_body.hpp"
#include "support.hpp"

using namespace hppm;
using namespace hppm::test;

namespace {

// Forward kinematics by walking the chain: each bone head is placed by its
// parent's world rotation applied to the rest offset between the heads.
struct Fk {
    std::vector<Mat3> world;
    std::vector<Vec3> placed;
};

Fk forward_kinematics(const SynthBody& body, const BodyShape& shape, const BodyPose& pose)
{
    const auto& bones = body.spec().bones;
    const auto heads = body.shaped_heads(shape);
    Fk fk;
    for (std::size_t b = 0; b < bones.size(); ++b) {
        const int p = bones[b].parent;
        if (p < 0) {
            fk.world.push_back(pose.local_rotation[b]);
            fk.placed.push_back(heads[b]);
        } else {
            fk.world.push_back(fk.world[p] * pose.local_rotation[b]);
            fk.placed.push_back(fk.placed[p] + fk.world[p] * (heads[b] - heads[p]));
        }
    }
    return fk;
}

}  // namespace

TEST_CASE("default body shape")
{
    const auto& body = default_body();
    CHECK(body.spec().bone_count() == 23);
    CHECK(static_cast<int>(body.spec().joints.size()) == kJointCount);
    for (int j = 0; j < kJointCount; ++j)
        CHECK(body.spec().joints[j].name == kJointNames[j]);
    CHECK_NOTHROW(body.template_mesh().validate());
    CHECK_NOTHROW(body.weights().validate());
    CHECK(body.weights().bone_count() == 23);
    CHECK(body.weights().vertex_count() == body.template_mesh().vertex_count());
    CHECK((body.weights().weights.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(body.weights().weights.minCoeff() >= 0.0);
}

TEST_CASE("rest pose reproduces the template")
{
    const auto& body = default_body();
    const SynthSample s = synth_body(body.spec());
    // Skinning sums weighted copies, so agreement is to rounding.
    CHECK((s.mesh.vertices - body.template_mesh().vertices).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.mesh.faces == body.template_mesh().faces);
    CHECK((s.joints - body.template_joints()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampling is deterministic in the seed")
{
    const auto& body = default_body();
    const SynthSample a = synth_body(body.spec(), 17);
    const SynthSample b = synth_body(body.spec(), 17);
    const SynthSample c = synth_body(body.spec(), 18);
    CHECK(a.mesh.vertices == b.mesh.vertices);
    CHECK(a.joints == b.joints);
    CHECK(a.mesh.vertices != c.mesh.vertices);
    CHECK(mix_seed(3, 4) == mix_seed(3, 4));
    CHECK(mix_seed(3, 4) != mix_seed(4, 3));
}

TEST_CASE("joints follow an independent forward-kinematics oracle")
{
    const auto& body = default_body();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const BodyShape shape = body.sample_shape(seed);
        const BodyPose pose = body.sample_pose(seed);
        const SynthSample s = body.instance(shape, pose);
        const Fk fk = forward_kinematics(body, shape, pose);
        const Points3 rest_joints = body.shaped_joints(shape);
        const auto heads = body.shaped_heads(shape);
        for (int j = 0; j < kJointCount; ++j) {
            const int b = body.spec().joints[j].bone;
            const Vec3 local = rest_joints.row(j).transpose() - heads[b];
            const Vec3 oracle = apply_transform(pose.global, Vec3(fk.placed[b] + fk.world[b] * local));
            CHECK((s.joints.row(j).transpose() - oracle).norm() < 1e-12);
        }
        // Vertices fully owned by one bone move rigidly with it.
        const Points3 rest = body.shaped_vertices(shape);
        const auto& w = body.weights().weights;
        int checked = 0;
        for (int i = 0; i < rest.rows(); i += 7) {
            Eigen::Index b = 0;
            if (w.row(i).maxCoeff(&b) < 1.0)
                continue;
            const Vec3 oracle = apply_transform(
                pose.global, Vec3(fk.placed[b] + fk.world[b] * (rest.row(i).transpose() - heads[b])));
            CHECK((s.mesh.vertices.row(i).transpose() - oracle).norm() < 1e-12);
            ++checked;
        }
        CHECK(checked > 50);
    }
}

TEST_CASE("posed bodies sit in front of the camera")
{
    const auto& body = default_body();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SynthSample s = synth_body(body.spec(), seed);
        CHECK(s.mesh.vertices.col(2).minCoeff() > 1.0);
        CHECK_NOTHROW(project(CameraIntrinsics{}, s.mesh.vertices));
    }
}

TEST_CASE("shape factors stay in their ranges")
{
    const auto& body = default_body();
    const auto& spec = body.spec();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const BodyShape shape = body.sample_shape(seed);
        for (int b = 0; b < spec.bone_count(); ++b) {
            CHECK(shape.length_scale[b] >= spec.length_scale_min * spec.limb_scale_min - 1e-12);
            CHECK(shape.length_scale[b] <= spec.length_scale_max * spec.limb_scale_max + 1e-12);
            CHECK(shape.radius_scale[b] >= spec.radius_scale_min * spec.limb_scale_min - 1e-12);
            CHECK(shape.radius_scale[b] <= spec.radius_scale_max * spec.limb_scale_max + 1e-12);
        }
    }
}

TEST_CASE("spec validation")
{
    SynthBodySpec spec = default_body_spec();
    spec.bones.resize(1);
    CHECK_THROWS_AS(spec.validate(), DataError);
    spec = default_body_spec();
    spec.bones[3].angle_limit = 4.0;
    CHECK_THROWS_AS(spec.validate(), DataError);
    spec = default_body_spec();
    spec.bones[2].parent = 5;
    CHECK_THROWS_AS(spec.validate(), DataError);
}
