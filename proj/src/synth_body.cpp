#include "hppm/synth_body.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "hppm/body_parts.hpp"
#include "hppm/error.hpp"

namespace hppm {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    auto splitmix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    };
    return splitmix(seed ^ splitmix(index));
}

namespace {

// Uniform double in [lo, hi) from 53 random bits; identical across platforms.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo, double hi)
    {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 rng_;
};

constexpr double kParentBlend[] = {0.4, 0.25, 0.1};

}  // namespace

void SynthBodySpec::validate() const
{
    if (bones.size() < 2)
        throw DataError("synthetic body needs at least 2 bones");
    if (ring_segments < 3)
        throw DataError("synthetic body needs at least 3 ring segments");
    for (std::size_t b = 0; b < bones.size(); ++b) {
        const auto& bone = bones[b];
        if (bone.parent >= static_cast<int>(b) || (b > 0 && bone.parent < 0) || (b == 0 && bone.parent != -1))
            throw DataError("bone " + bone.name + ": bones must be listed parents first with a single root");
        if (!((bone.tail - bone.head).norm() > 0.0))
            throw DataError("bone " + bone.name + " has zero length");
        if (!(bone.radius_head > 0.0) || !(bone.radius_tail > 0.0) || bone.rings < 2)
            throw DataError("bone " + bone.name + " needs positive radii and >= 2 rings");
        if (!(bone.angle_limit >= 0.0) || !(bone.angle_limit * pose_scale < std::numbers::pi))
            throw DataError("bone " + bone.name + " angle limit must be within [0, pi)");
    }
    for (const auto& j : joints) {
        if (j.bone < 0 || j.bone >= bone_count())
            throw DataError("joint " + j.name + " refers to a missing bone");
    }
    if (!(length_scale_min > 0.0 && length_scale_min <= length_scale_max && radius_scale_min > 0.0 &&
          radius_scale_min <= radius_scale_max && limb_scale_min > 0.0 && limb_scale_min <= limb_scale_max))
        throw DataError("invalid shape sampling ranges");
    if (!(yaw_limit >= 0.0 && yaw_limit < std::numbers::pi) || !(depth_min > 0.0 && depth_min <= depth_max))
        throw DataError("invalid placement ranges");
}

SynthBodySpec default_body_spec()
{
    SynthBodySpec s;
    auto add = [&s](std::string name, int parent, Vec3 head, Vec3 tail, double r0, double r1, int rings,
                    double limit) {
        const bool side = name.rfind("l_", 0) == 0 || name.rfind("r_", 0) == 0;
        const bool leg = name.find("hip") != std::string::npos || name.find("thigh") != std::string::npos ||
                         name.find("calf") != std::string::npos || name.find("foot") != std::string::npos;
        BoneGroup group = BoneGroup::Torso;
        if (name == "neck" || name == "head")
            group = BoneGroup::Head;
        else if (side)
            group = leg ? BoneGroup::Leg : BoneGroup::Arm;
        s.bones.push_back({std::move(name), parent, head, tail, r0, r1, rings, limit, group});
        return static_cast<int>(s.bones.size()) - 1;
    };
    const int pelvis = add("pelvis", -1, {0, 0.92, 0}, {0, 1.00, 0}, 0.12, 0.12, 3, 0.15);
    const int spine1 = add("spine1", pelvis, {0, 1.00, 0}, {0, 1.15, 0}, 0.12, 0.125, 6, 0.2);
    const int spine2 = add("spine2", spine1, {0, 1.15, 0}, {0, 1.40, 0}, 0.13, 0.14, 8, 0.2);
    const int neck = add("neck", spine2, {0, 1.40, 0}, {0, 1.52, 0}, 0.055, 0.05, 5, 0.3);
    const int head = add("head", neck, {0, 1.52, 0}, {0, 1.76, 0}, 0.09, 0.085, 8, 0.3);

    struct Side {
        int collar, upperarm, forearm, hand, fingers, hipbone, thigh, calf, foot;
    };
    auto add_side = [&](const char* prefix, double sx) {
        const std::string p = prefix;
        Side side{};
        side.collar = add(p + "collar", spine2, {0, 1.40, 0}, {sx * 0.17, 1.40, 0}, 0.05, 0.05, 6, 0.1);
        side.upperarm = add(p + "upperarm", side.collar, {sx * 0.17, 1.40, 0}, {sx * 0.45, 1.40, 0}, 0.045, 0.04, 12, 0.5);
        side.forearm = add(p + "forearm", side.upperarm, {sx * 0.45, 1.40, 0}, {sx * 0.70, 1.40, 0}, 0.04, 0.03, 12, 0.5);
        side.hand = add(p + "hand", side.forearm, {sx * 0.70, 1.40, 0}, {sx * 0.80, 1.40, 0}, 0.03, 0.03, 5, 0.4);
        side.fingers = add(p + "fingers", side.hand, {sx * 0.80, 1.40, 0}, {sx * 0.88, 1.40, 0}, 0.025, 0.015, 4, 0.3);
        side.hipbone = add(p + "hipbone", pelvis, {0, 0.96, 0}, {sx * 0.09, 0.90, 0}, 0.08, 0.08, 5, 0.1);
        side.thigh = add(p + "thigh", side.hipbone, {sx * 0.09, 0.90, 0}, {sx * 0.10, 0.50, 0}, 0.075, 0.05, 16, 0.5);
        side.calf = add(p + "calf", side.thigh, {sx * 0.10, 0.50, 0}, {sx * 0.10, 0.10, 0}, 0.05, 0.04, 16, 0.5);
        side.foot = add(p + "foot", side.calf, {sx * 0.10, 0.10, 0}, {sx * 0.10, 0.03, 0.14}, 0.04, 0.035, 6, 0.3);
        return side;
    };
    const Side left = add_side("l_", 1.0);
    const Side right = add_side("r_", -1.0);

    auto joint = [&s](int index, int bone, double t = 0.0, double ru = 0.0, double rw = 0.0) {
        s.joints.resize(std::max<std::size_t>(s.joints.size(), index + 1));
        s.joints[index] = {std::string(kJointNames[index]), bone, t, ru, rw};
    };
    joint(joint::Pelvis, pelvis);
    joint(joint::RightHip, right.thigh);
    joint(joint::RightKnee, right.calf);
    joint(joint::RightAnkle, right.foot);
    joint(joint::LeftHip, left.thigh);
    joint(joint::LeftKnee, left.calf);
    joint(joint::LeftAnkle, left.foot);
    joint(joint::Torso, spine2);
    joint(joint::Neck, neck);
    // Bone frame of a +y bone: u = +x, w = -z, so the face is at -w.
    joint(joint::Nose, head, 0.35, 0.0, -1.1);
    joint(joint::Head, head, 1.0);
    joint(joint::LeftShoulder, left.upperarm);
    joint(joint::LeftElbow, left.forearm);
    joint(joint::LeftWrist, left.hand);
    joint(joint::RightShoulder, right.upperarm);
    joint(joint::RightElbow, right.forearm);
    joint(joint::RightWrist, right.hand);
    return s;
}

MergeMap default_merge_map(const SynthBodySpec& spec)
{
    MergeMap m;
    m.part_names.assign(kPartNames.begin(), kPartNames.end());
    auto part_of = [](const std::string& bone) -> std::string {
        const bool left = bone.rfind("l_", 0) == 0;
        const bool right = bone.rfind("r_", 0) == 0;
        const std::string base = (left || right) ? bone.substr(2) : bone;
        const std::string side = left ? "Left " : "Right ";
        if (base == "pelvis" || base == "spine1" || base == "hipbone")
            return "Abdomen";
        if (base == "spine2" || base == "neck" || base == "collar")
            return "Chest";
        if (base == "head")
            return "Head";
        if (base == "thigh")
            return side + "Thigh";
        if (base == "calf")
            return side + "Calf";
        if (base == "foot")
            return side + "Foot";
        if (base == "upperarm")
            return side + "Upper Arm";
        if (base == "forearm")
            return side + "Forearm";
        if (base == "hand" || base == "fingers")
            return side + "Hand";
        throw DataError("no default part for bone '" + bone + "'");
    };
    for (const auto& bone : spec.bones) {
        m.segment_names.push_back(bone.name);
        m.segment_to_part.push_back(part_index(part_of(bone.name)));
    }
    m.validate();
    return m;
}

SynthBody::SynthBody(SynthBodySpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    const int nb = spec_.bone_count();
    const int segs = spec_.ring_segments;
    std::vector<int> child_count(nb, 0);
    for (const auto& b : spec_.bones) {
        if (b.parent >= 0)
            ++child_count[b.parent];
    }
    for (const auto& b : spec_.bones) {
        const Vec3 d = b.tail - b.head;
        const Vec3 e = d.normalized();
        const Vec3 ref = std::abs(e.z()) > 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
        const Vec3 u = e.cross(ref).normalized();
        axis_.push_back(e);
        frame_u_.push_back(u);
        frame_w_.push_back(e.cross(u));
        length_.push_back(d.norm());
    }

    std::vector<Vec3> verts;
    std::vector<std::pair<int, int>> vert_ring;  // (bone, ring index or -1 for caps)
    std::vector<int> ring_start(nb);
    std::vector<Face>& faces = template_.faces;
    auto radius_at = [this](int b, double t) {
        const auto& bone = spec_.bones[b];
        const double tc = std::clamp(t, 0.0, 1.0);
        return bone.radius_head + (bone.radius_tail - bone.radius_head) * tc;
    };
    auto ring_vertex = [&](int b, int r, int k) { return ring_start[b] + r * segs + (k % segs); };

    for (int b = 0; b < nb; ++b) {
        const auto& bone = spec_.bones[b];
        ring_start[b] = static_cast<int>(verts.size());
        for (int r = 0; r < bone.rings; ++r) {
            const double t = static_cast<double>(r) / bone.rings;
            const Vec3 center = bone.head + t * length_[b] * axis_[b];
            for (int k = 0; k < segs; ++k) {
                const double a = 2.0 * std::numbers::pi * k / segs;
                verts.push_back(center + radius_at(b, t) * (std::cos(a) * frame_u_[b] + std::sin(a) * frame_w_[b]));
                vert_ring.emplace_back(b, r);
                vertex_bone_.push_back(b);
            }
        }
        for (int r = 0; r + 1 < bone.rings; ++r) {
            for (int k = 0; k < segs; ++k) {
                const int i0 = ring_vertex(b, r, k), i1 = ring_vertex(b, r, k + 1);
                const int j0 = ring_vertex(b, r + 1, k), j1 = ring_vertex(b, r + 1, k + 1);
                faces.push_back({i0, i1, j1});
                faces.push_back({i0, j1, j0});
            }
        }
        if (child_count[b] == 0) {
            const int cap = static_cast<int>(verts.size());
            verts.push_back(bone.tail);
            vert_ring.emplace_back(b, -1);
            vertex_bone_.push_back(b);
            for (int k = 0; k < segs; ++k)
                faces.push_back({ring_vertex(b, bone.rings - 1, k), ring_vertex(b, bone.rings - 1, k + 1), cap});
        }
        if (bone.parent < 0) {
            const int cap = static_cast<int>(verts.size());
            verts.push_back(bone.head - 0.5 * length_[b] / bone.rings * axis_[b]);
            vert_ring.emplace_back(b, -1);
            vertex_bone_.push_back(b);
            for (int k = 0; k < segs; ++k)
                faces.push_back({cap, ring_vertex(b, 0, k + 1), ring_vertex(b, 0, k)});
            continue;
        }

        // Stitch ring 0 to the parent ring closest to this bone's head.
        const int p = bone.parent;
        const auto& pb = spec_.bones[p];
        int best_ring = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0; r < pb.rings; ++r) {
            const Vec3 c = pb.head + (static_cast<double>(r) / pb.rings) * length_[p] * axis_[p];
            const double dist = (c - bone.head).norm();
            if (dist < best) {
                best = dist;
                best_ring = r;
            }
        }
        auto nearest = [&](int bb, int rr, const Vec3& x) {
            int arg = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int k = 0; k < segs; ++k) {
                const double dist = (verts[ring_vertex(bb, rr, k)] - x).norm();
                if (dist < bd) {
                    bd = dist;
                    arg = k;
                }
            }
            return ring_vertex(bb, rr, arg);
        };
        for (int k = 0; k < segs; ++k) {
            const int a0 = ring_vertex(b, 0, k), a1 = ring_vertex(b, 0, k + 1);
            faces.push_back({a1, a0, nearest(p, best_ring, 0.5 * (verts[a0] + verts[a1]))});
            const int b0 = ring_vertex(p, best_ring, k), b1 = ring_vertex(p, best_ring, k + 1);
            faces.push_back({b0, b1, nearest(b, 0, 0.5 * (verts[b0] + verts[b1]))});
        }
    }

    const int nv = static_cast<int>(verts.size());
    template_.vertices.resize(nv, 3);
    for (int i = 0; i < nv; ++i)
        template_.vertices.row(i) = verts[i].transpose();
    template_.validate();

    weights_.weights = Eigen::MatrixXd::Zero(nv, nb);
    for (int i = 0; i < nv; ++i) {
        const auto [b, r] = vert_ring[i];
        const int p = spec_.bones[b].parent;
        const double pw = (p >= 0 && r >= 0 && r < 3) ? kParentBlend[r] : 0.0;
        weights_.weights(i, b) = 1.0 - pw;
        if (pw > 0.0)
            weights_.weights(i, p) = pw;
    }
}

Vec3 SynthBody::rest_joint(const SynthJointSpec& j) const
{
    const auto& bone = spec_.bones[j.bone];
    const double radius = bone.radius_head + (bone.radius_tail - bone.radius_head) * std::clamp(j.t, 0.0, 1.0);
    return bone.head + j.t * length_[j.bone] * axis_[j.bone] +
           radius * (j.radial_u * frame_u_[j.bone] + j.radial_w * frame_w_[j.bone]);
}

Points3 SynthBody::template_joints() const
{
    return shaped_joints(neutral_shape());
}

BodyShape SynthBody::neutral_shape() const
{
    return {std::vector<double>(spec_.bones.size(), 1.0), std::vector<double>(spec_.bones.size(), 1.0)};
}

BodyPose SynthBody::rest_pose() const
{
    return {std::vector<Mat3>(spec_.bones.size(), Mat3::Identity()), PartTransform::identity()};
}

BodyShape SynthBody::sample_shape(std::uint64_t seed) const
{
    Uniform uni(mix_seed(spec_.seed, mix_seed(seed, 1)));
    const double stature = uni(spec_.length_scale_min, spec_.length_scale_max);
    const double girth = uni(spec_.radius_scale_min, spec_.radius_scale_max);
    const double arm = uni(spec_.limb_scale_min, spec_.limb_scale_max);
    const double leg = uni(spec_.limb_scale_min, spec_.limb_scale_max);
    const double torso = uni(spec_.limb_scale_min, spec_.limb_scale_max);
    BodyShape s;
    for (const auto& bone : spec_.bones) {
        double len = stature, rad = girth;
        if (bone.group == BoneGroup::Arm)
            len *= arm;
        else if (bone.group == BoneGroup::Leg)
            len *= leg;
        else if (bone.group == BoneGroup::Torso)
            rad *= torso;
        s.length_scale.push_back(len);
        s.radius_scale.push_back(rad);
    }
    return s;
}

BodyPose SynthBody::sample_pose(std::uint64_t seed) const
{
    Uniform uni(mix_seed(spec_.seed, mix_seed(seed, 2)));
    BodyPose pose;
    for (const auto& bone : spec_.bones) {
        // Uniform axis on the sphere, uniform angle in the limit.
        const double z = uni(-1.0, 1.0);
        const double phi = uni(0.0, 2.0 * std::numbers::pi);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 axis(rho * std::cos(phi), rho * std::sin(phi), z);
        const double limit = bone.angle_limit * spec_.pose_scale;
        const double angle = uni(-limit, limit);
        pose.local_rotation.push_back(Eigen::AngleAxisd(angle, axis).toRotationMatrix());
    }
    const double yaw = uni(-spec_.yaw_limit, spec_.yaw_limit);
    // Camera frame: x right, y down, z forward.
    const Mat3 to_camera = Vec3(1.0, -1.0, -1.0).asDiagonal();
    pose.global.rotation = to_camera * Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix();
    const double ox = uni(-spec_.lateral_limit, spec_.lateral_limit);
    const double oy = uni(-spec_.lateral_limit, spec_.lateral_limit);
    const double depth = uni(spec_.depth_min, spec_.depth_max);
    pose.global.translation = Vec3(ox, 0.9 + oy, depth);
    return pose;
}

std::vector<Vec3> SynthBody::shaped_heads(const BodyShape& shape) const
{
    std::vector<Vec3> heads(spec_.bones.size());
    for (std::size_t b = 0; b < spec_.bones.size(); ++b) {
        const int p = spec_.bones[b].parent;
        heads[b] = p < 0 ? spec_.bones[b].head : shape_point(shape, heads, p, spec_.bones[b].head);
    }
    return heads;
}

Vec3 SynthBody::shape_point(const BodyShape& shape, const std::vector<Vec3>& heads, int bone, const Vec3& rest) const
{
    const Vec3 d = rest - spec_.bones[bone].head;
    const Vec3& e = axis_[bone];
    const double along = d.dot(e);
    return heads[bone] + shape.length_scale[bone] * along * e + shape.radius_scale[bone] * (d - along * e);
}

Points3 SynthBody::shaped_vertices(const BodyShape& shape) const
{
    const auto heads = shaped_heads(shape);
    Points3 out(template_.vertex_count(), 3);
    for (int i = 0; i < template_.vertex_count(); ++i)
        out.row(i) = shape_point(shape, heads, vertex_bone_[i], template_.vertices.row(i).transpose()).transpose();
    return out;
}

Points3 SynthBody::shaped_joints(const BodyShape& shape) const
{
    const auto heads = shaped_heads(shape);
    Points3 out(static_cast<Eigen::Index>(spec_.joints.size()), 3);
    for (std::size_t j = 0; j < spec_.joints.size(); ++j)
        out.row(static_cast<Eigen::Index>(j)) =
            shape_point(shape, heads, spec_.joints[j].bone, rest_joint(spec_.joints[j])).transpose();
    return out;
}

std::vector<PartTransform> SynthBody::skinning_transforms(const BodyShape& shape, const BodyPose& pose) const
{
    const auto heads = shaped_heads(shape);
    std::vector<PartTransform> out(spec_.bones.size());
    std::vector<Mat3> world_rot(spec_.bones.size());
    for (std::size_t b = 0; b < spec_.bones.size(); ++b) {
        const int p = spec_.bones[b].parent;
        world_rot[b] = p < 0 ? pose.local_rotation[b] : Mat3(world_rot[p] * pose.local_rotation[b]);
        const Vec3 placed = p < 0 ? heads[b] : apply_transform(out[p], heads[b]);
        out[b].rotation = world_rot[b];
        out[b].translation = placed - world_rot[b] * heads[b];
    }
    return out;
}

SynthSample SynthBody::instance(const BodyShape& shape, const BodyPose& pose) const
{
    if (shape.length_scale.size() != spec_.bones.size() || shape.radius_scale.size() != spec_.bones.size() ||
        pose.local_rotation.size() != spec_.bones.size())
        throw DataError("shape/pose size does not match the skeleton");
    const auto skin = skinning_transforms(shape, pose);
    const Points3 rest = shaped_vertices(shape);
    SynthSample out;
    out.weights = weights_;
    out.mesh.faces = template_.faces;
    out.mesh.vertices = Points3::Zero(rest.rows(), 3);
    for (Eigen::Index i = 0; i < rest.rows(); ++i) {
        Vec3 acc = Vec3::Zero();
        const Vec3 x = rest.row(i).transpose();
        for (int b = 0; b < weights_.bone_count(); ++b) {
            const double w = weights_.weights(i, b);
            if (w != 0.0)
                acc += w * apply_transform(skin[b], x);
        }
        out.mesh.vertices.row(i) = apply_transform(pose.global, acc).transpose();
    }
    const Points3 rest_joints = shaped_joints(shape);
    out.joints.resize(rest_joints.rows(), 3);
    for (Eigen::Index j = 0; j < rest_joints.rows(); ++j) {
        const int b = spec_.joints[static_cast<std::size_t>(j)].bone;
        out.joints.row(j) =
            apply_transform(pose.global, apply_transform(skin[b], Vec3(rest_joints.row(j).transpose()))).transpose();
    }
    return out;
}

SynthSample synth_body(const SynthBodySpec& spec, std::optional<std::uint64_t> pose_seed)
{
    const SynthBody body(spec);
    if (!pose_seed)
        return body.instance(body.neutral_shape(), body.rest_pose());
    return body.instance(body.sample_shape(*pose_seed), body.sample_pose(*pose_seed));
}

}  // namespace hppm
