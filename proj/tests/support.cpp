#include "support.hpp"

#include <array>
#include <cmath>
#include <tuple>

#include <Eigen/Geometry>

namespace hppm::test {

double uniform(Rng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng)
{
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

Vec3 random_vec(Rng& rng, double scale)
{
    return Vec3(uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale));
}

Mat3 random_rotation(Rng& rng)
{
    Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
    q.normalize();
    return q.toRotationMatrix();
}

PartTransform random_rigid(Rng& rng, double translation_scale)
{
    return {random_rotation(rng), random_vec(rng, translation_scale)};
}

Points3 random_points(Rng& rng, int n, double scale)
{
    Points3 p(n, 3);
    for (int i = 0; i < n; ++i)
        p.row(i) = random_vec(rng, scale).transpose();
    return p;
}

Mesh random_mesh(Rng& rng, int n, int faces)
{
    Mesh m;
    m.vertices = random_points(rng, n, 2.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    while (static_cast<int>(m.faces.size()) < faces) {
        const Face f{pick(rng), pick(rng), pick(rng)};
        if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2])
            m.faces.push_back(f);
    }
    return m;
}

std::filesystem::path fresh_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("hppm_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

double clipped_fraction(double px0, double py0, double px1, double py1, double cx0, double cy0, double cx1,
                        double cy1)
{
    using P = std::array<double, 2>;
    auto shoelace = [](const std::vector<P>& poly) {
        double a = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const P& u = poly[i];
            const P& v = poly[(i + 1) % poly.size()];
            a += u[0] * v[1] - v[0] * u[1];
        }
        return std::abs(a) / 2.0;
    };
    std::vector<P> poly{{px0, py0}, {px1, py0}, {px1, py1}, {px0, py1}};
    const double full = shoelace(poly);
    if (!(full > 0.0))
        return 0.0;
    // Half-planes as (axis, bound, keep-greater).
    const std::array<std::tuple<int, double, bool>, 4> planes{
        {{0, cx0, true}, {0, cx1, false}, {1, cy0, true}, {1, cy1, false}}};
    for (const auto& [axis, bound, greater] : planes) {
        std::vector<P> next;
        auto inside = [&](const P& q) { return greater ? q[axis] >= bound : q[axis] <= bound; };
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const P& cur = poly[i];
            const P& prev = poly[(i + poly.size() - 1) % poly.size()];
            if (inside(cur)) {
                if (!inside(prev)) {
                    const double t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                    next.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
                }
                next.push_back(cur);
            } else if (inside(prev)) {
                const double t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                next.push_back({prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])});
            }
        }
        poly = std::move(next);
        if (poly.empty())
            return 0.0;
    }
    return shoelace(poly) / full;
}

const SynthBody& default_body()
{
    static const SynthBody body(default_body_spec());
    return body;
}

const HppmTemplateSet& default_templates()
{
    static const HppmTemplateSet set = build_templates(default_body().template_mesh(), default_body().weights(),
                                                       default_merge_map(default_body().spec()));
    return set;
}

std::vector<Mesh> synth_meshes(const SynthBody& body, int count, std::uint64_t stream, std::vector<Points3>* joints)
{
    std::vector<Mesh> out;
    for (int i = 0; i < count; ++i) {
        const auto s = mix_seed(stream, static_cast<std::uint64_t>(i));
        SynthSample sample = body.instance(body.sample_shape(s), body.sample_pose(s));
        out.push_back(std::move(sample.mesh));
        if (joints)
            joints->push_back(std::move(sample.joints));
    }
    return out;
}

const TrainedFixture& trained_fixture()
{
    static const TrainedFixture fx = [] {
        TrainedFixture f;
        f.bodies = synth_meshes(default_body(), 120, 11, &f.joints);
        TrainingData data{f.bodies, f.joints, default_body().template_joints()};
        f.model = train_model(default_templates(), default_merge_map(default_body().spec()), data, TrainingConfig{});
        return f;
    }();
    return fx;
}

}  // namespace hppm::test
