#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include "hppm/geom.hpp"
#include "hppm/model.hpp"
#include "hppm/part_template.hpp"
#include "hppm/synth_body.hpp"

namespace hppm::test {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
double normal(Rng& rng);
Vec3 random_vec(Rng& rng, double scale = 1.0);
/// Haar-uniform rotation from a normalized Gaussian quaternion.
Mat3 random_rotation(Rng& rng);
PartTransform random_rigid(Rng& rng, double translation_scale = 1.0);
Points3 random_points(Rng& rng, int n, double scale = 1.0);
/// Random triangle soup over `n` vertices with distinct corners.
Mesh random_mesh(Rng& rng, int n, int faces);

/// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

/// Default synthetic body and its 15-part templates at the default dilation.
const SynthBody& default_body();
const HppmTemplateSet& default_templates();

/// Posed training meshes + joints and a model trained on them.
struct TrainedFixture {
    std::vector<Mesh> bodies;
    std::vector<Points3> joints;
    HppmModel model;
};
const TrainedFixture& trained_fixture();

/// Fraction of `part` inside `crop` by Sutherland-Hodgman clipping of the
/// part rectangle and the shoelace formula. Independent of Box2::intersect.
double clipped_fraction(double px0, double py0, double px1, double py1, double cx0, double cy0, double cx1,
                        double cy1);

std::vector<Mesh> synth_meshes(const SynthBody& body, int count, std::uint64_t stream,
                               std::vector<Points3>* joints = nullptr);

}  // namespace hppm::test
