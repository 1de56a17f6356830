#include <doctest.h>

#include <Eigen/Dense>

#include <fstream>
#include <set>
#include <sstream>

#include "hppm/error.hpp"
#include "hppm/geom.hpp"
#include "support.hpp"

using namespace hppm;
using namespace hppm::test;

namespace {

Mesh parse(const std::string& text)
{
    std::istringstream in(text);
    return read_obj(in, "test.obj");
}

double round_sig(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return std::strtod(buf, nullptr);
}

}  // namespace

TEST_CASE("minimal obj loads")
{
    const Mesh m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    CHECK(m.vertex_count() == 3);
    REQUIRE(m.face_count() == 1);
    CHECK(m.faces[0] == Face{0, 1, 2});
    CHECK(m.vertices(1, 0) == 1.0);
}

TEST_CASE("obj reader errors")
{
    CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), ParseError);
    CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"), ParseError);
    CHECK_THROWS_AS(parse("v 0 0\n"), ParseError);
    CHECK_THROWS_AS(parse("v 0 zero 0\n"), ParseError);
    CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\n"), ParseError);
    try {
        parse("v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 4\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 5);
    }
}

TEST_CASE("obj reader accepts slashes, negatives and ignores other records")
{
    const Mesh m = parse("# comment\no thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2//1 -1\n");
    REQUIRE(m.face_count() == 1);
    CHECK(m.faces[0] == Face{0, 1, 2});
}

TEST_CASE("save_mesh writes one line per vertex and face")
{
    Mesh m;
    m.vertices = Points3::Identity(3, 3);
    m.faces = {{0, 1, 2}};
    std::ostringstream out;
    write_obj(m, out);
    std::istringstream lines(out.str());
    std::string line;
    int v = 0, f = 0;
    while (std::getline(lines, line)) {
        v += line.rfind("v ", 0) == 0;
        f += line.rfind("f ", 0) == 0;
    }
    CHECK(v == 3);
    CHECK(f == 1);
    CHECK(out.str().find("f 1 2 3") != std::string::npos);
}

TEST_CASE("vertices-only mesh round trips as a point cloud")
{
    Rng rng(1);
    Mesh m;
    m.vertices = random_points(rng, 7);
    const auto dir = fresh_dir("geom_cloud");
    save_mesh(m, dir / "cloud.obj");
    const Mesh back = load_mesh(dir / "cloud.obj");
    CHECK(back.face_count() == 0);
    CHECK(back.vertices == m.vertices);
}

TEST_CASE("obj round trip is bitwise on 100 random meshes")
{
    Rng rng(2);
    const auto dir = fresh_dir("geom_roundtrip");
    for (int t = 0; t < 100; ++t) {
        Mesh m = random_mesh(rng, 5 + t, 3 + t);
        // Half the meshes carry coordinates already at 9 significant digits.
        if (t % 2 == 0)
            m.vertices = m.vertices.unaryExpr([](double x) { return round_sig(x, 9); });
        const auto path = dir / ("m" + std::to_string(t) + ".obj");
        save_mesh(m, path);
        const Mesh back = load_mesh(path);
        REQUIRE(back.vertex_count() == m.vertex_count());
        CHECK(back.vertices == m.vertices);
        CHECK(back.faces == m.faces);
    }
}

TEST_CASE("10k-vertex round trip")
{
    Rng rng(3);
    const Mesh m = random_mesh(rng, 10000, 20000);
    const auto dir = fresh_dir("geom_10k");
    save_mesh(m, dir / "big.obj");
    const Mesh back = load_mesh(dir / "big.obj");
    CHECK((back.vertices - m.vertices).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("adjacency of small meshes")
{
    Mesh tri;
    tri.vertices = Points3::Zero(3, 3);
    tri.faces = {{0, 1, 2}};
    const auto a = build_adjacency(tri);
    for (int i = 0; i < 3; ++i)
        CHECK(a.neighbors[i].size() == 2);

    Mesh two;
    two.vertices = Points3::Zero(4, 3);
    two.faces = {{0, 1, 2}, {1, 3, 2}};
    const auto b = build_adjacency(two);
    CHECK(b.neighbors[1].size() == 3);
    CHECK(b.neighbors[2].size() == 3);
    CHECK(b.neighbors[0].size() == 2);
    CHECK(b.neighbors[3].size() == 2);
}

TEST_CASE("adjacency equals a brute-force face scan and is symmetric")
{
    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const Mesh m = random_mesh(rng, 30, 40);
        const auto adj = build_adjacency(m);
        std::vector<std::set<int>> oracle(m.vertex_count());
        for (const Face& f : m.faces)
            for (int a : f)
                for (int b : f)
                    if (a != b)
                        oracle[a].insert(b);
        for (int i = 0; i < m.vertex_count(); ++i) {
            CHECK(std::vector<int>(oracle[i].begin(), oracle[i].end()) == adj.neighbors[i]);
            for (int j : adj.neighbors[i]) {
                CHECK(j != i);
                CHECK(adj.connected(j, i));
            }
        }
    }
}

TEST_CASE("bfs distances")
{
    AdjacencyGraph path;
    path.neighbors = {{1}, {0, 2}, {1, 3}, {2}, {}};
    const std::vector<int> src{0};
    CHECK(bfs_distances(path, src) == std::vector<int>{0, 1, 2, 3, -1});
}

TEST_CASE("rot6d examples")
{
    CHECK(rot6d_to_matrix({{1, 0, 0, 0, 1, 0}}).isApprox(Mat3::Identity(), 0.0));
    CHECK((rot6d_to_matrix({{2, 0, 0, 0, 3, 0}}) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(matrix_to_rot6d(Mat3::Identity()) == Rotation6D{{1, 0, 0, 0, 1, 0}});
    Mat3 rz;
    rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK(matrix_to_rot6d(rz) == Rotation6D{{0, 1, 0, -1, 0, 0}});
}

TEST_CASE("rot6d degenerate inputs are errors")
{
    CHECK_THROWS_AS(rot6d_to_matrix({{0, 0, 0, 0, 1, 0}}), NumericError);
    CHECK_THROWS_AS(rot6d_to_matrix({{1, 0, 0, 2, 0, 0}}), NumericError);
    CHECK_THROWS_AS(rot6d_to_matrix({{1, 0, 0, 0, 0, 0}}), NumericError);
    Mat3 skew = Mat3::Identity();
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(matrix_to_rot6d(skew), NumericError);
}

TEST_CASE("rot6d round trip over 1000 random rotations")
{
    Rng rng(5);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const Mat3 r = random_rotation(rng);
        const Rotation6D six = matrix_to_rot6d(r);
        const Mat3 back = rot6d_to_matrix(six);
        worst = std::max(worst, (back - r).cwiseAbs().maxCoeff());
        CHECK((back.transpose() * back - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(back.determinant() - 1.0) < 1e-9);
        const Rotation6D again = matrix_to_rot6d(back);
        for (int k = 0; k < 6; ++k)
            CHECK(std::abs(again.values[k] - six.values[k]) < 1e-12);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("rot6d of arbitrary independent vectors is a proper rotation")
{
    Rng rng(6);
    for (int t = 0; t < 200; ++t) {
        Rotation6D r;
        for (double& v : r.values)
            v = uniform(rng, -3, 3);
        const Mat3 m = rot6d_to_matrix(r);
        CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(m.determinant() - 1.0) < 1e-9);
        // First column is the normalized first vector.
        CHECK((m.col(0) - r.first().normalized()).norm() < 1e-15);
    }
}

TEST_CASE("apply_transform examples")
{
    Rng rng(7);
    const Points3 p = random_points(rng, 50);
    CHECK(apply_transform(PartTransform::identity(), p) == p);
    PartTransform shift;
    shift.translation = Vec3(0, 0, 1);
    const Points3 q = apply_transform(shift, p);
    CHECK((q.col(2).array() - p.col(2).array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(q.leftCols(2) == p.leftCols(2));
}

TEST_CASE("composition matches the homogeneous matrix product")
{
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const PartTransform a = random_rigid(rng), b = random_rigid(rng);
        const Points3 p = random_points(rng, 20);
        const Points3 seq = apply_transform(a, apply_transform(b, p));
        const Mat4 m = a.homogeneous() * b.homogeneous();
        Eigen::MatrixXd h(4, p.rows());
        h.topRows(3) = p.transpose();
        h.row(3).setOnes();
        const Eigen::MatrixXd oracle = (m * h).topRows(3).transpose();
        CHECK((seq - oracle).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((apply_transform(a.compose(b), p) - oracle).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((apply_transform(a.inverse(), apply_transform(a, p)) - p).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("affine inverse")
{
    PartTransform t;
    t.rotation << 2, 0.1, 0, 0, 1, 0.3, 0.2, 0, 3;
    t.translation = Vec3(1, 2, 3);
    CHECK_FALSE(t.is_rigid());
    const Mat4 prod = t.inverse().homogeneous() * t.homogeneous();
    CHECK((prod - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    PartTransform singular;
    singular.rotation.setZero();
    CHECK_THROWS_AS(singular.inverse(), NumericError);
}

TEST_CASE("projection examples")
{
    const CameraIntrinsics cam;
    CHECK(project(cam, Vec3(0, 0, 1)) == Vec2(500, 500));
    CHECK(project(cam, Vec3(1, 0, 2)) == Vec2(1000, 500));
}

TEST_CASE("projection is invariant along camera rays")
{
    Rng rng(9);
    const CameraIntrinsics cam{800, 900, 320, 240};
    for (int t = 0; t < 500; ++t) {
        const Vec3 p(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 0.5, 5));
        const double s = uniform(rng, 0.1, 10);
        CHECK((project(cam, Vec3(s * p)) - project(cam, p)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("projection behind the camera lists offending indices")
{
    Points3 p(4, 3);
    p << 0, 0, 1, 0, 0, -1, 0, 0, 2, 1, 1, 0;
    try {
        project(CameraIntrinsics{}, p);
        FAIL("expected an error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(" 1") != std::string::npos);
        CHECK(msg.find(" 3") != std::string::npos);
    }
    CHECK_THROWS_AS(project(CameraIntrinsics{0, 1, 0, 0}, Vec3(0, 0, 1)), DataError);
}

TEST_CASE("mesh validation")
{
    Mesh m;
    m.vertices = Points3::Zero(3, 3);
    m.faces = {{0, 1, 3}};
    CHECK_THROWS_AS(m.validate(), DataError);
    m.faces = {{0, 1, 1}};
    CHECK_THROWS_AS(m.validate(), DataError);
    m.faces = {{0, 1, 2}};
    m.vertices(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(m.validate(), DataError);
}

TEST_CASE("flatten interleaves coordinates")
{
    Points3 p(2, 3);
    p << 1, 2, 3, 4, 5, 6;
    const Eigen::VectorXd f = flatten(p);
    CHECK(f(2) == 3);
    CHECK(f(3) == 4);
    CHECK(unflatten(f) == p);
}
