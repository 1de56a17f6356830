#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hppm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Row-major so that a point list maps onto the interleaved (x1, y1, z1, x2, ...)
// vector without copying.
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

using Face = std::array<int, 3>;

/// Triangle mesh in meters. Faces index into `vertices` (0-based).
struct Mesh {
    Points3 vertices;
    std::vector<Face> faces;

    int vertex_count() const { return static_cast<int>(vertices.rows()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    /// Throws DataError when an index is out of range, a face repeats a vertex,
    /// or a coordinate is not finite.
    void validate() const;
};

Mesh read_obj(std::istream& in, const std::string& source = "<stream>");
void write_obj(const Mesh& mesh, std::ostream& out);

Mesh load_mesh(const std::filesystem::path& path);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

/// Sorted per-vertex neighbor lists of the mesh edge graph.
struct AdjacencyGraph {
    std::vector<std::vector<int>> neighbors;

    int vertex_count() const { return static_cast<int>(neighbors.size()); }
    bool connected(int a, int b) const;
};

AdjacencyGraph build_adjacency(int vertex_count, std::span<const Face> faces);
AdjacencyGraph build_adjacency(const Mesh& mesh);

/// Breadth-first hop counts from every source vertex; -1 where unreachable.
std::vector<int> bfs_distances(const AdjacencyGraph& graph, std::span<const int> sources);

Eigen::VectorXd flatten(const Points3& points);
Points3 unflatten(const Eigen::VectorXd& flat);

/// First two columns of a rotation matrix, column-major:
/// (r00, r10, r20, r01, r11, r21).
struct Rotation6D {
    std::array<double, 6> values{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

    Vec3 first() const { return {values[0], values[1], values[2]}; }
    Vec3 second() const { return {values[3], values[4], values[5]}; }
    Eigen::Matrix<double, 6, 1> vector() const;
    bool operator==(const Rotation6D&) const = default;
};

/// Gram-Schmidt reconstruction. Throws NumericError for zero or parallel columns.
Mat3 rot6d_to_matrix(const Rotation6D& r);
/// Throws NumericError when `rotation` is not orthonormal within 1e-6.
Rotation6D matrix_to_rot6d(const Mat3& rotation);

/// x -> rotation * x + translation. In affine fits the 3x3 block is not
/// constrained to SO(3).
struct PartTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static PartTransform identity() { return {}; }
    static PartTransform from_homogeneous(const Mat4& m);

    Mat4 homogeneous() const;
    /// General inverse of the affine map; throws NumericError if singular.
    PartTransform inverse() const;
    /// (*this) o (other): apply `other` first.
    PartTransform compose(const PartTransform& other) const;
    bool is_rigid(double tol = 1e-9) const;
};

Points3 apply_transform(const PartTransform& transform, const Points3& points);
Vec3 apply_transform(const PartTransform& transform, const Vec3& point);

struct CameraIntrinsics {
    double fx = 1000.0;
    double fy = 1000.0;
    double cx = 500.0;
    double cy = 500.0;

    void validate() const;
    bool operator==(const CameraIntrinsics&) const = default;
};

/// Pinhole projection without distortion. Throws DataError listing the
/// indices of points with z <= 0.
Points2 project(const CameraIntrinsics& cam, const Points3& points);
Vec2 project(const CameraIntrinsics& cam, const Vec3& point);

}  // namespace hppm
