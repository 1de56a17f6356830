#include "hppm/geom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <string_view>

#include <Eigen/Dense>

#include "hppm/error.hpp"

namespace hppm {

void Mesh::validate() const
{
    const int n = vertex_count();
    if (!vertices.allFinite())
        throw DataError("mesh has non-finite vertex coordinates");
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& face = faces[f];
        for (int idx : face) {
            if (idx < 0 || idx >= n)
                throw DataError("face " + std::to_string(f) + " references vertex " +
                                std::to_string(idx) + " but mesh has " + std::to_string(n) +
                                " vertices");
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw DataError("face " + std::to_string(f) + " is degenerate");
    }
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_double(std::string_view tok, double& out)
{
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

bool parse_int(std::string_view tok, long& out)
{
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

void append_double(std::string& out, double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

}  // namespace

Mesh read_obj(std::istream& in, const std::string& source)
{
    std::vector<double> coords;
    std::vector<std::array<long, 3>> raw_faces;
    std::vector<std::size_t> face_lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (const auto hash = body.find('#'); hash != std::string_view::npos)
            body = trim(body.substr(0, hash));
        if (body.empty())
            continue;
        const auto tokens = split_ws(body);
        const std::string_view key = tokens.front();
        if (key == "v") {
            if (tokens.size() != 4 && tokens.size() != 5)
                throw ParseError(source, lineno, "vertex line needs 3 coordinates");
            for (int k = 1; k <= 3; ++k) {
                double value = 0.0;
                if (!parse_double(tokens[k], value) || !std::isfinite(value))
                    throw ParseError(source, lineno, "bad coordinate '" + std::string(tokens[k]) + "'");
                coords.push_back(value);
            }
        } else if (key == "f") {
            if (tokens.size() != 4)
                throw ParseError(source, lineno,
                                 "only triangular faces are supported (got " +
                                     std::to_string(tokens.size() - 1) + " indices)");
            std::array<long, 3> face{};
            for (int k = 0; k < 3; ++k) {
                std::string_view tok = tokens[k + 1];
                tok = tok.substr(0, tok.find('/'));
                if (!parse_int(tok, face[k]) || face[k] == 0)
                    throw ParseError(source, lineno, "bad face index '" + std::string(tokens[k + 1]) + "'");
            }
            // Negative indices are relative to the vertices read so far.
            const long seen = static_cast<long>(coords.size() / 3);
            for (long& idx : face)
                idx = idx < 0 ? seen + idx : idx - 1;
            raw_faces.push_back(face);
            face_lines.push_back(lineno);
        }
        // vn, vt, o, g, s, usemtl, mtllib, ... carry nothing we keep.
    }

    Mesh mesh;
    const long n = static_cast<long>(coords.size() / 3);
    mesh.vertices = Eigen::Map<const Points3>(coords.data(), n, 3);
    mesh.faces.reserve(raw_faces.size());
    for (std::size_t f = 0; f < raw_faces.size(); ++f) {
        const auto& rf = raw_faces[f];
        for (long idx : rf) {
            if (idx < 0 || idx >= n)
                throw ParseError(source, face_lines[f],
                                 "face index " + std::to_string(idx + 1) + " out of range (" +
                                     std::to_string(n) + " vertices)");
        }
        if (rf[0] == rf[1] || rf[1] == rf[2] || rf[0] == rf[2])
            throw ParseError(source, face_lines[f], "degenerate face");
        mesh.faces.push_back({static_cast<int>(rf[0]), static_cast<int>(rf[1]), static_cast<int>(rf[2])});
    }
    return mesh;
}

void write_obj(const Mesh& mesh, std::ostream& out)
{
    std::string buf;
    buf.reserve(static_cast<std::size_t>(mesh.vertex_count()) * 64 + mesh.faces.size() * 24);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        buf += "v ";
        append_double(buf, mesh.vertices(i, 0));
        buf += ' ';
        append_double(buf, mesh.vertices(i, 1));
        buf += ' ';
        append_double(buf, mesh.vertices(i, 2));
        buf += '\n';
    }
    for (const Face& f : mesh.faces) {
        buf += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
               std::to_string(f[2] + 1) + '\n';
    }
    out << buf;
}

Mesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open mesh file " + path.string());
    return read_obj(in, path.string());
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
    mesh.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write mesh file " + path.string());
    write_obj(mesh, out);
    if (!out)
        throw DataError("write failed for " + path.string());
}

bool AdjacencyGraph::connected(int a, int b) const
{
    const auto& n = neighbors.at(a);
    return std::binary_search(n.begin(), n.end(), b);
}

AdjacencyGraph build_adjacency(int vertex_count, std::span<const Face> faces)
{
    AdjacencyGraph g;
    g.neighbors.resize(vertex_count);
    for (const Face& f : faces) {
        for (int a = 0; a < 3; ++a) {
            const int i = f[a];
            const int j = f[(a + 1) % 3];
            g.neighbors[i].push_back(j);
            g.neighbors[j].push_back(i);
        }
    }
    for (auto& n : g.neighbors) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return g;
}

AdjacencyGraph build_adjacency(const Mesh& mesh)
{
    mesh.validate();
    return build_adjacency(mesh.vertex_count(), mesh.faces);
}

std::vector<int> bfs_distances(const AdjacencyGraph& graph, std::span<const int> sources)
{
    std::vector<int> dist(graph.vertex_count(), -1);
    std::deque<int> queue;
    for (int s : sources) {
        if (dist[s] != 0) {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : graph.neighbors[v]) {
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

Eigen::VectorXd flatten(const Points3& points)
{
    return Eigen::Map<const Eigen::VectorXd>(points.data(), points.size());
}

Points3 unflatten(const Eigen::VectorXd& flat)
{
    if (flat.size() % 3 != 0)
        throw DataError("flattened vertex vector length is not a multiple of 3");
    return Eigen::Map<const Points3>(flat.data(), flat.size() / 3, 3);
}

Eigen::Matrix<double, 6, 1> Rotation6D::vector() const
{
    return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(values.data());
}

Mat3 rot6d_to_matrix(const Rotation6D& r)
{
    const Vec3 a = r.first();
    const Vec3 b = r.second();
    if (!a.allFinite() || !b.allFinite())
        throw NumericError("degenerate rotation: non-finite 6D values");
    const double na = a.norm();
    if (na == 0.0)
        throw NumericError("degenerate rotation: first 6D column is zero");
    const Vec3 c0 = a / na;
    const Vec3 ortho = b - c0.dot(b) * c0;
    const double no = ortho.norm();
    if (no <= 1e-12 * std::max(1.0, b.norm()))
        throw NumericError("degenerate rotation: 6D columns are parallel or zero");
    const Vec3 c1 = ortho / no;
    Mat3 R;
    R.col(0) = c0;
    R.col(1) = c1;
    R.col(2) = c0.cross(c1);
    return R;
}

Rotation6D matrix_to_rot6d(const Mat3& rotation)
{
    if (!rotation.allFinite() ||
        (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
        throw NumericError("matrix_to_rot6d: input is not orthonormal");
    Rotation6D r;
    for (int i = 0; i < 3; ++i) {
        r.values[i] = rotation(i, 0);
        r.values[3 + i] = rotation(i, 1);
    }
    return r;
}

PartTransform PartTransform::from_homogeneous(const Mat4& m)
{
    PartTransform t;
    t.rotation = m.topLeftCorner<3, 3>();
    t.translation = m.topRightCorner<3, 1>();
    return t;
}

Mat4 PartTransform::homogeneous() const
{
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

PartTransform PartTransform::inverse() const
{
    PartTransform inv;
    if (is_rigid(1e-9)) {
        inv.rotation = rotation.transpose();
    } else {
        Eigen::FullPivLU<Mat3> lu(rotation);
        if (!lu.isInvertible())
            throw NumericError("transform is singular");
        inv.rotation = lu.inverse();
    }
    inv.translation = -(inv.rotation * translation);
    return inv;
}

PartTransform PartTransform::compose(const PartTransform& other) const
{
    PartTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

bool PartTransform::is_rigid(double tol) const
{
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
}

Points3 apply_transform(const PartTransform& transform, const Points3& points)
{
    Points3 out = points * transform.rotation.transpose();
    out.rowwise() += transform.translation.transpose();
    return out;
}

Vec3 apply_transform(const PartTransform& transform, const Vec3& point)
{
    return transform.rotation * point + transform.translation;
}

void CameraIntrinsics::validate() const
{
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
        !std::isfinite(cx) || !std::isfinite(cy))
        throw DataError("camera intrinsics need finite fx > 0 and fy > 0");
}

Points2 project(const CameraIntrinsics& cam, const Points3& points)
{
    cam.validate();
    std::vector<int> bad;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (!(points(i, 2) > 0.0))
            bad.push_back(static_cast<int>(i));
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "points behind camera (z <= 0) at indices:";
        for (std::size_t k = 0; k < bad.size() && k < 20; ++k)
            msg << ' ' << bad[k];
        if (bad.size() > 20)
            msg << " ... (" << bad.size() << " total)";
        throw DataError(msg.str());
    }
    Points2 out(points.rows(), 2);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double z = points(i, 2);
        out(i, 0) = cam.fx * points(i, 0) / z + cam.cx;
        out(i, 1) = cam.fy * points(i, 1) / z + cam.cy;
    }
    return out;
}

Vec2 project(const CameraIntrinsics& cam, const Vec3& point)
{
    Points3 p(1, 3);
    p.row(0) = point.transpose();
    return project(cam, p).row(0).transpose();
}

}  // namespace hppm
