#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hppm/annotate.hpp"
#include "hppm/body_parts.hpp"
#include "hppm/bundle.hpp"
#include "hppm/cli.hpp"
#include "hppm/error.hpp"
#include "hppm/fuse.hpp"
#include "hppm/pv.hpp"
#include "hppm/synth_body.hpp"

namespace py = pybind11;
using namespace hppm;

namespace {

using FaceArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

FaceArray faces_to_array(const std::vector<Face>& faces)
{
    FaceArray out({static_cast<py::ssize_t>(faces.size()), py::ssize_t{3}});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < faces.size(); ++i)
        for (int c = 0; c < 3; ++c)
            m(i, c) = faces[i][c];
    return out;
}

std::vector<Face> faces_from_array(const FaceArray& a)
{
    if (a.ndim() != 2 || (a.shape(0) > 0 && a.shape(1) != 3))
        throw DataError("faces must be an (F, 3) integer array");
    auto m = a.unchecked<2>();
    std::vector<Face> out(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i)
        out[i] = {m(i, 0), m(i, 1), m(i, 2)};
    return out;
}

Rotation6D rot6d_from(const Eigen::Matrix<double, 6, 1>& v)
{
    Rotation6D r;
    for (int i = 0; i < 6; ++i)
        r.values[i] = v(i);
    return r;
}

CameraIntrinsics camera_from(const std::array<double, 4>& c)
{
    return {c[0], c[1], c[2], c[3]};
}

py::tuple mesh_tuple(const Mesh& m)
{
    return py::make_tuple(m.vertices, faces_to_array(m.faces));
}

}  // namespace

PYBIND11_MODULE(_hppm, m)
{
    m.doc() = "Part-based human body model toolkit";

    // Translators run most-recent first, so the base class goes first.
    auto& error = py::register_exception<Error>(m, "Error");
    py::register_exception<DataError>(m, "DataError", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<NumericError>(m, "NumericError", error.ptr());

    m.attr("PART_NAMES") = std::vector<std::string>(kPartNames.begin(), kPartNames.end());
    m.attr("JOINT_NAMES") = std::vector<std::string>(kJointNames.begin(), kJointNames.end());

    m.def("rot6d_to_matrix",
          [](const Eigen::Matrix<double, 6, 1>& v) { return Mat3(rot6d_to_matrix(rot6d_from(v))); },
          py::arg("rot6d"));
    m.def("matrix_to_rot6d",
          [](const Mat3& r) { return Eigen::Matrix<double, 6, 1>(matrix_to_rot6d(r).vector()); },
          py::arg("matrix"));
    m.def("project",
          [](const Points3& points, const std::array<double, 4>& camera) {
              return Points2(project(camera_from(camera), points));
          },
          py::arg("points"), py::arg("camera") = std::array<double, 4>{1000.0, 1000.0, 500.0, 500.0},
          "Pinhole projection; camera is (fx, fy, cx, cy).");

    m.def("load_mesh", [](const std::filesystem::path& p) { return mesh_tuple(load_mesh(p)); }, py::arg("path"),
          "Returns (vertices (N, 3), faces (F, 3)).");
    m.def("save_mesh",
          [](const Points3& v, const FaceArray& f, const std::filesystem::path& p) {
              save_mesh(Mesh{v, faces_from_array(f)}, p);
          },
          py::arg("vertices"), py::arg("faces"), py::arg("path"));

    m.def("fit_transform",
          [](const Points3& target, const Points3& source, const std::string& mode) {
              const FitResult r = fit_global_transform(target, source, parse_fit_mode(mode));
              return py::make_tuple(r.transform.rotation, r.transform.translation, r.rms_residual);
          },
          py::arg("target"), py::arg("source"), py::arg("mode") = "rigid",
          "Least-squares (A, t, rms) with target ~ A source + t.");

    m.def("synth_body",
          [](std::optional<std::uint64_t> seed) {
              const SynthSample s = synth_body(default_body_spec(), seed);
              return py::make_tuple(s.mesh.vertices, faces_to_array(s.mesh.faces), s.joints);
          },
          py::arg("seed") = py::none(), "Synthetic body (vertices, faces, joints); rest pose without a seed.");

    m.def("box_visible",
          [](const std::array<double, 4>& part, const std::array<double, 4>& crop) {
              return box_visible({part[0], part[1], part[2], part[3]}, {crop[0], crop[1], crop[2], crop[3]});
          },
          py::arg("part_box"), py::arg("crop"), "Boxes are (x0, y0, x1, y1).");

    m.def("mpve",
          [](const std::vector<Points3>& pred, const std::vector<Points3>& gt, const std::vector<bool>& visible) {
              return mpve(pred, gt, visible);
          },
          py::arg("pred"), py::arg("gt"), py::arg("visible"));
    m.def("mpjpe",
          [](const Points3& pred, const Points3& gt, const std::vector<bool>& counted) {
              return mpjpe(pred, gt, counted);
          },
          py::arg("pred"), py::arg("gt"), py::arg("counted"));

    py::class_<HppmModel>(m, "Model")
        .def_static("load", [](const std::filesystem::path& dir) { return load_bundle(dir); }, py::arg("bundle_dir"))
        .def_property_readonly("part_count", &HppmModel::part_count)
        .def_property_readonly("part_names",
                               [](const HppmModel& model) {
                                   std::vector<std::string> out;
                                   for (const auto& p : model.templates.parts)
                                       out.push_back(p.name);
                                   return out;
                               })
        .def("k", [](const HppmModel& model, int p) { return model.shapes.at(p).k(); }, py::arg("part"))
        .def("template_vertices",
             [](const HppmModel& model, int p) { return model.templates.parts.at(p).template_vertices; },
             py::arg("part"))
        .def("global_ids", [](const HppmModel& model, int p) { return model.templates.parts.at(p).global_ids; },
             py::arg("part"))
        .def("decode_part",
             [](const HppmModel& model, int p, const Eigen::VectorXd& shape, const Eigen::Matrix<double, 6, 1>& rot6d,
                const Vec3& translation) {
                 const auto& s = model.shapes.at(p);
                 if (shape.size() != s.k())
                     throw DataError("part " + std::to_string(p) + " expects " + std::to_string(s.k()) +
                                     " shape parameters");
                 PartState st;
                 st.part_id = p;
                 st.shape = shape;
                 st.rotation = rot6d_from(rot6d);
                 st.translation = translation;
                 return decode_part(s, st);
             },
             py::arg("part"), py::arg("shape"), py::arg("rot6d"), py::arg("translation"))
        .def("regress_joints",
             [](const HppmModel& model, int p, const Points3& vertices) {
                 return regress_joints(model.regressors.at(p), vertices);
             },
             py::arg("part"), py::arg("vertices"))
        .def("annotate",
             [](const HppmModel& model, const Points3& vertices, const std::string& mode) {
                 AnnotateOptions opt;
                 opt.mode = parse_fit_mode(mode);
                 Mesh body{vertices, model.templates.body.faces};
                 const SampleAnnotation ann = annotate_sample(model, body, CameraIntrinsics{}, opt);
                 py::list parts;
                 for (const auto& s : ann.parts)
                     parts.append(py::dict(py::arg("shape") = s.shape,
                                           py::arg("rot6d") = Eigen::Matrix<double, 6, 1>(s.rotation.vector()),
                                           py::arg("translation") = s.translation));
                 return parts;
             },
             py::arg("vertices"), py::arg("mode") = "rigid",
             "Per-part {shape, rot6d, translation} for a whole-body vertex array.")
        .def("fuse",
             [](const HppmModel& model, const std::vector<Points3>& parts, const std::vector<bool>& visible) {
                 const FusedMesh f = gradual_connect(model.templates, FusionInput{parts, visible});
                 return py::make_tuple(f.template_ids, f.vertices, faces_to_array(f.faces));
             },
             py::arg("parts"), py::arg("visible"), "Returns (template_ids, vertices, faces).");

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::vector<const char*> argv{"hppm"};
              for (const auto& a : args)
                  argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(code, out.str(), err.str());
          },
          py::arg("args"), "Runs the hppm tool in-process; returns (exit_code, stdout, stderr).");
}
