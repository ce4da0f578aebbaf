// Python bindings: container I/O, labeling, CKA, t-tests and the CLI.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "neuroscope/cli.hpp"
#include "neuroscope/cogstats.hpp"
#include "neuroscope/dissect.hpp"
#include "neuroscope/error.hpp"
#include "neuroscope/repr_analysis.hpp"
#include "neuroscope/tensor_store.hpp"

namespace py = pybind11;
using namespace neuroscope;

namespace {

py::array_t<float> tensor_values(const ActivationTensor& t) {
  std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
  py::array_t<float> out(shape);
  std::copy(t.values.begin(), t.values.end(), out.mutable_data());
  return out;
}

ActivationTensor make_tensor(std::string model_id, std::string layer_id, std::vector<std::string> image_ids,
                             py::array_t<float, py::array::c_style | py::array::forcecast> values) {
  ActivationTensor t;
  t.model_id = std::move(model_id);
  t.layer_id = std::move(layer_id);
  t.image_ids = std::move(image_ids);
  for (py::ssize_t d = 0; d < values.ndim(); ++d) t.shape.push_back(static_cast<std::size_t>(values.shape(d)));
  t.values.assign(values.data(), values.data() + values.size());
  t.validate();
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "neuroscope core bindings";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<CorruptionError>(m, "CorruptionError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<InputError>(m, "InputError", error.ptr());
  py::register_exception<ComputationError>(m, "ComputationError", error.ptr());
  py::register_exception<ConceptNotDetected>(m, "ConceptNotDetected", error.ptr());

  py::class_<ActivationTensor>(m, "ActivationTensor")
      .def(py::init(&make_tensor), py::arg("model_id"), py::arg("layer_id"), py::arg("image_ids"),
           py::arg("values"))
      .def_readonly("model_id", &ActivationTensor::model_id)
      .def_readonly("layer_id", &ActivationTensor::layer_id)
      .def_readonly("image_ids", &ActivationTensor::image_ids)
      .def_readonly("shape", &ActivationTensor::shape)
      .def_property_readonly("values", &tensor_values)
      .def("__eq__", [](const ActivationTensor& a, const ActivationTensor& b) { return a == b; });

  m.def("encode_activation_tensor",
        [](const ActivationTensor& t) { return py::bytes(encode_activation_tensor(t)); });
  m.def("decode_activation_tensor", [](py::bytes data) {
    return decode_activation_tensor(std::string_view(data));
  });
  m.def("read_activation_tensor", &read_activation_tensor, py::arg("path"));
  m.def("write_activation_tensor", &write_activation_tensor, py::arg("tensor"), py::arg("path"));

  py::class_<NeuronLabel>(m, "NeuronLabel")
      .def_property_readonly("layer_id", [](const NeuronLabel& l) { return l.neuron.layer_id; })
      .def_property_readonly("unit", [](const NeuronLabel& l) { return l.neuron.unit; })
      .def_readonly("concept", &NeuronLabel::concept_name)
      .def_readonly("score", &NeuronLabel::score)
      .def_property_readonly("dead", &NeuronLabel::is_dead);
  m.def("read_labels", &read_labels, py::arg("path"));

  m.def("linear_cka", py::overload_cast<const Eigen::MatrixXd&, const Eigen::MatrixXd&>(&linear_cka),
        py::arg("x"), py::arg("y"));

  m.def(
      "ttest",
      [](const std::vector<double>& a, const std::vector<double>& b, bool welch) {
        const auto r = two_sample_ttest(a, b, welch ? TTestVariant::kWelch : TTestVariant::kPooled);
        return py::dict(py::arg("mean_a") = r.mean_a, py::arg("mean_b") = r.mean_b, py::arg("t") = r.t,
                        py::arg("df") = r.df, py::arg("p") = r.p);
      },
      py::arg("a"), py::arg("b"), py::arg("welch") = false);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "neuroscope");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
