#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "ttclass/arr.hpp"
#include "ttclass/dataset.hpp"
#include "ttclass/features.hpp"
#include "ttclass/linalg.hpp"
#include "ttclass/mandy.hpp"
#include "ttclass/model_io.hpp"
#include "ttclass/synth.hpp"
#include "ttclass/tensor_train.hpp"

namespace py = pybind11;
using namespace ttclass;

namespace {

py::array_t<double> core_to_array(const TTCore& core) {
    py::array_t<double> out({core.r_prev(), core.n(), core.r_next()});
    std::copy(core.flat().begin(), core.flat().end(), out.mutable_data());
    return out;
}

TTCore core_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3) throw ValidationError("core arrays must have 3 dimensions");
    TTCore core(a.shape(0), a.shape(1), a.shape(2));
    std::copy(a.data(), a.data() + a.size(), core.flat().begin());
    return core;
}

TensorTrain train_from_arrays(const std::vector<py::array_t<double, py::array::c_style | py::array::forcecast>>& arrays) {
    std::vector<TTCore> cores;
    cores.reserve(arrays.size());
    for (const auto& a : arrays) cores.push_back(core_from_array(a));
    return TensorTrain(std::move(cores));
}

py::array_t<double> dense_to_array(const DenseTensor& t) {
    std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
    py::array_t<double> out(shape);
    std::copy(t.values.begin(), t.values.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_ttclass, m) {
    m.doc() = "tensor-train image classification: kernel regression and alternating ridge regression";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    py::class_<TensorTrain>(m, "TensorTrain")
        .def(py::init(&train_from_arrays), py::arg("cores"))
        .def_property_readonly("order", &TensorTrain::order)
        .def_property_readonly("mode_dims", &TensorTrain::mode_dims)
        .def_property_readonly("ranks", &TensorTrain::ranks)
        .def("core", [](const TensorTrain& tt, Index mu) { return core_to_array(tt.core(mu)); })
        .def("cores",
             [](const TensorTrain& tt) {
                 std::vector<py::array_t<double>> out;
                 for (const TTCore& c : tt.cores()) out.push_back(core_to_array(c));
                 return out;
             })
        .def("orthonormalize_left", &orthonormalize_left, py::arg("upto"))
        .def("orthonormalize_right", &orthonormalize_right, py::arg("downto"))
        .def("contract_full",
             [](const TensorTrain& tt, Index cap) { return dense_to_array(contract_full(tt, cap)); },
             py::arg("cap") = kDenseCap)
        .def("evaluate", &evaluate, py::arg("features"))
        .def("save",
             [](const TensorTrain& tt, const std::string& path) {
                 std::ofstream out(path, std::ios::binary);
                 if (!out) throw IoError("cannot write " + path);
                 save_tensor_train(out, tt);
             })
        .def_static("load", [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw IoError("cannot open " + path);
            return load_tensor_train(in);
        });

    m.def("direct_sum_labels", &direct_sum_labels, py::arg("parts"));

    py::class_<FeatureBasis>(m, "FeatureBasis")
        .def_static("trig", &FeatureBasis::trig, py::arg("d"), py::arg("alpha") = kDefaultAlpha)
        .def_property_readonly("alpha", &FeatureBasis::alpha)
        .def_property_readonly("coordinate_count", &FeatureBasis::coordinate_count)
        .def_property_readonly("dims", &FeatureBasis::dims);

    m.def("apply_basis", &apply_basis, py::arg("basis"), py::arg("x"));
    m.def(
        "build_feature_matrices",
        [](const FeatureBasis& basis, const Matrix& X) { return build_feature_matrices(basis, X).factors; },
        py::arg("basis"), py::arg("X"));
    m.def("local_gram", &local_gram, py::arg("F_mu"));
    m.def(
        "materialize_psi_hat",
        [](const FeatureBasis& basis, const Matrix& X, Index shift_index) {
            return dense_to_array(materialize_psi_hat(basis, X, shift_index));
        },
        py::arg("basis"), py::arg("X"), py::arg("shift_index"));

    m.def(
        "build_gram",
        [](const std::vector<Matrix>& factors, Index cap) {
            FeatureMatrixSet set{factors};
            return mandy::build_gram(set, cap).values;
        },
        py::arg("factors"), py::arg("gram_cap") = mandy::kDefaultGramCap);

    py::class_<mandy::KernelModel>(m, "KernelModel")
        .def_readonly("Z", &mandy::KernelModel::Z)
        .def_readonly("ridge_used", &mandy::KernelModel::ridge_used)
        .def("decision_values",
             [](const mandy::KernelModel& model, const Matrix& X) {
                 return mandy::decision_values(model, X);
             })
        .def("classify", [](const mandy::KernelModel& model, const Matrix& X) {
            const Matrix scores = mandy::decision_values(model, X);
            std::vector<Index> labels;
            for (Index j = 0; j < scores.cols(); ++j)
                labels.push_back(mandy::argmax_label(scores.col(j)));
            return labels;
        });

    m.def("mandy_fit", &mandy::fit, py::arg("X"), py::arg("Y"), py::arg("basis"),
          py::arg("ridge") = 0.0, py::arg("gram_cap") = mandy::kDefaultGramCap);

    py::class_<arr::ArrConfig>(m, "ArrConfig")
        .def(py::init<>())
        .def_readwrite("rank", &arr::ArrConfig::rank)
        .def_readwrite("sweeps", &arr::ArrConfig::sweeps)
        .def_readwrite("svd_threshold", &arr::ArrConfig::svd_threshold)
        .def_readwrite("subproblem_ridge", &arr::ArrConfig::subproblem_ridge)
        .def_readwrite("seed", &arr::ArrConfig::seed)
        .def_readwrite("tol", &arr::ArrConfig::tol);

    py::class_<arr::TtModel>(m, "TtModel")
        .def_property_readonly("parts", [](const arr::TtModel& model) { return model.parts; })
        .def_property_readonly("xi", [](const arr::TtModel& model) { return model.xi; })
        .def("decision_values",
             [](const arr::TtModel& model, const Matrix& X) { return arr::decision_values(model, X); })
        .def("classify", [](const arr::TtModel& model, const Matrix& X) {
            const Matrix scores = arr::decision_values(model, X);
            std::vector<Index> labels;
            for (Index j = 0; j < scores.cols(); ++j)
                labels.push_back(mandy::argmax_label(scores.col(j)));
            return labels;
        });

    m.def(
        "arr_fit",
        [](const Matrix& X, const Matrix& Y, const FeatureBasis& basis, const arr::ArrConfig& config,
           int workers) { return arr::fit(X, Y, basis, config, nullptr, workers); },
        py::arg("X"), py::arg("Y"), py::arg("basis"), py::arg("config") = arr::ArrConfig{},
        py::arg("workers") = 0);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("X", &Dataset::X)
        .def_readonly("Y", &Dataset::Y)
        .def_readonly("height", &Dataset::height)
        .def_readonly("width", &Dataset::width)
        .def_readonly("class_names", &Dataset::class_names)
        .def("label_of", &Dataset::label_of);

    m.def("load_idx", &load_idx, py::arg("images_path"), py::arg("labels_path"),
          py::arg("class_names") = digit_class_names());
    m.def(
        "export_csv",
        [](const Dataset& ds, const std::string& path) {
            std::ofstream out(path);
            if (!out) throw IoError("cannot write " + path);
            export_csv(ds, out);
        },
        py::arg("dataset"), py::arg("path"));
    m.def("save_idx", &save_idx, py::arg("dataset"), py::arg("images_path"), py::arg("labels_path"));
    m.def("reduce_pool2", py::overload_cast<const Dataset&>(&reduce_pool2), py::arg("dataset"));
    m.def("subsample", &subsample, py::arg("dataset"), py::arg("count"), py::arg("seed"));
    m.def("make_synthetic_digits", &make_synthetic_digits, py::arg("count"), py::arg("seed"));

    py::class_<linalg::TruncatedSvd>(m, "TruncatedSvd")
        .def_readonly("U", &linalg::TruncatedSvd::U)
        .def_readonly("singular_values", &linalg::TruncatedSvd::singular_values)
        .def_readonly("Vt", &linalg::TruncatedSvd::Vt);
    m.def("truncated_svd", &linalg::truncated_svd, py::arg("A"), py::arg("rel_threshold"));
    m.def("tsvd_least_squares", &linalg::tsvd_least_squares, py::arg("M"), py::arg("w"),
          py::arg("rel_threshold"));
    m.def("solve_gram", &linalg::solve_gram, py::arg("G"), py::arg("Y"), py::arg("ridge") = 0.0);
}
