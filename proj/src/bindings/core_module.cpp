// Copyright 2025 The postvar developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "postvar/bounds.hpp"
#include "postvar/features.hpp"
#include "postvar/head.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>

namespace py = pybind11;
using namespace postvar;

namespace {

StateVector state_from_amplitudes(int n, const std::vector<std::complex<double>>& amps) {
    return StateVector::from_amplitudes(n, amps);
}

Circuit encode_vector(const std::vector<double>& features, int n) {
    return encode_data(std::span<const double>(features.data(), features.size()), n);
}

Circuit ansatz_from_vector(const AnsatzSpec& spec, const std::vector<double>& theta) {
    return build_ansatz(spec, std::span<const double>(theta.data(), theta.size()));
}

double estimate_pauli_list(const std::vector<ShadowRecord>& records, const PauliString& p,
                           int groups) {
    return estimate_pauli(std::span<const ShadowRecord>(records.data(), records.size()),
                          p, groups);
}

Dataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels) {
    if (features.rows() != labels.size()) {
        throw std::invalid_argument("feature rows must match the label count");
    }
    Dataset dataset;
    dataset.features = features;
    dataset.labels = labels;
    return dataset;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "post-variational quantum neural network toolkit (C++ core)";
#ifdef POSTVAR_VERSION
    m.attr("__version__") = POSTVAR_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    // ---- simulation ----
    py::class_<Gate> gate(m, "Gate");
    gate.def_readonly("angle", &Gate::angle)
        .def_readonly("q0", &Gate::q0)
        .def_readonly("q1", &Gate::q1)
        .def_static("rx", &Gate::rx, py::arg("angle"), py::arg("qubit"))
        .def_static("ry", &Gate::ry, py::arg("angle"), py::arg("qubit"))
        .def_static("rz", &Gate::rz, py::arg("angle"), py::arg("qubit"))
        .def_static("cnot", &Gate::cnot, py::arg("control"), py::arg("target"));

    py::class_<Circuit>(m, "Circuit")
        .def(py::init<int>(), py::arg("num_qubits") = 1)
        .def_readonly("num_qubits", &Circuit::num_qubits)
        .def_readonly("gates", &Circuit::gates)
        .def("append", &Circuit::append, py::return_value_policy::reference_internal)
        .def("__len__", [](const Circuit& c) { return c.gates.size(); });
    m.def("adjoint", &adjoint, py::arg("circuit"));
    m.def("dense_unitary", &dense_unitary, py::arg("circuit"));

    py::class_<StateVector>(m, "StateVector")
        .def_static("zero_state", &StateVector::zero_state, py::arg("num_qubits"))
        .def_static("from_amplitudes", &state_from_amplitudes, py::arg("num_qubits"),
                    py::arg("amplitudes"))
        .def_property_readonly("num_qubits", &StateVector::num_qubits)
        .def_property_readonly("amplitudes",
                               [](const StateVector& s) { return s.amplitudes(); })
        .def("norm", &StateVector::norm);

    m.def("apply_gate", &apply_gate, py::arg("state"), py::arg("gate"));
    m.def("run_circuit", &run_circuit, py::arg("state"), py::arg("circuit"));
    m.def("expectation", &expectation, py::arg("state"), py::arg("pauli"));
    m.def("state_fidelity", &state_fidelity, py::arg("a"), py::arg("b"));
    m.def(
        "sample_in_basis",
        [](const StateVector& state, const std::string& basis, std::uint64_t seed) {
            Rng rng(seed);
            const std::uint64_t bits = sample_in_basis(state, basis, rng);
            std::vector<int> out(static_cast<std::size_t>(state.num_qubits()));
            for (int q = 0; q < state.num_qubits(); ++q) {
                out[static_cast<std::size_t>(q)] = static_cast<int>((bits >> q) & 1ULL);
            }
            return out;
        },
        py::arg("state"), py::arg("basis"), py::arg("seed"),
        "One outcome per qubit after rotating into the requested basis.");

    // ---- pauli algebra ----
    py::class_<PauliString>(m, "PauliString")
        .def(py::init(&PauliString::from_word), py::arg("word"))
        .def_static("identity", &PauliString::identity, py::arg("num_qubits"))
        .def_property_readonly("num_qubits", &PauliString::num_qubits)
        .def_property_readonly("locality", &PauliString::locality)
        .def("word", &PauliString::word)
        .def("support", &PauliString::support)
        .def("__str__", &PauliString::word)
        .def("__eq__", [](const PauliString& a, const PauliString& b) { return a == b; });

    m.def("enumerate_local_paulis", &enumerate_local_paulis, py::arg("num_qubits"),
          py::arg("locality_cap"));
    m.def("count_local_paulis", &count_local_paulis, py::arg("num_qubits"),
          py::arg("locality_cap"));
    m.def("shadow_norm_bound", &shadow_norm_bound, py::arg("pauli"));
    m.def("pauli_dense_matrix", &pauli_dense_matrix, py::arg("pauli"));

    py::class_<PauliDecomposition>(m, "PauliDecomposition")
        .def_readonly("num_qubits", &PauliDecomposition::num_qubits)
        .def_readonly("terms", &PauliDecomposition::terms)
        .def("reconstruct", &PauliDecomposition::reconstruct)
        .def("coefficient", &PauliDecomposition::coefficient, py::arg("pauli"));
    m.def("pauli_decompose", &pauli_decompose, py::arg("hermitian"));

    // ---- circuits ----
    py::class_<ShiftVector>(m, "ShiftVector")
        .def_static("zeros", &ShiftVector::zeros, py::arg("parameter_count"))
        .def_static("from_signs", &ShiftVector::from_signs, py::arg("signs"))
        .def_readonly("values", &ShiftVector::values)
        .def("order", &ShiftVector::order)
        .def("signs", &ShiftVector::signs);

    py::enum_<EntanglerClosure>(m, "EntanglerClosure")
        .value("ALTERNATING_RINGS", EntanglerClosure::kAlternatingRings)
        .value("FORWARD_RINGS", EntanglerClosure::kForwardRings);

    py::class_<AnsatzSpec>(m, "AnsatzSpec")
        .def_readonly("num_qubits", &AnsatzSpec::num_qubits)
        .def_readonly("layers", &AnsatzSpec::layers)
        .def_readonly("closure", &AnsatzSpec::closure)
        .def_property_readonly("parameter_count", &AnsatzSpec::parameter_count);
    m.def("make_ansatz_spec", &make_ansatz_spec, py::arg("num_qubits"),
          py::arg("layers") = 2,
          py::arg("closure") = EntanglerClosure::kAlternatingRings);

    m.def("encode_data", &encode_vector, py::arg("features"), py::arg("num_qubits"));
    m.def("build_ansatz", &ansatz_from_vector, py::arg("spec"), py::arg("theta"));
    m.def("enumerate_shifts", &enumerate_shifts, py::arg("parameter_count"),
          py::arg("order_cap"));
    m.def("count_shifts", &count_shifts, py::arg("parameter_count"), py::arg("order_cap"));

    // ---- shadows ----
    py::class_<ShadowRecord>(m, "ShadowRecord")
        .def_property_readonly("basis", &ShadowRecord::basis_word)
        .def_property_readonly("outcome", &ShadowRecord::outcome_string);
    m.def("collect_shadows", &collect_shadows, py::arg("prep"), py::arg("count"),
          py::arg("seed"));
    m.def("estimate_pauli", &estimate_pauli_list, py::arg("records"), py::arg("pauli"),
          py::arg("groups"));

    py::enum_<Strategy>(m, "Strategy")
        .value("ANSATZ_EXPANSION", Strategy::kAnsatzExpansion)
        .value("OBSERVABLE_CONSTRUCTION", Strategy::kObservableConstruction)
        .value("HYBRID", Strategy::kHybrid);
    py::enum_<MeasureMode>(m, "MeasureMode")
        .value("DIRECT", MeasureMode::kDirect)
        .value("SHADOWS", MeasureMode::kShadows);

    py::class_<BudgetPlan>(m, "BudgetPlan")
        .def_readonly("strategy", &BudgetPlan::strategy)
        .def_readonly("mode", &BudgetPlan::mode)
        .def_readonly("ansatz_count", &BudgetPlan::ansatz_count)
        .def_readonly("observable_count", &BudgetPlan::observable_count)
        .def_readonly("neuron_count", &BudgetPlan::neuron_count)
        .def_readonly("data_count", &BudgetPlan::data_count)
        .def_readonly("epsilon", &BudgetPlan::epsilon)
        .def_readonly("delta", &BudgetPlan::delta)
        .def_readonly("shadow_norm_max", &BudgetPlan::shadow_norm_max)
        .def_readonly("shots_per_unit", &BudgetPlan::shots_per_unit)
        .def_readonly("groups", &BudgetPlan::groups)
        .def_readonly("total_shots", &BudgetPlan::total_shots)
        .def_readonly("favored", &BudgetPlan::favored);
    m.def("plan_budget", &plan_budget, py::arg("strategy"), py::arg("mode"),
          py::arg("ansatz_count"), py::arg("observable_count"), py::arg("qubit_count"),
          py::arg("data_count"), py::arg("epsilon"), py::arg("delta"),
          py::arg("shadow_norm_max"), py::arg("shadow_constant") = 34.0);

    // ---- data ----
    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("features"), py::arg("labels"))
        .def_readonly("features", &Dataset::features)
        .def_readonly("labels", &Dataset::labels)
        .def("__len__", [](const Dataset& d) { return d.size(); });

    py::enum_<SynthKind>(m, "SynthKind")
        .value("BLOBS", SynthKind::kBlobs)
        .value("PARITY", SynthKind::kParity)
        .value("LINEAR", SynthKind::kLinear);

    py::class_<SynthParams>(m, "SynthParams")
        .def(py::init<>())
        .def_readwrite("count", &SynthParams::count)
        .def_readwrite("feature_count", &SynthParams::feature_count)
        .def_readwrite("qubits", &SynthParams::qubits)
        .def_readwrite("noise", &SynthParams::noise)
        .def_readwrite("label_noise", &SynthParams::label_noise)
        .def_readwrite("low", &SynthParams::low)
        .def_readwrite("high", &SynthParams::high);

    py::class_<SynthDataset>(m, "SynthDataset")
        .def_readonly("dataset", &SynthDataset::dataset)
        .def_readonly("planted_weights", &SynthDataset::planted_weights);
    m.def("synth_dataset", &synth_dataset, py::arg("kind"), py::arg("params"),
          py::arg("seed"));
    m.def(
        "preprocess_image",
        [](const std::vector<std::uint8_t>& pixels) {
            const auto features =
                preprocess_image(std::span<const std::uint8_t>(pixels.data(), pixels.size()));
            return std::vector<double>(features.begin(), features.end());
        },
        py::arg("pixels"), "28x28 grayscale pixels -> 16 encoder angles.");
    m.def("load_idx_images", &load_idx_images, py::arg("images_path"),
          py::arg("labels_path"));
    py::class_<RawImages>(m, "RawImages")
        .def_readonly("rows", &RawImages::rows)
        .def_readonly("cols", &RawImages::cols)
        .def_readonly("pixels", &RawImages::pixels)
        .def_readonly("labels", &RawImages::labels);

    // ---- features ----
    py::class_<NeuronSpec>(m, "NeuronSpec")
        .def_readonly("shift_index", &NeuronSpec::shift_index)
        .def_readonly("pauli_index", &NeuronSpec::pauli_index);

    py::class_<NeuronRegistry>(m, "NeuronRegistry")
        .def(py::init([](const AnsatzSpec& ansatz, std::vector<ShiftVector> shifts,
                         std::vector<PauliString> observables) {
                 NeuronRegistry registry{ansatz, std::move(shifts), std::move(observables)};
                 return registry;
             }),
             py::arg("ansatz"), py::arg("shifts"), py::arg("observables"))
        .def_readonly("ansatz", &NeuronRegistry::ansatz)
        .def_readonly("shifts", &NeuronRegistry::shifts)
        .def_readonly("observables", &NeuronRegistry::observables)
        .def_property_readonly("neuron_count", &NeuronRegistry::neuron_count);

    py::class_<FeatureMatrix>(m, "FeatureMatrix")
        .def_readonly("Q", &FeatureMatrix::Q)
        .def_readonly("row_ids", &FeatureMatrix::row_ids)
        .def_readonly("col_specs", &FeatureMatrix::col_specs);

    m.def("generate_features_exact", &generate_features_exact, py::arg("dataset"),
          py::arg("registry"), py::arg("workers") = 0);
    m.def("generate_features_sampled", &generate_features_sampled, py::arg("dataset"),
          py::arg("registry"), py::arg("plan"), py::arg("seed"), py::arg("workers") = 0);

    py::class_<PruneDecision>(m, "PruneDecision")
        .def_readonly("score", &PruneDecision::score)
        .def_readonly("drop", &PruneDecision::drop);
    m.def("prune_by_gradient", &prune_by_gradient, py::arg("dataset"), py::arg("ansatz"),
          py::arg("parameter"), py::arg("base"), py::arg("observable"), py::arg("tau_g"));
    m.def("prune_by_fidelity", &prune_by_fidelity, py::arg("dataset"), py::arg("ansatz"),
          py::arg("parameter"), py::arg("base"), py::arg("tau_f"));
    m.def("apply_shift_pruning", &apply_shift_pruning, py::arg("shifts"),
          py::arg("parameter"), py::arg("base"));

    // ---- heads ----
    py::enum_<LossKind>(m, "LossKind")
        .value("RMSE", LossKind::kRmse)
        .value("MAE", LossKind::kMae)
        .value("BCE", LossKind::kBce);
    m.def("compute_loss", &compute_loss, py::arg("kind"), py::arg("y"), py::arg("yhat"));

    py::class_<Constraint>(m, "Constraint")
        .def_static("none", &Constraint::none)
        .def_static("ridge", &Constraint::ridge, py::arg("ridge_lambda"))
        .def_static("ball", &Constraint::ball);

    py::class_<RegressionModel>(m, "RegressionModel")
        .def_readonly("coefficients", &RegressionModel::coefficients)
        .def_property_readonly("intercept", [](const RegressionModel& model) {
            return model.has_intercept() ? std::optional<double>(model.intercept(0))
                                         : std::nullopt;
        });

    m.def("fit_least_squares", &fit_least_squares, py::arg("Q"), py::arg("y"),
          py::arg("intercept") = false);
    m.def(
        "fit_constrained",
        [](const Eigen::MatrixXd& Q, const Eigen::VectorXd& y, const Constraint& c,
           bool intercept) {
            FitOptions options;
            options.intercept = intercept;
            return fit_constrained(Q, y, c, options);
        },
        py::arg("Q"), py::arg("y"), py::arg("constraint"), py::arg("intercept") = false);
    m.def(
        "fit_logistic",
        [](const Eigen::MatrixXd& Q, const Eigen::VectorXd& y, const Constraint& c,
           bool intercept) {
            FitOptions options;
            options.intercept = intercept;
            return fit_logistic(Q, y, c, options);
        },
        py::arg("Q"), py::arg("y"), py::arg("constraint"), py::arg("intercept") = false);
    m.def(
        "fit_softmax",
        [](const Eigen::MatrixXd& Q, const Eigen::VectorXi& labels, int num_classes,
           const Constraint& c, bool intercept) {
            FitOptions options;
            options.intercept = intercept;
            return fit_softmax(Q, labels, num_classes, c, options);
        },
        py::arg("Q"), py::arg("labels"), py::arg("num_classes"), py::arg("constraint"),
        py::arg("intercept") = false);
    m.def("predict", &predict, py::arg("model"), py::arg("Q"));
    m.def("accuracy", &accuracy, py::arg("model"), py::arg("Q"), py::arg("labels"));

    // ---- bounds ----
    py::class_<Theorem1Threshold>(m, "Theorem1Threshold")
        .def_readonly("rank_branch", &Theorem1Threshold::rank_branch)
        .def_readonly("loss_branch", &Theorem1Threshold::loss_branch)
        .def_readonly("value", &Theorem1Threshold::value);
    m.def("theorem1_threshold", &theorem1_threshold, py::arg("Q"), py::arg("Qhat"),
          py::arg("y"), py::arg("epsilon"));
    m.def("theorem2_threshold", &theorem2_threshold, py::arg("m"), py::arg("epsilon"));
    m.def("rank_lemma_premise", &rank_lemma_premise, py::arg("A"), py::arg("B"));

    py::class_<WedinGap>(m, "WedinGap")
        .def_readonly("lhs", &WedinGap::lhs)
        .def_readonly("rhs", &WedinGap::rhs);
    m.def("wedin_gap", &wedin_gap, py::arg("A"), py::arg("B"));

    py::enum_<GapMode>(m, "GapMode")
        .value("UNCONSTRAINED", GapMode::kUnconstrained)
        .value("BALL", GapMode::kBall)
        .value("LOGISTIC_BALL", GapMode::kLogisticBall);
    py::class_<PerturbationReport>(m, "PerturbationReport")
        .def_readonly("theorem", &PerturbationReport::theorem)
        .def_readonly("max_norm_threshold", &PerturbationReport::max_norm_threshold)
        .def_readonly("observed_max_norm", &PerturbationReport::observed_max_norm)
        .def_readonly("delta_loss", &PerturbationReport::delta_loss)
        .def_readonly("epsilon", &PerturbationReport::epsilon)
        .def_readonly("satisfied", &PerturbationReport::satisfied);
    m.def("verify_loss_gap", &verify_loss_gap, py::arg("Q"), py::arg("Qhat"), py::arg("y"),
          py::arg("mode"), py::arg("epsilon"));
}
