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

#include "postvar/features.hpp"

#include "postvar/parallel.hpp"
#include "postvar/rng.hpp"
#include "postvar/textio.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace postvar {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kFidelityAgreement = 1e-10;

StateVector encoded_state(const Dataset& dataset, Eigen::Index row, int num_qubits) {
    const Eigen::VectorXd features = dataset.features.row(row);
    const Circuit encoder =
        encode_data(std::span<const double>(features.data(),
                                            static_cast<std::size_t>(features.size())),
                    num_qubits);
    return run_circuit(StateVector::zero_state(num_qubits), encoder);
}

std::vector<std::int64_t> row_ids_of(const Dataset& dataset) {
    if (!dataset.ids.empty()) {
        return dataset.ids;
    }
    std::vector<std::int64_t> ids(static_cast<std::size_t>(dataset.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        ids[i] = static_cast<std::int64_t>(i);
    }
    return ids;
}

std::vector<NeuronSpec> canonical_col_specs(const NeuronRegistry& registry) {
    std::vector<NeuronSpec> specs;
    specs.reserve(static_cast<std::size_t>(registry.neuron_count()));
    for (int a = 0; a < static_cast<int>(registry.shifts.size()); ++a) {
        for (int b = 0; b < static_cast<int>(registry.observables.size()); ++b) {
            specs.push_back({a, b});
        }
    }
    return specs;
}

// Measurement basis word matching a Pauli's support letters; identity
// positions measure Z (their bit never enters the outcome product).
std::string measurement_basis(const PauliString& pauli) {
    std::string basis(static_cast<std::size_t>(pauli.num_qubits()), 'Z');
    for (const int q : pauli.support()) {
        basis[static_cast<std::size_t>(q)] = pauli.letter(q);
    }
    return basis;
}

double single_shot_mean(const StateVector& state, const PauliString& pauli,
                        std::int64_t shots, Rng& rng) {
    if (pauli.is_identity()) {
        return 1.0;
    }
    const std::vector<double> probs = basis_probabilities(state, measurement_basis(pauli));
    const std::vector<int> support = pauli.support();
    const int n = pauli.num_qubits();
    std::int64_t sum = 0;
    for (std::int64_t shot = 0; shot < shots; ++shot) {
        const std::uint64_t index = sample_index(probs, rng);
        int parity = 0;
        for (const int q : support) {
            parity ^= static_cast<int>((index >> (n - 1 - q)) & 1ULL);
        }
        sum += parity ? -1 : 1;
    }
    return static_cast<double>(sum) / static_cast<double>(shots);
}

ShiftVector shifted(const ShiftVector& base, int parameter, double value) {
    ShiftVector result = base;
    result.values[static_cast<std::size_t>(parameter)] = value;
    return result;
}

void check_prune_inputs(const Dataset& dataset, const AnsatzSpec& ansatz, int parameter,
                        const ShiftVector& base) {
    if (dataset.size() == 0) {
        throw std::invalid_argument("pruning needs at least one datum");
    }
    if (base.size() != ansatz.parameter_count()) {
        throw std::invalid_argument("base shift length does not match the ansatz");
    }
    validate_shift(base);
    if (parameter < 0 || parameter >= ansatz.parameter_count()) {
        throw std::invalid_argument("shift parameter index out of range");
    }
    if (base.values[static_cast<std::size_t>(parameter)] != 0.0) {
        throw std::invalid_argument("pruned parameter must be unshifted in the base vector");
    }
    if (dataset.feature_count() % ansatz.num_qubits != 0) {
        throw std::invalid_argument("feature count is not encodable on the ansatz qubits");
    }
}

}  // namespace

void validate_registry(const NeuronRegistry& registry, Eigen::Index feature_count) {
    if (registry.shifts.empty()) {
        throw std::invalid_argument("shift registry is empty");
    }
    if (registry.observables.empty()) {
        throw std::invalid_argument("observable registry is empty");
    }
    for (const ShiftVector& shift : registry.shifts) {
        validate_shift(shift);
        if (shift.size() != registry.ansatz.parameter_count()) {
            throw std::invalid_argument("shift length does not match the ansatz");
        }
    }
    for (const PauliString& observable : registry.observables) {
        if (observable.num_qubits() != registry.ansatz.num_qubits) {
            throw std::invalid_argument("observable width does not match the ansatz");
        }
    }
    if (feature_count <= 0 || feature_count % registry.ansatz.num_qubits != 0) {
        throw std::invalid_argument("feature count is not encodable on the ansatz qubits");
    }
}

std::string to_string(FeatureGenMode mode) {
    switch (mode) {
        case FeatureGenMode::kExact:
            return "exact";
        case FeatureGenMode::kDirect:
            return "direct";
        case FeatureGenMode::kShadows:
            return "shadows";
    }
    return "?";
}

FeatureMatrix generate_features_exact(const Dataset& dataset,
                                      const NeuronRegistry& registry, unsigned workers) {
    validate_registry(registry, dataset.feature_count());
    const auto d = dataset.size();
    const auto p = static_cast<Eigen::Index>(registry.shifts.size());
    const auto q = static_cast<Eigen::Index>(registry.observables.size());

    FeatureMatrix features;
    features.Q.resize(d, p * q);
    features.row_ids = row_ids_of(dataset);
    features.col_specs = canonical_col_specs(registry);
    features.mode = FeatureGenMode::kExact;

    // One (datum, shift) block per work item; the prepared state is shared
    // by all q observables of the block.
    parallel_for(static_cast<std::size_t>(d * p), workers, [&](std::size_t item) {
        const auto i = static_cast<Eigen::Index>(item) / p;
        const auto a = static_cast<Eigen::Index>(item) % p;
        const StateVector encoded = encoded_state(dataset, i, registry.ansatz.num_qubits);
        const Circuit ansatz =
            build_ansatz(registry.ansatz, registry.shifts[static_cast<std::size_t>(a)]);
        const StateVector state = run_circuit(encoded, ansatz);
        for (Eigen::Index b = 0; b < q; ++b) {
            features.Q(i, a * q + b) =
                expectation(state, registry.observables[static_cast<std::size_t>(b)]);
        }
    });
    return features;
}

FeatureMatrix generate_features_sampled(const Dataset& dataset,
                                        const NeuronRegistry& registry,
                                        const BudgetPlan& plan, std::uint64_t seed,
                                        unsigned workers) {
    validate_registry(registry, dataset.feature_count());
    const auto d = dataset.size();
    const auto p = static_cast<Eigen::Index>(registry.shifts.size());
    const auto q = static_cast<Eigen::Index>(registry.observables.size());
    if (plan.ansatz_count != p || plan.observable_count != q || plan.data_count != d) {
        throw std::invalid_argument("budget plan does not match the registry and dataset");
    }

    FeatureMatrix features;
    features.Q.resize(d, p * q);
    features.row_ids = row_ids_of(dataset);
    features.col_specs = canonical_col_specs(registry);
    features.mode =
        plan.mode == MeasureMode::kDirect ? FeatureGenMode::kDirect : FeatureGenMode::kShadows;
    features.plan = plan;

    parallel_for(static_cast<std::size_t>(d * p), workers, [&](std::size_t item) {
        const auto i = static_cast<Eigen::Index>(item) / p;
        const auto a = static_cast<Eigen::Index>(item) % p;
        const StateVector encoded = encoded_state(dataset, i, registry.ansatz.num_qubits);
        const Circuit ansatz =
            build_ansatz(registry.ansatz, registry.shifts[static_cast<std::size_t>(a)]);
        const StateVector state = run_circuit(encoded, ansatz);
        const std::uint64_t block_seed = derive_seed(
            seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(a));

        if (plan.mode == MeasureMode::kDirect) {
            for (Eigen::Index b = 0; b < q; ++b) {
                Rng rng(derive_seed(block_seed, static_cast<std::uint64_t>(b)));
                features.Q(i, a * q + b) =
                    single_shot_mean(state, registry.observables[static_cast<std::size_t>(b)],
                                     plan.shots_per_unit, rng);
            }
        } else {
            // One record set amortised over the whole observable registry.
            Circuit prep(registry.ansatz.num_qubits);
            const Eigen::VectorXd row = dataset.features.row(i);
            prep = encode_data(
                std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
                registry.ansatz.num_qubits);
            for (const Gate& g : ansatz.gates) {
                prep.append(g);
            }
            const std::vector<ShadowRecord> records =
                collect_shadows(prep, plan.shots_per_unit * plan.groups, block_seed);
            const double limit = 1.0 + plan.epsilon;
            for (Eigen::Index b = 0; b < q; ++b) {
                const double estimate =
                    estimate_pauli(records, registry.observables[static_cast<std::size_t>(b)],
                                   static_cast<int>(plan.groups));
                features.Q(i, a * q + b) = std::clamp(estimate, -limit, limit);
            }
        }
    });
    return features;
}

PruneDecision prune_by_gradient(const Dataset& dataset, const AnsatzSpec& ansatz,
                                int parameter, const ShiftVector& base,
                                const PauliString& observable, double tau_g) {
    check_prune_inputs(dataset, ansatz, parameter, base);
    if (observable.num_qubits() != ansatz.num_qubits) {
        throw std::invalid_argument("observable width does not match the ansatz");
    }
    if (tau_g < 0.0) {
        throw std::invalid_argument("tau_g must be nonnegative");
    }
    const Circuit plus = build_ansatz(ansatz, shifted(base, parameter, kHalfPi));
    const Circuit minus = build_ansatz(ansatz, shifted(base, parameter, -kHalfPi));

    double total = 0.0;
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        const StateVector encoded = encoded_state(dataset, i, ansatz.num_qubits);
        const double gap = expectation(run_circuit(encoded, plus), observable) -
                           expectation(run_circuit(encoded, minus), observable);
        total += gap * gap;
    }
    const double score = total / static_cast<double>(dataset.size());
    return {score, score < tau_g};
}

PruneDecision prune_by_fidelity(const Dataset& dataset, const AnsatzSpec& ansatz,
                                int parameter, const ShiftVector& base, double tau_f) {
    check_prune_inputs(dataset, ansatz, parameter, base);
    if (tau_f < 0.0 || tau_f > 4.0) {
        throw std::invalid_argument("tau_f must lie in [0, 4]");
    }
    const Circuit plus = build_ansatz(ansatz, shifted(base, parameter, kHalfPi));
    const Circuit minus = build_ansatz(ansatz, shifted(base, parameter, -kHalfPi));

    double total = 0.0;
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        const Eigen::VectorXd row = dataset.features.row(i);
        const Circuit encoder = encode_data(
            std::span<const double>(row.data(), static_cast<std::size_t>(row.size())),
            ansatz.num_qubits);
        const StateVector encoded = run_circuit(StateVector::zero_state(ansatz.num_qubits), encoder);
        const double overlap_fidelity =
            state_fidelity(run_circuit(encoded, plus), run_circuit(encoded, minus));

        // Echo route: |<0|S^dag U^dag(+) U(-) S|0>|^2 must match.
        Circuit echo = encoder;
        for (const Gate& g : minus.gates) {
            echo.append(g);
        }
        const Circuit undo_plus = adjoint(plus);
        for (const Gate& g : undo_plus.gates) {
            echo.append(g);
        }
        const Circuit undo_encoder = adjoint(encoder);
        for (const Gate& g : undo_encoder.gates) {
            echo.append(g);
        }
        const StateVector echoed = run_circuit(StateVector::zero_state(ansatz.num_qubits), echo);
        const double zero_probability = std::norm(echoed.amplitudes()[0]);
        if (std::abs(zero_probability - overlap_fidelity) > kFidelityAgreement) {
            throw std::logic_error("fidelity routes disagree: overlap " +
                                   format_double(overlap_fidelity) + " vs echo " +
                                   format_double(zero_probability));
        }
        total += 4.0 * (1.0 - overlap_fidelity);
    }
    const double score = total / static_cast<double>(dataset.size());
    return {score, score < tau_f};
}

std::vector<ShiftVector> apply_shift_pruning(const std::vector<ShiftVector>& shifts,
                                             int parameter, const ShiftVector& base) {
    std::vector<ShiftVector> kept;
    kept.reserve(shifts.size());
    for (const ShiftVector& shift : shifts) {
        bool extends_base = shift.size() == base.size();
        if (extends_base) {
            for (int u = 0; u < base.size(); ++u) {
                if (base.values[static_cast<std::size_t>(u)] != 0.0 &&
                    shift.values[static_cast<std::size_t>(u)] !=
                        base.values[static_cast<std::size_t>(u)]) {
                    extends_base = false;
                    break;
                }
            }
        }
        const bool uses_parameter =
            parameter < shift.size() &&
            shift.values[static_cast<std::size_t>(parameter)] != 0.0;
        if (extends_base && uses_parameter) {
            continue;
        }
        kept.push_back(shift);
    }
    return kept;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& features,
                        const NeuronRegistry& registry, const Eigen::VectorXd& labels,
                        std::span<const std::string> extra_header) {
    if (labels.size() != features.Q.rows()) {
        throw std::invalid_argument("label count does not match the feature rows");
    }
    for (const std::string& line : extra_header) {
        out << "# " << line << "\n";
    }
    out << "id,label";
    for (const NeuronSpec& spec : features.col_specs) {
        out << ",s" << spec.shift_index << ':'
            << registry.observables[static_cast<std::size_t>(spec.pauli_index)].word();
    }
    out << "\n";
    for (Eigen::Index i = 0; i < features.Q.rows(); ++i) {
        out << features.row_ids[static_cast<std::size_t>(i)] << ','
            << format_double(labels(i));
        for (Eigen::Index j = 0; j < features.Q.cols(); ++j) {
            out << ',' << format_double(features.Q(i, j));
        }
        out << "\n";
    }
}

FeatureCsv read_features_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
        throw std::runtime_error("feature CSV must start with id,label columns");
    }

    FeatureCsv csv;
    csv.column_names.assign(header.begin() + 2, header.end());
    const auto width = static_cast<Eigen::Index>(csv.column_names.size());

    std::vector<double> labels;
    std::vector<double> cells;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != width + 2) {
            throw std::runtime_error("feature CSV row has wrong field count");
        }
        csv.ids.push_back(std::stoll(fields[0]));
        labels.push_back(parse_double(fields[1]));
        for (Eigen::Index j = 0; j < width; ++j) {
            cells.push_back(parse_double(fields[static_cast<std::size_t>(j) + 2]));
        }
    }
    const auto rows = static_cast<Eigen::Index>(labels.size());
    csv.Q.resize(rows, width);
    csv.labels.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        csv.labels(i) = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < width; ++j) {
            csv.Q(i, j) = cells[static_cast<std::size_t>(i * width + j)];
        }
    }
    return csv;
}

}  // namespace postvar
