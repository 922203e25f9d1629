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

#include "postvar/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace postvar {

namespace {

std::int64_t checked_ceil(double value, const char* what) {
    const double up = std::ceil(value);
    if (!(up >= 1.0) || up > 9.0e18) {
        throw std::overflow_error(std::string("budget term out of range: ") + what);
    }
    return static_cast<std::int64_t>(up);
}

std::int64_t checked_product(std::initializer_list<std::int64_t> factors) {
    unsigned __int128 acc = 1;
    for (const std::int64_t f : factors) {
        acc *= static_cast<unsigned __int128>(f);
        if (acc > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max())) {
            throw std::overflow_error("total shot count exceeds 64-bit range");
        }
    }
    return static_cast<std::int64_t>(acc);
}

}  // namespace

std::string ShadowRecord::basis_word() const {
    std::string out(num_qubits, 'Z');
    for (int q = 0; q < num_qubits; ++q) {
        out[static_cast<std::size_t>(q)] = basis_letter(q);
    }
    return out;
}

std::string ShadowRecord::outcome_string() const {
    return bits_to_string(outcome_bits, num_qubits);
}

std::vector<ShadowRecord> collect_shadows(const Circuit& prep, std::int64_t count,
                                          std::uint64_t seed) {
    if (count < 0) {
        throw std::invalid_argument("shadow count must be nonnegative");
    }
    const StateVector state = run_circuit(StateVector::zero_state(prep.num_qubits), prep);
    const int n = prep.num_qubits;

    std::vector<ShadowRecord> records(static_cast<std::size_t>(count));
    std::string basis(static_cast<std::size_t>(n), 'Z');
    for (std::int64_t t = 0; t < count; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::uint64_t basis_bits = 0;
        for (int q = 0; q < n; ++q) {
            const auto letter = rng.uniform_int(3);
            basis_bits |= letter << (2 * q);
            basis[static_cast<std::size_t>(q)] = letter == 0 ? 'X' : (letter == 1 ? 'Y' : 'Z');
        }
        ShadowRecord& record = records[static_cast<std::size_t>(t)];
        record.num_qubits = static_cast<std::uint8_t>(n);
        record.basis_bits = basis_bits;
        record.outcome_bits = sample_in_basis(state, basis, rng);
    }
    return records;
}

double estimate_pauli(std::span<const ShadowRecord> records, const PauliString& pauli,
                      int groups) {
    if (groups < 1) {
        throw std::invalid_argument("median-of-means needs at least one group");
    }
    const auto total = static_cast<std::int64_t>(records.size());
    if (total < groups) {
        throw std::runtime_error("fewer shadow records than estimator groups");
    }
    if (pauli.is_identity()) {
        return 1.0;
    }
    const std::vector<int> support = pauli.support();
    double weight = 1.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        weight *= 3.0;
    }

    std::vector<double> means(static_cast<std::size_t>(groups));
    for (int g = 0; g < groups; ++g) {
        const std::int64_t begin = total * g / groups;
        const std::int64_t end = total * (g + 1) / groups;
        double sum = 0.0;
        for (std::int64_t t = begin; t < end; ++t) {
            const ShadowRecord& record = records[static_cast<std::size_t>(t)];
            double value = weight;
            for (const int q : support) {
                if (record.basis_letter(q) != pauli.letter(q)) {
                    value = 0.0;
                    break;
                }
                if (record.outcome_bit(q)) {
                    value = -value;
                }
            }
            sum += value;
        }
        means[static_cast<std::size_t>(g)] = sum / static_cast<double>(end - begin);
    }

    std::sort(means.begin(), means.end());
    const std::size_t mid = means.size() / 2;
    if (means.size() % 2 == 1) {
        return means[mid];
    }
    return 0.5 * (means[mid - 1] + means[mid]);
}

void write_shadows(std::ostream& out, std::span<const ShadowRecord> records,
                   int num_qubits, std::uint64_t seed) {
    out << "n=" << num_qubits << " T=" << records.size() << " seed=" << seed << "\n";
    for (const ShadowRecord& record : records) {
        out << record.basis_word() << '\t' << record.outcome_string() << "\n";
    }
}

ShadowFile read_shadows(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw std::runtime_error("shadow file is empty");
    }
    ShadowFile file;
    std::int64_t expected = -1;
    {
        std::istringstream fields(header);
        std::string field;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error("malformed shadow header field: " + field);
            }
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "n") {
                file.num_qubits = std::stoi(value);
            } else if (key == "T") {
                expected = std::stoll(value);
            } else if (key == "seed") {
                file.seed = std::stoull(value);
            } else {
                throw std::runtime_error("unknown shadow header key: " + key);
            }
        }
    }
    if (file.num_qubits < 1 || file.num_qubits > kQubitCap) {
        throw std::runtime_error("shadow header has an invalid qubit count");
    }

    std::string line;
    std::int64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos ||
            tab != static_cast<std::size_t>(file.num_qubits) ||
            line.size() != 2 * static_cast<std::size_t>(file.num_qubits) + 1) {
            throw std::runtime_error("malformed shadow record at line " +
                                     std::to_string(line_no));
        }
        ShadowRecord record;
        record.num_qubits = static_cast<std::uint8_t>(file.num_qubits);
        for (int q = 0; q < file.num_qubits; ++q) {
            const char letter = line[static_cast<std::size_t>(q)];
            std::uint64_t code = 0;
            if (letter == 'X') {
                code = 0;
            } else if (letter == 'Y') {
                code = 1;
            } else if (letter == 'Z') {
                code = 2;
            } else {
                throw std::runtime_error("invalid basis letter at line " +
                                         std::to_string(line_no));
            }
            record.basis_bits |= code << (2 * q);
            const char bit = line[tab + 1 + static_cast<std::size_t>(q)];
            if (bit == '1') {
                record.outcome_bits |= 1ULL << q;
            } else if (bit != '0') {
                throw std::runtime_error("invalid outcome bit at line " +
                                         std::to_string(line_no));
            }
        }
        file.records.push_back(record);
    }
    if (expected >= 0 && expected != static_cast<std::int64_t>(file.records.size())) {
        throw std::runtime_error("shadow record count does not match the header");
    }
    return file;
}

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::kAnsatzExpansion:
            return "ansatz-expansion";
        case Strategy::kObservableConstruction:
            return "observable-construction";
        case Strategy::kHybrid:
            return "hybrid";
    }
    return "?";
}

std::string to_string(MeasureMode m) {
    return m == MeasureMode::kDirect ? "direct" : "shadows";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "ansatz-expansion") return Strategy::kAnsatzExpansion;
    if (name == "observable-construction") return Strategy::kObservableConstruction;
    if (name == "hybrid") return Strategy::kHybrid;
    throw std::invalid_argument("unknown strategy: " + name);
}

MeasureMode measure_mode_from_string(const std::string& name) {
    if (name == "direct") return MeasureMode::kDirect;
    if (name == "shadows") return MeasureMode::kShadows;
    throw std::invalid_argument("unknown measurement mode: " + name);
}

BudgetPlan plan_budget(Strategy strategy, MeasureMode mode, std::int64_t ansatz_count,
                       std::int64_t observable_count, std::int64_t qubit_count,
                       std::int64_t data_count, double epsilon, double delta,
                       double shadow_norm_max, double shadow_constant) {
    if (ansatz_count < 1 || observable_count < 1 || qubit_count < 1 || data_count < 1) {
        throw std::invalid_argument("budget counts must all be >= 1");
    }
    if (!(epsilon > 0.0 && epsilon < 2.0)) {
        throw std::invalid_argument("epsilon must lie in (0, 2)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
    if (!(shadow_norm_max >= 1.0)) {
        throw std::invalid_argument("shadow norm bound must be >= 1");
    }
    if (!(shadow_constant > 0.0)) {
        throw std::invalid_argument("shadow constant must be positive");
    }

    BudgetPlan plan;
    plan.strategy = strategy;
    plan.mode = mode;
    plan.ansatz_count = ansatz_count;
    plan.observable_count = observable_count;
    plan.neuron_count = checked_product({ansatz_count, observable_count});
    plan.qubit_count = qubit_count;
    plan.data_count = data_count;
    plan.epsilon = epsilon;
    plan.delta = delta;
    plan.shadow_norm_max = shadow_norm_max;

    const double cells = static_cast<double>(plan.neuron_count) *
                         static_cast<double>(data_count);
    const double union_log = std::log(2.0 * cells / delta);
    if (mode == MeasureMode::kDirect) {
        plan.shots_per_unit =
            checked_ceil(2.0 / (epsilon * epsilon) * union_log, "direct shots");
        plan.groups = 1;
        plan.total_shots =
            checked_product({plan.neuron_count, data_count, plan.shots_per_unit});
    } else {
        plan.shots_per_unit = checked_ceil(
            shadow_constant * shadow_norm_max / (epsilon * epsilon), "shadow shots");
        plan.groups = checked_ceil(2.0 * union_log, "shadow groups");
        plan.total_shots = checked_product(
            {ansatz_count, data_count, plan.shots_per_unit, plan.groups});
    }

    // With a single observable there is nothing for a shadow set to
    // amortise over, so direct sampling wins; otherwise shadows pay off
    // exactly when the variance proxy undercuts the observable count.
    if (strategy == Strategy::kAnsatzExpansion) {
        plan.favored = MeasureMode::kDirect;
    } else {
        plan.favored = shadow_norm_max < static_cast<double>(observable_count)
                           ? MeasureMode::kShadows
                           : MeasureMode::kDirect;
    }
    return plan;
}

}  // namespace postvar
