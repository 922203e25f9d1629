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

#pragma once

#include "postvar/circuits.hpp"
#include "postvar/data.hpp"
#include "postvar/pauli.hpp"
#include "postvar/shadows.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace postvar {

/// One quantum neuron: indices into the shift registry (which fixed
/// circuit) and the observable registry (which Pauli word).
struct NeuronSpec {
    int shift_index = 0;
    int pauli_index = 0;
};

/// The fixed-circuit ensemble: a data encoder feeds the ansatz built at
/// each registered shift, measured against each registered observable.
struct NeuronRegistry {
    AnsatzSpec ansatz;
    std::vector<ShiftVector> shifts;
    std::vector<PauliString> observables;

    std::int64_t neuron_count() const {
        return static_cast<std::int64_t>(shifts.size()) *
               static_cast<std::int64_t>(observables.size());
    }
};

/// Checks shift lengths, observable widths and encoder compatibility.
void validate_registry(const NeuronRegistry& registry, Eigen::Index feature_count);

enum class FeatureGenMode { kExact, kDirect, kShadows };

std::string to_string(FeatureGenMode mode);

/// d x m matrix of neuron outputs, one row per datum.  Columns follow the
/// canonical shift-major, observable-minor order: column a*q + b holds
/// shift a measured against observable b, which lets one shadow record set
/// per (datum, shift) block serve all q observables.
struct FeatureMatrix {
    Eigen::MatrixXd Q;
    std::vector<std::int64_t> row_ids;
    std::vector<NeuronSpec> col_specs;
    FeatureGenMode mode = FeatureGenMode::kExact;
    std::optional<BudgetPlan> plan;  // direct / shadows modes
};

/// Exact expectations <0|S^dag(x) U^dag(theta) O U(theta) S(x)|0> for every
/// (datum, shift, observable) triple; deterministic.
FeatureMatrix generate_features_exact(const Dataset& dataset,
                                      const NeuronRegistry& registry,
                                      unsigned workers = 0);

/// Estimated features at the plan's budget.  Direct mode averages
/// plan.shots_per_unit single-shot +-1 outcomes per entry; shadow mode
/// collects one record set per (datum, shift) block and estimates all
/// observables from it by median of means, clamping the (rare) estimate
/// outside [-1 - eps, 1 + eps] back to the boundary.  Deterministic given
/// the seed; blocks own derived streams, so worker count does not matter.
FeatureMatrix generate_features_sampled(const Dataset& dataset,
                                        const NeuronRegistry& registry,
                                        const BudgetPlan& plan, std::uint64_t seed,
                                        unsigned workers = 0);

struct PruneDecision {
    double score = 0.0;
    bool drop = false;
};

/// Parameter-shift gradient screen for parameter u on top of `base`
/// (base.values[u] must be 0): the score is the dataset mean of the
/// squared difference between the +pi/2 and -pi/2 expectations of
/// `observable`.  Scores below tau_g mark the pair of shifted circuits
/// (and every higher-order shift extending them) as droppable.
PruneDecision prune_by_gradient(const Dataset& dataset, const AnsatzSpec& ansatz,
                                int parameter, const ShiftVector& base,
                                const PauliString& observable, double tau_g);

/// Observable-free screen: score = dataset mean of 4 (1 - F) where F is
/// the fidelity between the two shifted states.  F is computed both from
/// the state overlap and as the all-zeros probability of the composed
/// circuit S^dag U^dag(+) U(-) S; the two must agree to 1e-10 or the call
/// aborts.  The score upper-bounds the gradient screen score.
PruneDecision prune_by_fidelity(const Dataset& dataset, const AnsatzSpec& ansatz,
                                int parameter, const ShiftVector& base, double tau_f);

/// Removes every shift that extends `base` with a nonzero entry at
/// `parameter` (both first-order shifted circuits and their higher-order
/// descendants).
std::vector<ShiftVector> apply_shift_pruning(const std::vector<ShiftVector>& shifts,
                                             int parameter, const ShiftVector& base);

/// CSV with header `id,label,s<shift>:<pauliword>,...`; `extra_header`
/// lines are emitted first as `# ` comments.
void write_features_csv(std::ostream& out, const FeatureMatrix& features,
                        const NeuronRegistry& registry, const Eigen::VectorXd& labels,
                        std::span<const std::string> extra_header = {});

struct FeatureCsv {
    Eigen::MatrixXd Q;
    Eigen::VectorXd labels;
    std::vector<std::int64_t> ids;
    std::vector<std::string> column_names;
};

FeatureCsv read_features_csv(std::istream& in);

}  // namespace postvar
