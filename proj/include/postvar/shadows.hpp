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

#include "postvar/pauli.hpp"
#include "postvar/sim.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace postvar {

/// One randomized measurement: a uniformly drawn Pauli basis word and the
/// observed computational-basis outcome after the basis rotation.  Letters
/// and bits are packed two/one bits per qubit; accessors unpack.
struct ShadowRecord {
    std::uint64_t basis_bits = 0;    // 2 bits per qubit: X=0, Y=1, Z=2
    std::uint64_t outcome_bits = 0;  // 1 bit per qubit
    std::uint8_t num_qubits = 0;

    char basis_letter(int qubit) const {
        static constexpr char kLetters[3] = {'X', 'Y', 'Z'};
        return kLetters[(basis_bits >> (2 * qubit)) & 3ULL];
    }
    int outcome_bit(int qubit) const {
        return static_cast<int>((outcome_bits >> qubit) & 1ULL);
    }
    std::string basis_word() const;
    std::string outcome_string() const;
};

/// Draws `count` records from the state prepared by `prep` on |0...0>.
/// Each record gets its own stream derived from (seed, record index), so
/// the result is independent of worker scheduling.
std::vector<ShadowRecord> collect_shadows(const Circuit& prep, std::int64_t count,
                                          std::uint64_t seed);

/// Median-of-means estimate of tr(P rho) from shadow records.  Records are
/// split into `groups` contiguous chunks (near-equal sizes); each chunk
/// contributes the mean of the single-record estimator
///   prod_{q in supp(P)} 3 * [basis letter == P letter] * (-1)^{outcome bit},
/// and the group means are combined by their median.
double estimate_pauli(std::span<const ShadowRecord> records, const PauliString& pauli,
                      int groups);

/// Line format: header "n=<n> T=<T> seed=<seed>", then one
/// "basisword<TAB>bitstring" line per record.
void write_shadows(std::ostream& out, std::span<const ShadowRecord> records,
                   int num_qubits, std::uint64_t seed);

struct ShadowFile {
    int num_qubits = 0;
    std::uint64_t seed = 0;
    std::vector<ShadowRecord> records;
};

ShadowFile read_shadows(std::istream& in);

enum class Strategy { kAnsatzExpansion, kObservableConstruction, kHybrid };
enum class MeasureMode { kDirect, kShadows };

std::string to_string(Strategy s);
std::string to_string(MeasureMode m);
Strategy strategy_from_string(const std::string& name);
MeasureMode measure_mode_from_string(const std::string& name);

/// Shot schedule meeting a per-entry additive error target.
///
/// Direct mode invests ceil((2/eps^2) ln(2 m d / delta)) shots into each of
/// the m*d (neuron, datum) cells, the Hoeffding + union-bound schedule.
/// Shadow mode reuses one record set per (ansatz, datum) block across all q
/// observables: ceil(C * max shadow norm / eps^2) records per
/// median-of-means group and ceil(2 ln(2 m d / delta)) groups.
struct BudgetPlan {
    Strategy strategy = Strategy::kHybrid;
    MeasureMode mode = MeasureMode::kDirect;
    std::int64_t ansatz_count = 1;      // p
    std::int64_t observable_count = 1;  // q
    std::int64_t neuron_count = 1;      // m = p * q
    std::int64_t qubit_count = 1;
    std::int64_t data_count = 1;
    double epsilon = 0.1;
    double delta = 0.1;
    double shadow_norm_max = 1.0;
    std::int64_t shots_per_unit = 0;
    std::int64_t groups = 1;       // median-of-means groups (shadow mode)
    std::int64_t total_shots = 0;  // m*d*shots (direct) or p*d*shots*groups (shadows)
    MeasureMode favored = MeasureMode::kDirect;
};

/// The median-of-means constant is not pinned by the estimator analysis;
/// 34 is the customary value and can be overridden via `shadow_constant`.
BudgetPlan plan_budget(Strategy strategy, MeasureMode mode, std::int64_t ansatz_count,
                       std::int64_t observable_count, std::int64_t qubit_count,
                       std::int64_t data_count, double epsilon, double delta,
                       double shadow_norm_max, double shadow_constant = 34.0);

}  // namespace postvar
