# Copyright 2025 The postvar developers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import postvar as pv


def test_simulation_basics():
    zero = pv.StateVector.zero_state(2)
    assert zero.num_qubits == 2
    assert abs(zero.norm() - 1.0) < 1e-12

    flipped = pv.apply_gate(zero, pv.Gate.rx(math.pi, 0))
    amps = np.asarray(flipped.amplitudes)
    assert abs(amps[2] - (-1j)) < 1e-12  # qubit 0 is the most significant bit

    assert pv.expectation(zero, pv.PauliString("ZI")) == pytest.approx(1.0)
    assert pv.expectation(zero, pv.PauliString("XI")) == pytest.approx(0.0)
    assert pv.state_fidelity(zero, zero) == pytest.approx(1.0)


def test_counting_formulas():
    assert pv.count_shifts(8, 1) == 17
    assert pv.count_shifts(8, 2) == 129
    assert pv.count_local_paulis(4, 1) == 13
    assert pv.count_local_paulis(4, 2) == 67
    assert len(pv.enumerate_shifts(8, 1)) == 17
    assert len(pv.enumerate_local_paulis(4, 2)) == 67


def test_ansatz_identity_at_zero():
    spec = pv.make_ansatz_spec(4, 2)
    circuit = pv.build_ansatz(spec, [0.0] * spec.parameter_count)
    state = pv.run_circuit(pv.StateVector.zero_state(4), circuit)
    amps = np.asarray(state.amplitudes)
    assert abs(amps[0] - 1.0) < 1e-12


def test_pauli_decompose_round_trip():
    rng = np.random.default_rng(7)
    raw = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    hermitian = 0.5 * (raw + raw.conj().T)
    decomposition = pv.pauli_decompose(hermitian)
    rebuilt = np.asarray(decomposition.reconstruct())
    assert np.max(np.abs(rebuilt - hermitian)) < 1e-10


def test_feature_pipeline_and_head():
    params = pv.SynthParams()
    params.count = 60
    synth = pv.synth_dataset(pv.SynthKind.LINEAR, params, 3)

    spec = pv.make_ansatz_spec(4, 2)
    registry = pv.NeuronRegistry(
        spec,
        [pv.ShiftVector.zeros(spec.parameter_count)],
        pv.enumerate_local_paulis(4, 2),
    )
    features = pv.generate_features_exact(synth.dataset, registry)
    Q = np.asarray(features.Q)
    assert Q.shape == (60, 67)
    assert np.max(np.abs(Q)) <= 1.0 + 1e-12

    model = pv.fit_least_squares(Q, synth.dataset.labels)
    predictions = np.asarray(pv.predict(model, Q)).ravel()
    rmse = pv.compute_loss(pv.LossKind.RMSE, synth.dataset.labels, predictions)
    assert rmse < 0.05


def test_budget_planner_verdicts():
    plan = pv.plan_budget(
        pv.Strategy.ANSATZ_EXPANSION, pv.MeasureMode.SHADOWS, 17, 1, 4, 10, 0.2, 0.1, 4.0
    )
    assert plan.favored == pv.MeasureMode.DIRECT

    local = pv.plan_budget(
        pv.Strategy.OBSERVABLE_CONSTRUCTION,
        pv.MeasureMode.SHADOWS,
        1,
        13,
        4,
        10,
        0.2,
        0.1,
        4.0,
    )
    assert local.favored == pv.MeasureMode.SHADOWS
    assert local.total_shots == 1 * 10 * local.shots_per_unit * local.groups


def test_shadow_estimation():
    prep = pv.Circuit(1)
    prep.append(pv.Gate.ry(math.pi / 2, 0))
    records = pv.collect_shadows(prep, 20000, 11)
    x_estimate = pv.estimate_pauli(records, pv.PauliString("X"), 10)
    assert x_estimate == pytest.approx(1.0, abs=0.1)


def test_bounds_round_trip():
    assert pv.theorem2_threshold(4, 0.1) == pytest.approx(0.025)
    rng = np.random.default_rng(5)
    Q = rng.uniform(-1, 1, size=(50, 10))
    y = np.sign(rng.normal(size=50))
    budget = 0.9 * pv.theorem2_threshold(10, 0.1)
    Qhat = Q + rng.uniform(-budget, budget, size=Q.shape)
    report = pv.verify_loss_gap(Q, Qhat, y, pv.GapMode.BALL, 0.1)
    assert report.satisfied
    assert report.delta_loss < 0.1
