"""Acceptance suite: one test per criterion, each printing a pass line with
its elapsed time.  Tolerances are pinned here, not configured elsewhere."""

import json
import math
import time

import numpy as np

from conftest import rand_density, rand_kraus_channel, rand_state, rand_unitary
from wigner_dfe import (
    NoiseModel,
    ProtocolConfig,
    QuantumChannel,
    SystemSpec,
    clifford_group,
    enumerate_stabilizer_states,
    exact_channel_fidelity,
    exact_state_fidelity,
    expected_sample_bound,
    is_clifford,
    mana_channel,
    mana_state,
    prepare_channel,
    prepare_state,
    rng_stream,
    run_protocol,
    wigner_inner_product,
    wigner_of_channel,
    wigner_of_operator,
    wigner_of_state,
    wigner_rank_channel,
    wigner_rank_state,
)
from wigner_dfe.cli import dfe_main
from wigner_dfe.phase_space import compose, phase_space_for, tensor
from wigner_dfe.protocols import chebyshev_K, hoeffding_K, shot_ceil
from wigner_dfe.targets import (
    interpolated_state,
    named_channel,
    named_state,
    nonclifford_phase_gate,
    strange_state,
)

STRUCTURAL = 1e-10
DERIVED = 1e-9


def _report(num: int, message: str, t0: float) -> None:
    print(f"ACCEPTANCE {num} PASS - {message} ({time.perf_counter() - t0:.1f}s)")


def test_criterion_1_structural_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1001)
    systems = [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2)]
    for d, n in systems:
        spec = SystemSpec(d, n)
        if spec.D > 49:
            continue
        ps = phase_space_for(spec)
        A = ps.A
        # Hermiticity and unit trace
        assert np.abs(A - A.conj().transpose(0, 2, 1)).max() <= STRUCTURAL
        assert np.abs(np.trace(A, axis1=1, axis2=2) - 1.0).max() <= STRUCTURAL
        # orthogonality tr[A_u A_v] = D delta via the Gram matrix
        gram = (ps.A_flat.conj() @ ps.A_flat.T).real
        assert np.abs(gram - spec.D * np.eye(spec.P)).max() <= STRUCTURAL
        # operator norm bound (spectra are exactly +-1)
        assert np.abs(np.abs(np.linalg.eigvalsh(A)) - 1.0).max() <= STRUCTURAL
        # reconstruction round trip on a random Hermitian operator
        G = rng.normal(size=(spec.D, spec.D)) + 1j * rng.normal(size=(spec.D, spec.D))
        X = (G + G.conj().T) / 2.0
        wX = wigner_of_operator(spec, X)
        recon = np.tensordot(wX.values, A, axes=(0, 0))
        assert np.abs(recon - X).max() <= DERIVED * max(1.0, np.abs(X).max())
        # |W_rho| <= 1/D bound and the overlap identity on random densities
        rho, sigma = rand_density(rng, spec.D), rand_density(rng, spec.D)
        w_rho, w_sigma = wigner_of_operator(spec, rho), wigner_of_operator(spec, sigma)
        assert np.abs(w_rho.values).max() <= 1.0 / spec.D + 1e-12
        overlap = wigner_inner_product(w_rho, w_sigma)
        assert abs(overlap - np.trace(rho @ sigma).real) <= DERIVED
        psi = rand_state(rng, spec.D)
        assert abs(spec.D * np.sum(wigner_of_state(spec, psi).values ** 2) - 1.0) <= DERIVED
        # channel column normalization
        channels = [
            QuantumChannel.identity(spec),
            QuantumChannel.depolarizing(spec, 0.1),
            QuantumChannel.from_unitary(spec, rand_unitary(rng, spec.D)),
            QuantumChannel(spec, rand_kraus_channel(rng, spec.D)),
        ]
        for ch in channels:
            cw = wigner_of_channel(spec, ch)
            assert np.abs(cw.column_sums() - 1.0).max() <= DERIVED
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(1, f"point-operator identities and channel normalization on {systems}", t0)


def test_criterion_2_hudson_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1002)
    for d, n, count in ((3, 1, 12), (3, 2, 360)):
        spec = SystemSpec(d, n)
        states = enumerate_stabilizer_states(spec)
        assert len(states) == count
        for s in states:
            w = wigner_of_state(spec, s.vector).values
            on = np.abs(w - 1.0 / spec.D) <= STRUCTURAL
            off = np.abs(w) <= STRUCTURAL
            assert int(on.sum()) == spec.D and np.all(on | off)
        for _ in range(50):
            w = wigner_of_state(spec, rand_state(rng, spec.D)).values
            assert w.min() < -STRUCTURAL
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    _report(2, "12 + 360 stabilizer states uniform, 2x50 random states negative", t0)


def test_criterion_3_magic_measures():
    t0 = time.perf_counter()
    spec = SystemSpec(3, 1)
    rng = np.random.default_rng(1003)
    # mana = 0 iff Wigner-positive over the state library
    library = [wigner_of_state(spec, s.vector) for s in enumerate_stabilizer_states(spec)]
    library.append(wigner_of_operator(spec, np.eye(3) / 3.0))
    library.append(wigner_of_operator(spec, prepare_state(named_state(spec, "zero"), NoiseModel(kind="depolarizing", p=0.5), spec)))
    for _ in range(50):
        library.append(wigner_of_state(spec, rand_state(rng, 3)))
    library.append(wigner_of_state(spec, strange_state(3)))
    for w in library:
        positive = w.values.min() >= -STRUCTURAL
        assert (mana_state(w) == 0.0) == positive
    # mana <= chi_log on all pure test states
    pure = [s.vector for s in enumerate_stabilizer_states(spec)]
    pure += [rand_state(rng, 3) for _ in range(50)]
    pure.append(strange_state(3))
    for psi in pure:
        rep = wigner_rank_state(wigner_of_state(spec, psi))
        assert rep.mana <= rep.log_wigner_rank + 1e-9
    # chi_log(U) = 0 iff Clifford: full 216-element group plus 50 random unitaries
    group = clifford_group(spec)
    assert len(group) == 216
    for el in group:
        cw = wigner_of_channel(spec, QuantumChannel.from_unitary(spec, el.matrix))
        assert wigner_rank_channel(cw).log_wigner_rank == 0.0
        assert mana_channel(cw) == 0.0
    for _ in range(50):
        U = rand_unitary(rng, 3)
        cw = wigner_of_channel(spec, QuantumChannel.from_unitary(spec, U))
        rep = wigner_rank_channel(cw)
        ok, _ = is_clifford(U, spec)
        assert not ok and rep.log_wigner_rank > 0.0
    # tensor additivity is exact (integer ranks multiply)
    spec2 = SystemSpec(3, 2)
    for _ in range(10):
        psi, phi = rand_state(rng, 3), rand_state(rng, 3)
        c1 = wigner_rank_state(wigner_of_state(spec, psi)).wigner_rank
        c2 = wigner_rank_state(wigner_of_state(spec, phi)).wigner_rank
        c12 = wigner_rank_state(wigner_of_state(spec2, np.kron(psi, phi))).wigner_rank
        assert c12 == c1 * c2
        u1 = QuantumChannel.from_unitary(spec, rand_unitary(rng, 3))
        u2 = QuantumChannel.from_unitary(spec, rand_unitary(rng, 3))
        k1 = wigner_rank_channel(wigner_of_channel(spec, u1)).wigner_rank
        k2 = wigner_rank_channel(wigner_of_channel(spec, u2)).wigner_rank
        k12 = wigner_rank_channel(wigner_of_channel(spec2, tensor(u1, u2))).wigner_rank
        assert k12 == k1 * k2
    # composition subadditivity on 100 random pairs
    pool = [rand_unitary(rng, 3) for _ in range(15)]
    pool += [nonclifford_phase_gate(3) @ group[i].matrix for i in rng.choice(216, size=10)]
    pool += [group[i].matrix for i in rng.choice(216, size=5)]
    for _ in range(100):
        c1 = QuantumChannel.from_unitary(spec, pool[rng.integers(len(pool))])
        c2 = QuantumChannel.from_unitary(spec, pool[rng.integers(len(pool))])
        r1 = wigner_rank_channel(wigner_of_channel(spec, c1)).log_wigner_rank
        r2 = wigner_rank_channel(wigner_of_channel(spec, c2)).log_wigner_rank
        r12 = wigner_rank_channel(wigner_of_channel(spec, compose(c1, c2))).log_wigner_rank
        assert r12 <= r1 + r2 + 1e-9
    elapsed = time.perf_counter() - t0
    assert elapsed < 600.0
    _report(3, "mana/rank faithfulness, bound, additivity, subadditivity", t0)


COVERAGE_CASES = [
    ("state_l2", "zero"),
    ("state_l1", "strange_state"),
    ("state_stabilizer", "zero"),
    ("channel_l2", "fourier"),
    ("channel_l1", "nonclifford_phase"),
    ("channel_clifford", "fourier"),
]


def test_criterion_4_estimator_coverage():
    t0 = time.perf_counter()
    spec = SystemSpec(3, 1)
    trials = 200
    for protocol, target_name in COVERAGE_CASES:
        cfg = ProtocolConfig(epsilon=0.2, delta=0.2, seed=2024, protocol=protocol)
        if protocol.startswith("state"):
            target = named_state(spec, target_name)
            device = prepare_state(target, NoiseModel(kind="depolarizing", p=0.3), spec)
            exact = exact_state_fidelity(target, device)
        else:
            target = named_channel(spec, target_name)
            device = prepare_channel(target, NoiseModel(kind="depolarizing", p=0.1), spec)
            exact = exact_channel_fidelity(target, device)
        estimates = np.array(
            [run_protocol(protocol, target, device, cfg, spec, stream=t).estimate for t in range(trials)]
        )
        coverage = float(np.mean(np.abs(estimates - exact) <= cfg.epsilon))
        assert coverage >= 0.70, f"{protocol}: coverage {coverage}"
        se = estimates.std() / math.sqrt(trials)
        assert abs(estimates.mean() - exact) <= 4.0 * se + 1e-12, (
            f"{protocol}: mean {estimates.mean()} vs exact {exact}"
        )
    elapsed = time.perf_counter() - t0
    assert elapsed < 1200.0
    _report(4, f"six protocols, {trials} runs each, coverage >= 0.70 and unbiased", t0)


def _independent_ceil(x: float) -> int:
    floor = int(math.floor(x))
    return floor + 1 if (x - floor) <= 1e-9 else floor + 1


def test_criterion_5_shot_schedule_exactness():
    t0 = time.perf_counter()
    # spot values pinned by the criterion
    assert chebyshev_K(0.1, 0.05) == 16000
    assert hoeffding_K(0.1, 0.05) == 3506
    rng = np.random.default_rng(1005)
    mismatches = 0
    for _ in range(1000):
        eps = float(rng.uniform(0.02, 0.9))
        delta = float(rng.uniform(0.02, 0.9))
        wval = float(rng.uniform(5e-3, 1.0))
        scale = float(2.0 ** rng.uniform(0.0, 3.0))
        lnq = math.log(4.0 / delta)
        # K formulas: P1/P4, P2 (Delta_psi), P5 (Delta_U), P3/P6
        if chebyshev_K(eps, delta) != _independent_ceil(8.0 / (eps * eps * delta)):
            mismatches += 1
        if chebyshev_K(eps, delta, scale) != _independent_ceil(8.0 * scale / (eps * eps * delta)):
            mismatches += 1
        if hoeffding_K(eps, delta) != _independent_ceil(8.0 / (eps * eps) * lnq):
            mismatches += 1
        # N_k formulas at the drawn parameters
        K1 = chebyshev_K(eps, delta)
        deltasq = 1.0 / 9.0
        if shot_ceil(8.0 * deltasq / (K1 * wval * wval * eps * eps) * lnq) != _independent_ceil(
            8.0 * deltasq / (K1 * wval * wval * eps * eps) * lnq
        ):
            mismatches += 1
        K2 = chebyshev_K(eps, delta, scale)
        if shot_ceil(8.0 * scale * scale / (K2 * eps * eps) * lnq) != _independent_ceil(
            8.0 * scale * scale / (K2 * eps * eps) * lnq
        ):
            mismatches += 1
        K3 = hoeffding_K(eps, delta)
        n3 = shot_ceil(8.0 / (K3 * eps * eps) * lnq)
        if n3 != 1:
            mismatches += 1
    assert mismatches == 0
    # end-to-end: engine-recorded N_k match an independent recomputation from
    # the same importance draws (the l2 state schedule has point-dependent N_k)
    spec = SystemSpec(3, 1)
    psi = interpolated_state(spec, 0.7)
    rho = prepare_state(psi, NoiseModel(kind="depolarizing", p=0.3), spec)
    cfg = ProtocolConfig(epsilon=0.25, delta=0.2, seed=77, protocol="state_l2")
    res = run_protocol("state_l2", psi, rho, cfg, spec, stream=3)
    w = wigner_of_state(spec, psi).values
    support = np.nonzero(np.abs(w) > 1e-10)[0]
    pr = 3.0 * w[support] ** 2
    pr = pr / pr.sum()
    cum = np.cumsum(pr)
    cum[-1] = 1.0
    draws = support[
        np.minimum(np.searchsorted(cum, rng_stream(77, 3, 0).random(res.K), side="right"), len(cum) - 1)
    ]
    lnq = math.log(4.0 / cfg.delta)
    for k, ui in enumerate(draws):
        expect = _independent_ceil(
            8.0 * (1.0 / 9.0) / (res.K * w[ui] * w[ui] * cfg.epsilon**2) * lnq
        )
        assert res.Nk[k] == expect
    _report(5, "K and N_k formulas reproduced independently, 1000 tuples + end-to-end", t0)


def test_criterion_6_sample_complexity_bounds():
    t0 = time.perf_counter()
    spec = SystemSpec(3, 1)
    eps = delta = 0.3
    runs = 50
    noise = NoiseModel(kind="depolarizing", p=0.3)
    targets = [named_state(spec, "zero"), interpolated_state(spec, 0.5), strange_state(3)]
    manas = [mana_state(wigner_of_state(spec, t)) for t in targets]
    assert manas[0] < manas[1] < manas[2]
    for protocol in ("state_l2", "state_l1"):
        for psi in targets:
            rho = prepare_state(psi, noise, spec)
            cfg = ProtocolConfig(epsilon=eps, delta=delta, seed=606, protocol=protocol)
            totals = [
                run_protocol(protocol, psi, rho, cfg, spec, stream=t).total_samples
                for t in range(runs)
            ]
            bound = expected_sample_bound(protocol, eps, delta, spec, psi)
            assert np.mean(totals) <= bound * 1.05, (
                f"{protocol}: measured {np.mean(totals)} vs bound {bound}"
            )
    # Protocols 3 and 6: total = K exactly, independent of system size
    for protocol, make_target in (
        ("state_stabilizer", lambda sp: named_state(sp, "zero")),
        ("channel_clifford", lambda sp: named_channel(sp, "fourier")),
    ):
        totals = []
        for d, n in ((3, 1), (3, 2)):
            sp = SystemSpec(d, n)
            tgt = make_target(sp)
            cfg = ProtocolConfig(epsilon=eps, delta=delta, seed=607, protocol=protocol)
            if protocol.startswith("state"):
                dev = prepare_state(tgt, noise, sp)
            else:
                dev = prepare_channel(tgt, NoiseModel(kind="depolarizing", p=0.1), sp)
            res = run_protocol(protocol, tgt, dev, cfg, sp, stream=0)
            assert res.total_samples == res.K == hoeffding_K(eps, delta)
            totals.append(res.total_samples)
        assert totals[0] == totals[1]
    _report(6, "E[N] bounds hold with 5% slack over 50-run means; well-conditioned totals = K", t0)


def test_criterion_7_oracle_cross_validation():
    t0 = time.perf_counter()
    spec = SystemSpec(3, 1)
    rng = np.random.default_rng(1007)
    for _ in range(100):
        psi, rho = rand_state(rng, 3), rand_density(rng, 3)
        via_trace = exact_state_fidelity(psi, rho)
        via_wigner = wigner_inner_product(
            wigner_of_state(spec, psi), wigner_of_operator(spec, rho)
        )
        assert abs(via_trace - via_wigner) <= 1e-9
    got = exact_channel_fidelity(
        QuantumChannel.identity(spec), QuantumChannel.depolarizing(spec, 0.1)
    )
    assert abs(got - (0.9 + 0.1 / 9.0)) <= 1e-9
    _report(7, "dense-trace vs Wigner-sum fidelity routes agree to 1e-9", t0)


def test_criterion_8_cli_reproducibility(tmp_path):
    t0 = time.perf_counter()
    run_cfg = {
        "system": {"d": 3, "n": 1},
        "protocol": "state_l2",
        "target": {"kind": "named", "name": "zero"},
        "noise": {"kind": "depolarizing", "p": 0.3},
        "epsilon": 0.25,
        "delta": 0.2,
        "seed": 99,
        "trials": 16,
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(run_cfg))
    outs = []
    for workers in (1, 8):
        out = tmp_path / f"out_{workers}.csv"
        assert dfe_main(["run", "--config", str(cfg_path), "--out", str(out), "--workers", str(workers)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    sweep_cfg = {
        "axis": "epsilon",
        "values": [0.4, 0.3],
        "trials_per_point": 4,
        "base": run_cfg,
    }
    sweep_path = tmp_path / "sweep.json"
    sweep_path.write_text(json.dumps(sweep_cfg))
    sweep_outs = []
    for workers in (1, 8):
        out = tmp_path / f"sweep_{workers}.csv"
        assert dfe_main(["sweep", "--config", str(sweep_path), "--out", str(out), "--workers", str(workers)]) == 0
        sweep_outs.append(out.read_bytes())
    assert sweep_outs[0] == sweep_outs[1]
    _report(8, "byte-identical CSV across 1 and 8 workers (run and sweep)", t0)
