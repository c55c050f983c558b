"""End-to-end acceptance checks.

Each test prints exactly one PASS/FAIL line for its criterion. Heavy suites
run once per session and feed several criteria; tolerances are fixed here and
must not be loosened to make a failing criterion pass.
"""

import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from wicktorus.harness import load_config, run_suite
from wicktorus.harness.records import record_line, strip_timing
from wicktorus.norms import XsbParams, xsb_norm, xsb_norm_rotating
from wicktorus.randomfield import GaussianEnsemble, sample_data
from wicktorus.spacetime import SpaceTimeField, make_time_grid
from wicktorus.spectral import SpectralField, evolve, wick
from wicktorus.torus import TorusSpec

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
GOLDENS = ROOT / "goldens"


def _check(num: int, desc: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{num:02d}] {status} {desc}: {detail}")
    assert ok, f"criterion {num} ({desc}): {detail}"


def _verdict(result, name: str) -> dict:
    for v in result.verdicts:
        if v["name"] == name:
            return v
    raise AssertionError(
        f"no verdict {name!r}; have {[v['name'] for v in result.verdicts]}"
    )


def _suite(config_name: str, **overrides):
    cfg = load_config(CONFIGS / config_name)
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return run_suite(cfg)


@pytest.fixture(scope="module")
def count_result():
    return _suite("count_reference.json")


@pytest.fixture(scope="module")
def prob_result():
    return _suite("prob_reference.json")


@pytest.fixture(scope="module")
def converge_result():
    return _suite("converge_reference.json", golden_dir=str(GOLDENS))


def test_criterion_01_wick_fast_matches_oracle():
    torus = TorusSpec(1.41421356237)
    worst = 0.0
    for n in (4, 8):
        for seed in range(50):
            u = sample_data(GaussianEnsemble(seed, torus), n)
            f = sample_data(GaussianEnsemble(seed + 1000, torus), n)
            h = sample_data(GaussianEnsemble(seed + 2000, torus), n)
            fast = wick(u, f, h, method="fast").coeffs
            orc = wick(u, f, h, method="oracle").coeffs
            rel = float(np.max(np.abs(fast - orc)) / np.max(np.abs(orc)))
            worst = max(worst, rel)
    _check(
        1,
        "renormalized product, fast vs oracle on 100 random fields (N=4, 8)",
        worst < 1e-12,
        f"max relative deviation {worst:.3e} (tol 1e-12)",
    )


def test_criterion_02_single_mode_closed_form():
    torus = TorusSpec(1.41421356237)
    mode = (2, 1)
    a0 = 0.7 - 0.2j
    q = mode[0] ** 2 + torus.gamma * mode[1] ** 2
    u0 = SpectralField.from_modes(torus, 3, {mode: a0})
    traj = evolve(u0, 1e-3, 1.0)
    worst = 0.0
    for t, state in zip(traj.times, traj.states):
        want = a0 * np.exp(1j * (q - abs(a0) ** 2) * t)
        worst = max(worst, abs(state.get(mode) - want))
    _check(
        2,
        "single-mode flow matches the closed form on [0, 1] at dt=1e-3",
        worst < 1e-8,
        f"max error {worst:.3e} over {len(traj.times)} checkpoints (tol 1e-8)",
    )


def test_criterion_03_conservation():
    res = _suite("evolve_conservation.json")
    mass = _verdict(res, "evolve-mass")
    energy = _verdict(res, "evolve-energy")
    ok = mass["status"] == "PASS" and energy["status"] == "PASS"
    _check(
        3,
        "mass within 1e-9 and energy within 1e-6 (relative) over T=1, N=32, 5 seeds",
        ok,
        f"{mass['detail']}; {energy['detail']}",
    )


def test_criterion_04_fix12_growth(count_result):
    v = _verdict(count_result, "count-fix12-slope")
    _check(
        4,
        "pair-fixed counts grow like the free scale (slope <= 1.15 over N3 in 8..64)",
        v["status"] == "PASS",
        v["detail"],
    )


def test_criterion_05_fix13_stability(count_result):
    ratio = _verdict(count_result, "count-fix13-ratio")
    two3 = _verdict(count_result, "count-fix13-twothirds")
    ok = ratio["status"] == "PASS" and two3["status"] == "PASS"
    _check(
        5,
        "annulus counts admit one finite constant per bound branch (N1 in 16..256)",
        ok,
        f"{ratio['detail']}; {two3['detail']}",
    )


def test_criterion_06_fix1_pair_growth(count_result):
    v = _verdict(count_result, "count-fix1-slope")
    _check(
        6,
        "single-fixed pair counts grow like the scale product (slope <= 1.15)",
        v["status"] == "PASS",
        v["detail"],
    )


def test_criterion_07_exact_methods_match_oracle(count_result):
    v = _verdict(count_result, "count-exactness")
    _check(
        7,
        "strip/annulus counts equal the exhaustive oracle (N1 <= 32, all mu, W grids)",
        v["status"] == "PASS",
        v["detail"],
    )


def test_criterion_08_divisor_decay():
    res = _suite("divisor_reference.json")
    dec = _verdict(res, "divisor-decreasing")
    fin = _verdict(res, "divisor-final-exponent")
    spot = _verdict(res, "divisor-spot-checks")
    ok = all(v["status"] == "PASS" for v in (dec, fin, spot))
    _check(
        8,
        "divisor-count exponents decrease by decade and end below 0.6 at 1e6",
        ok,
        f"{dec['detail']}; {fin['detail']}; {spot['detail']}",
    )


def test_criterion_09_chaos_tails(prob_result):
    k1 = _verdict(prob_result, "chaos-k1-tail")
    k2 = _verdict(prob_result, "chaos-k2-bound")
    ok = k1["status"] == "PASS" and k2["status"] == "PASS"
    _check(
        9,
        "k=1 tail matches exp(-lambda^2) within 3 SE; k=2 tail under its bound",
        ok,
        f"{k1['detail']}; {k2['detail']}",
    )


def test_criterion_10_linf_growth(prob_result):
    slope = _verdict(prob_result, "linf-slope")
    flat = _verdict(prob_result, "linf-flattening")
    ok = slope["status"] == "PASS" and flat["status"] == "PASS"
    _check(
        10,
        "sup-norm median slope <= 0.45 and flattens between scale halves",
        ok,
        f"{slope['detail']}; {flat['detail']}",
    )


def test_criterion_11_strichartz_ratios():
    details = []
    ok = True
    for name in ("strichartz_sqrt2.json", "strichartz_square.json"):
        res = _suite(name)
        v = _verdict(res, "strichartz-slope")
        gamma = json.loads((CONFIGS / name).read_text())["gamma"]
        details.append(f"{gamma}: {v['detail']}")
        ok = ok and v["status"] == "PASS"
    _check(
        11,
        "windowed L4/L2 ratio slope <= 0.10 on both tori",
        ok,
        "; ".join(details),
    )


def test_criterion_12_picard_contraction():
    res = _suite("picard_reference.json")
    verdicts = [_verdict(res, f"picard-N{n}") for n in (8, 16, 32)]
    ok = all(v["status"] == "PASS" for v in verdicts)
    _check(
        12,
        "iteration contracts within 3 steps with residual < 1e-8 (4/5 seeds per N)",
        ok,
        "; ".join(v["detail"] for v in verdicts),
    )


def test_criterion_13_truncation_convergence(converge_result):
    mono = _verdict(converge_result, "converge-monotone")
    golden = next(
        v for v in converge_result.verdicts if v["name"].startswith("golden-")
    )
    ok = mono["status"] == "PASS" and golden["status"] == "PASS"
    ok = ok and "matches" in golden["detail"]
    _check(
        13,
        "truncation differences decrease monotonically and match the frozen baseline",
        ok,
        f"{mono['detail']}; {golden['detail']}",
    )


def test_criterion_14_matrix_bound():
    res = _suite("cs_reference.json")
    v = _verdict(res, "cs-no-violations")
    _check(
        14,
        "structured matrix bound holds with constant 1 on 1e4 instances",
        v["status"] == "PASS",
        v["detail"],
    )


def test_criterion_15_parseval_identity():
    torus = TorusSpec(1.41421356237)
    params = XsbParams(0.0, 0.0)
    worst = 0.0
    for seed, n in ((0, 3), (1, 5), (2, 8)):
        rng = np.random.default_rng(seed)
        samples = 513  # resolves the rotation of every mode at n = 8
        times = make_time_grid(1.0, samples)
        side = 2 * n + 1
        raw = rng.standard_normal((samples, side, side)) + 1j * rng.standard_normal(
            (samples, side, side)
        )
        spec = np.fft.fft(raw, axis=0)
        spec[16:-16] = 0.0
        v = SpaceTimeField(
            torus=torus, N=n, times=times, coeffs=np.fft.ifft(spec, axis=0)
        ).apply_window(1.0)
        want = v.l2_tx()
        for norm in (xsb_norm(v, params), xsb_norm_rotating(v, params)):
            worst = max(worst, abs(norm - want) / want)
    _check(
        15,
        "dispersive norm at s=b=0 equals the discrete L2 norm",
        worst <= 1e-10,
        f"max relative deviation {worst:.3e} (tol 1e-10)",
    )


def test_criterion_16_worker_determinism():
    base = {
        "experiment": "count-verify",
        "gamma": "sqrt2",
        "seed_start": 0,
        "seed_end": 2,
        "scales_fix12": [4, 8, 16],
        "scales_exact": [4, 8],
        "cells_per_scale": 6,
        "exact_cells": 1,
        "mu_values": [0.0, 2.0, -5.0],
        "window_widths": [1.0],
    }
    from wicktorus.harness import config_from_dict

    serial = run_suite(config_from_dict({**base, "workers": 1}))
    parallel = run_suite(config_from_dict({**base, "workers": 4}))
    a = [record_line(strip_timing(json.loads(record_line(r)))) for r in serial.records]
    b = [
        record_line(strip_timing(json.loads(record_line(r))))
        for r in parallel.records
    ]
    ok = a == b and serial.verdicts == parallel.verdicts
    _check(
        16,
        "records are bitwise identical across worker counts (timing excluded)",
        ok,
        f"{len(a)} records compared across workers=1 and workers=4",
    )
