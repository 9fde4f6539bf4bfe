"""Toggling frames, leading-order averages, and the claim registry."""

import numpy as np
import pytest

from spinbath import ContractError, ErrorModel, build_model, compile_cpmg, compile_pdd
from spinbath.avgham import (
    average_hamiltonian,
    build_h_e,
    build_h_free,
    magnus_defect,
    rotation_generator,
    toggling_frames,
    verify_claim,
)
from spinbath.operators import evolve


def small_model(seed=0, n_bath=3, scale=0.05):
    rng = np.random.default_rng(seed)
    b = rng.uniform(-scale, scale, n_bath)
    iu = np.triu_indices(n_bath, 1)
    d = np.zeros((n_bath, n_bath))
    d[iu] = rng.uniform(-scale, scale, len(iu[0]))
    return build_model(b, d + d.T)


def test_toggling_frames_partition_the_cycle():
    m = small_model()
    tl = compile_pdd(12.0)
    segs = toggling_frames(tl, build_h_free(m), m.ops)
    assert len(segs) == 4
    assert sum(s.duration for s in segs) == pytest.approx(tl.cycle_time)
    ref = np.linalg.eigvalsh(build_h_free(m))
    for s in segs:
        assert np.allclose(s.h_tilde, s.h_tilde.conj().T, atol=1e-12)
        # frame changes are unitary, so each toggled piece keeps the spectrum
        assert np.allclose(np.linalg.eigvalsh(s.h_tilde), ref, atol=1e-10)


def test_pdd_zeroth_order_is_bath_only():
    m = small_model(seed=5)
    segs = toggling_frames(compile_pdd(9.0), build_h_free(m), m.ops)
    h0 = average_hamiltonian(segs, 0)
    assert np.max(np.abs(h0 - build_h_e(m))) < 1e-12


def test_average_hamiltonian_orders():
    m = small_model(seed=1)
    segs = toggling_frames(compile_cpmg(10.0), build_h_free(m), m.ops)
    h0 = average_hamiltonian(segs, 0)
    h1 = average_hamiltonian(segs, 1)
    assert np.allclose(h0, h0.conj().T, atol=1e-12)
    assert np.allclose(h1, h1.conj().T, atol=1e-12)
    with pytest.raises(ContractError):
        average_hamiltonian(segs, 2)


def test_rotation_generator_inverts_evolve():
    m = small_model(seed=2, n_bath=2)
    h = 0.3 * build_h_free(m) / np.max(np.abs(np.linalg.eigvalsh(build_h_free(m))))
    g = rotation_generator(evolve(h, 1.0).matrix)
    assert np.max(np.abs(g - h)) < 1e-10


def test_magnus_defect_shrinks_cubically():
    ratios = []
    for seed in range(5):
        m = small_model(seed=seed)
        h = build_h_free(m)
        d_long = magnus_defect(compile_pdd(20.0), h, m.ops)
        d_short = magnus_defect(compile_pdd(10.0), h, m.ops)
        assert d_short < d_long
        ratios.append(d_long / d_short)
    # halving the delay should cut the residual by roughly 2^3
    assert 3.0 < min(ratios)
    assert 5.0 < float(np.mean(ratios)) < 12.0


def test_claim_registry():
    for cid in ("cpmg-flip-angle-zeroth-order",
                "cpmg2-error-sum-vanishes",
                "pdd-cancels-system-bath-coupling"):
        report = verify_claim(cid)
        assert report["pass"], report
        assert report["residual"] < report["tolerance"]
        assert report["claim"] == cid
        assert isinstance(report["statement"], str)
    with pytest.raises(ContractError):
        verify_claim("no-such-claim")


def test_claim_accepts_parameter_overrides():
    report = verify_claim("cpmg-flip-angle-zeroth-order",
                          {"tau": 14.0, "flip_angle_fraction": 0.02, "seed": 3})
    assert report["pass"]


def test_errored_frames_see_the_flip_angle():
    m = small_model(seed=7)
    tl = compile_cpmg(16.0)
    err = ErrorModel(flip_angle_fraction=0.04)
    ideal = toggling_frames(tl, build_h_free(m), m.ops, "ideal")
    bad = toggling_frames(tl, build_h_free(m), m.ops, "errored", err)
    h0_ideal = average_hamiltonian(ideal, 0)
    h0_bad = average_hamiltonian(bad, 0)
    assert np.max(np.abs(h0_ideal - h0_bad)) > 1e-4
