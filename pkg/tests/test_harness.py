import numpy as np
import pytest

from motifcode.capacity import capacity_cc
from motifcode.harness import (FER_HEADER, QSPA_NAME, SETBP, CodeSpec, ExperimentSpec, FerRecord, fer_csv, run_fer,
                               simulate_frame, sweep_capacity, sweep_hard_decision)

SMALL = CodeSpec(d_v=3, d_c=6, L_p=10, N_p=40)


def test_spec_defaults_and_validation():
    s = ExperimentSpec()
    assert s.q == 67 and s.code.N_p == 1002
    assert s.as_dict()["q"] == 67
    with pytest.raises(ValueError):
        ExperimentSpec(p_inter=0.1, decoder=SETBP).validate()
    with pytest.raises(ValueError):
        ExperimentSpec(decoder="bcjr").validate()
    with pytest.raises(ValueError):
        ExperimentSpec(code=CodeSpec(q=71)).validate()
    with pytest.raises(ValueError):
        ExperimentSpec(R_values=[0]).validate()
    assert ExperimentSpec(code={"d_v": 3, "d_c": 6, "L_p": 4, "N_p": 8}).code == CodeSpec(3, 6, 4, 8)


def test_fer_record_and_csv():
    r = FerRecord.from_counts(6, 100, 5, 1, 12.5, 3.25)
    assert r.fer == 0.05 and r.ci95 == pytest.approx(1.959964 * np.sqrt(0.05 * 0.95 / 100), rel=1e-6)
    text = fer_csv([r])
    assert text.splitlines()[0] == FER_HEADER
    assert text.splitlines()[1].endswith(",1,12.5,3.250")
    assert fer_csv([r], timing=False).splitlines()[1].endswith(",12.5,0")


def test_full_code_large_R_never_fails():
    spec = ExperimentSpec(R_values=[200], frames=50)
    (rec,) = run_fer(spec)
    assert rec.frame_errors == 0 and rec.mean_iters == 0


def test_small_code_fer_trend():
    spec = ExperimentSpec(R_values=[3, 8], frames=20, code=SMALL)
    lo, hi = run_fer(spec)
    assert lo.fer >= hi.fer
    assert lo.fer > 0.5 and hi.fer == 0


def test_qspa_small_code():
    spec = ExperimentSpec(R_values=[14], p_inter=0.078, frames=5, code=SMALL, decoder=QSPA_NAME)
    (rec,) = run_fer(spec)
    assert rec.frame_errors == 0


def test_run_fer_thread_invariant():
    spec = ExperimentSpec(R_values=[5], frames=6, code=SMALL, master_seed=77)
    a = run_fer(spec, threads=1)
    b = run_fer(spec, threads=2)
    assert fer_csv(a, timing=False) == fer_csv(b, timing=False)


def test_fixed_code_is_shared():
    spec = ExperimentSpec(R_values=[5], frames=4, code=SMALL, fixed_code=3, master_seed=1)
    assert [simulate_frame(spec, 5, f) for f in range(4)] == [simulate_frame(spec, 5, f) for f in range(4)]
    from motifcode import harness
    assert len(harness._code_cache) == 1


def test_uncoded_frames():
    spec = ExperimentSpec(R_values=[2, 40], frames=200, code=None)
    few, many = run_fer(spec)
    assert few.fer > 0.5 and many.fer == 0


def test_sweep_capacity_kinds():
    cc = sweep_capacity("cc", range(1, 41))
    assert len(cc) == 40 and cc.capacity[23] == capacity_cc(8, 4, 24)
    assert 0 < np.log2(70) - cc.capacity[23] < 0.01
    nb = sweep_capacity("nbec", range(1, 41))
    assert np.all(nb.capacity <= cc.capacity)
    sp = sweep_capacity("split", range(1, 101, 11), a=10)
    assert all(c <= capacity_cc(80, 40, r) for r, c in zip(sp.R, sp.capacity))
    it = sweep_capacity("interference", [6, 11], samples=4000, seed=3)
    assert np.all(it.ci > 0)
    nt = sweep_capacity("nbec_t", [7, 20], trials=4000)
    assert nt.capacity[0] == 0 and nt.capacity[1] > 5
    with pytest.raises(ValueError):
        sweep_capacity("magic", [1])


def test_hard_decision_sweep():
    (clean,) = sweep_hard_decision(8, 4, 0.0, 2, [20], trials=20000, seed=1)
    assert clean.substitution_rate == 0.0 and 0 < clean.erasure_rate < 0.2
    pts = sweep_hard_decision(8, 4, 0.078, 2, [12, 20], trials=20000, seed=1)
    assert 1e-2 / 3 < pts[1].substitution_rate < 3e-2
    assert pts[0].erasure_rate > pts[1].erasure_rate
    a = sweep_hard_decision(8, 4, 0.078, 3, [20], trials=10000, seed=5, threads=1)
    b = sweep_hard_decision(8, 4, 0.078, 3, [20], trials=10000, seed=5, threads=2)
    assert a == b
