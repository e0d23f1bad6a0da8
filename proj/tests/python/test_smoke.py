# Copyright 2026  The mhctc Authors
# Licensed under the Apache License, Version 2.0

import math

import numpy as np
import pytest

import mhctc


def random_logp(rng, frames, classes):
    return mhctc.log_softmax(rng.normal(size=(frames, classes)))


def test_ctc_loss_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(20):
        logp = random_logp(rng, 5, 3)
        loss, grad = mhctc.ctc_loss(logp, [1, 2])
        assert loss == pytest.approx(mhctc.ctc_loss_bruteforce(logp, [1, 2]), rel=1e-10)
        assert grad.shape == (5, 3)
        # occupancy rows sum to minus one
        np.testing.assert_allclose(grad.sum(axis=1), -1.0, atol=1e-12)


def test_uniform_example():
    logp = np.full((2, 2), math.log(0.5))
    loss, _ = mhctc.ctc_loss(logp, [1])
    assert loss == pytest.approx(-math.log(0.75))


def test_mh_loss_is_a_sum():
    rng = np.random.default_rng(1)
    logp = random_logp(rng, 6, 4)
    loss, per, grad = mhctc.mh_ctc_loss(logp, [[1, 2], [3]], ["A", "B"])
    assert loss == pytest.approx(sum(per), rel=1e-12)
    assert grad.shape == logp.shape
    with pytest.raises(mhctc.InvalidInput):
        mhctc.mh_ctc_loss(logp, [[1]], ["A", "B"])


def test_errors_map_to_python():
    logp = np.full((1, 3), math.log(1 / 3))
    with pytest.raises(mhctc.InfeasibleAlignment):
        mhctc.ctc_loss(logp, [1, 1])
    with pytest.raises(mhctc.InvalidLabel):
        mhctc.ctc_loss(logp, [5])
    assert issubclass(mhctc.ConfigError, mhctc.Error)


def test_decoders_agree_on_peaked_input():
    path = [0, 1, 1, 0, 2, 2]
    logits = np.zeros((len(path), 3))
    logits[np.arange(len(path)), path] = 30.0
    logp = mhctc.log_softmax(logits)
    assert mhctc.greedy_decode(logp)[0] == [1, 2]
    labels, log_prob = mhctc.beam_decode(logp, beam_width=4)
    assert labels == [1, 2]
    assert log_prob <= 0.0


def test_scoring():
    r = mhctc.edit_distance(mhctc.chunk_words("abcabc"), mhctc.chunk_words("abcabd"))
    assert r["substitutions"] == 1
    assert r["wer"] == pytest.approx(50.0)


def test_synth_and_features():
    utts = mhctc.synth(2, seed=3, noise="babble", snr_db=10.0)
    assert len(utts) == 2
    u = utts[0]
    assert abs(u["realized_snr_db"] - 10.0) <= 0.1
    fb = mhctc.fbank(u["waveform"], u["sample_rate"])
    st = mhctc.ste(u["waveform"], u["sample_rate"])
    assert fb.shape == st.shape
    assert fb.shape[1] == 36
    assert np.isfinite(fb).all() and np.isfinite(st).all()


def test_tiny_experiment(tmp_path):
    plan = mhctc.experiment_plan(
        seeds=[1], train_utts=16, len_min=3, len_max=5, adapt_epochs=1,
        write_waveforms=False, scenarios=["clean-train"],
        conditions=["no-adapt", "mh-ctc"])
    plan["split"] = {"labeled": 3, "unlabeled": 4, "test": 5}
    plan["model"]["hidden"] = 16
    plan["train"]["epochs"] = 2
    report, run_dir = mhctc.run_experiment(plan, tmp_path)
    assert len(report["rows"]) == 2
    ckpt = mhctc.Checkpoint.load(f"{run_dir}/clean-train/seed-1/ckpt/adapt-mh-ctc.ckpt")
    assert ckpt.lineage[0] == "init-fbank"
    assert ckpt.feature_kind == "fbank"
    with pytest.raises(mhctc.ConfigError):
        mhctc.experiment_plan(bogus=1)
