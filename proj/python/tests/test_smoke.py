import math

import numpy as np
import pytest

import xlmimo as xm


def test_channel_geometry():
    cfg = xm.ArrayConfig()
    cfg.num_antennas = 1000
    assert xm.critical_distance(cfg) == pytest.approx(565.2)
    user = xm.UserPosition(40.0, 0.0)
    assert xm.element_distance(user, cfg, 318.5) == pytest.approx(math.hypot(40.0, 318.5 * 0.0628))
    a = xm.steering_vector(user, cfg, xm.ChannelModel.PW)
    assert a.shape == (1000,)
    assert np.allclose(np.abs(a), 1.0 / 40.0)


def test_zf_nulls_interference():
    cfg = xm.ArrayConfig.with_snr_db(64, 10.0)
    rng = np.random.default_rng(3)
    users = [xm.UserPosition(r, t) for r, t in zip(rng.uniform(10, 60, 8), rng.uniform(-0.7, 0.7, 8))]
    a = xm.channel_matrix(users, cfg)
    f = xm.zf_precoders(a)
    coupling = f.conj().T @ a
    off = coupling - np.diag(np.diag(coupling))
    assert np.abs(off).max() <= 1e-9 * np.linalg.norm(a, axis=0).max()
    assert np.allclose(np.linalg.norm(f, axis=0), 1.0)
    with pytest.raises(ValueError):
        xm.zf_precoders(np.stack([a[:, 0], a[:, 0]], axis=1))


def test_waterfill():
    powers, level = xm.waterfill([1.0, 0.1], 1.0, 1.0)
    assert powers == pytest.approx([1.0, 0.0])
    assert level == pytest.approx(2.0)
    with pytest.raises(ValueError):
        xm.waterfill([], 1.0, 1.0)


def test_schedulers_agree_on_one_user():
    cfg = xm.ArrayConfig.with_snr_db(32, 10.0)
    users = [xm.UserPosition(15.0, 0.3)]
    rates = [xm.schedule(m, users, cfg).sum_rate for m in
             (xm.Method.DBS, xm.Method.DBS_S, xm.Method.SUS, xm.Method.MRT)]
    assert max(rates) - min(rates) < 1e-12


def test_campaign_csv_and_scheduling():
    cfg = xm.CampaignConfig()
    cfg.num_users = 20
    cfg.antenna_counts = [32]
    cfg.snr_grid_db = [10.0]
    cfg.trials = 2
    csv = xm.run_campaign_csv(cfg)
    lines = csv.strip().splitlines()
    assert lines[0] == xm.CAMPAIGN_CSV_HEADER
    assert len(lines) == 1 + 2 * 4 * 2

    users = xm.generate_users(cfg, 32, 0)
    dbs = xm.schedule(xm.Method.DBS, users, xm.ArrayConfig.with_snr_db(32, 20.0))
    assert len(dbs.served) >= 1
    assert all(b > a for a, b in zip(dbs.rate_trajectory, dbs.rate_trajectory[1:]))
    with pytest.raises(ValueError):
        cfg.set("colour", "red")


def test_nearfield():
    cfg = xm.ArrayConfig()
    g = xm.KernelGeometry(40.0, 80.0, 33, cfg)
    peak = xm.interference_kernel(0.0, g, cfg)
    assert peak == pytest.approx(33.0 / (g.near_norm * 40.0 * 80.0))
    assert xm.semiorth_prob_bound(1e-3, xm.KernelGeometry(40.0, 80.0, 1, cfg), cfg) == 0.0
    est, se = xm.semiorth_prob_mc(0.1 * peak, g, cfg, samples=20000, seed=5)
    assert 0.0 < est < 1.0 and se > 0.0
    assert xm.effective_aperture(xm.UserPosition(50.0, 0.0), cfg) % 2 == 1
