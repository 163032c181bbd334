"""Smoke test for the pyhetnet extension module.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run:
    python python/smoke_test.py
"""

import csv
import io
import math
import random

import pyhetnet


def check_received_power():
    p = pyhetnet.received_power(46.0, 6, 1.0, 4.0)
    assert math.isclose(p, 10 ** 4.6 / 6, rel_tol=1e-12), p
    try:
        pyhetnet.received_power(46.0, 6, 0.5, 4.0)
    except ValueError:
        pass
    else:
        raise AssertionError("distance below the reference should be rejected")


def check_beamformer():
    rng = random.Random(7)
    cn = lambda: complex(rng.gauss(0, 1), rng.gauss(0, 1))
    h = [cn() for _ in range(4)]
    leak = [[cn() for _ in range(4)] for _ in range(3)]
    w = pyhetnet.slnr_beamformer(h, leak, 0.5)
    assert abs(sum(abs(x) ** 2 for x in w) - 1.0) < 1e-12
    best = pyhetnet.slnr(w, h, leak, 0.5)
    for _ in range(200):
        u = [cn() for _ in range(4)]
        n = math.sqrt(sum(abs(x) ** 2 for x in u))
        assert pyhetnet.slnr([x / n for x in u], h, leak, 0.5) <= best


def check_formulas():
    assert math.isclose(pyhetnet.appendix_numerator([0.0], 1.0, 1.0), 2.0)
    assert math.isclose(pyhetnet.appendix_numerator([0.0] * 4, 1.0, 1.0), 20.0)
    assert pyhetnet.summarize_percentiles([float(v) for v in range(1, 101)]) == (10.0, 50.5, 90.0)


def check_config_and_topology():
    cfg = pyhetnet.NetworkConfig(trials=20, snr_db="0,10", strategies="no_coord,full_coord")
    assert cfg.trials == 20 and cfg.strategies == ["no_coord", "full_coord"]
    try:
        pyhetnet.NetworkConfig(rho=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("rho outside [0,1] should be rejected")

    topo = pyhetnet.build_topology(cfg, seed=3)
    kinds = [s["kind"] for s in topo["sites"]]
    assert kinds == ["macro", "micro", "micro"], kinds
    assert len(topo["users"]) == 6 + 2 * 4
    return cfg


def check_experiment(cfg):
    rows = pyhetnet.run_experiment(cfg)
    micro = [r for r in rows if r["metric"] == "micro_cell_rate"]
    assert len(micro) == 2 * 2 and all(r["value"] > 0 for r in micro)

    text = pyhetnet.run_experiment_text(cfg, "csv")
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert len(parsed) == len(rows)
    assert all(float(p["value"]) == r["value"] for p, r in zip(parsed, rows))


def main():
    check_received_power()
    check_beamformer()
    check_formulas()
    cfg = check_config_and_topology()
    check_experiment(cfg)
    print("pyhetnet smoke test passed:", cfg)


if __name__ == "__main__":
    main()
