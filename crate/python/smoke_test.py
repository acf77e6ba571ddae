"""Smoke test for the tsr_relay_py extension.

Build and install with `maturin develop -m crates/py/Cargo.toml --release`,
or copy target/release/libtsr_relay_py.so next to this file as
tsr_relay_py.so, then run `python python/smoke_test.py`.
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import tsr_relay_py as tr


def main():
    sv = tr.singular_values([[3 + 0j, 0j], [0j, 4j]])
    assert [round(x, 12) for x in sv] == [4.0, 3.0], sv

    sc = tr.Scenario(n_s=3, n_r=3, n_d=3, k_subcarriers=2, phi=0.4)
    assert sc.subchannels() == 6
    assert tr.Scenario.from_config(sc.to_config()).phi == 0.4
    try:
        tr.Scenario(phi=2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("phi=2 accepted")

    inst = tr.Instance(sc, seed=11)
    assert len(inst) == 6
    assert inst.gains1 == sorted(inst.gains1, reverse=True)
    assert sorted(inst.pairing) == list(range(6))

    alpf = inst.optimize()
    oracle = inst.oracle()
    bench = inst.benchmark()
    assert alpf["converged"], alpf
    assert alpf["rate"] >= bench["rate"] - 1e-9
    assert abs(alpf["rate"] - oracle["rate"]) <= 0.01 * oracle["rate"]
    again = inst.rate(alpf["alpha"], alpf["mu"], alpf["mu_bar"])
    assert math.isclose(again, alpf["rate"], rel_tol=1e-12)
    assert inst.relay_power(alpf["alpha"]) > 0

    with tempfile.TemporaryDirectory() as d:
        out = os.path.join(d, "phi.csv")
        rows = tr.run_experiment(
            f"sweep = phi\nsweep_values = 0.3, 0.7\ntrials = 4\n"
            f"solvers = alpf, oracle, benchmark\noutput = {out}\n"
        )
        assert len(rows) == 6
        with open(out) as f:
            assert len(f.read().splitlines()) == 7

    st = tr.selftest(trials=6, seed=1)
    assert st["passed"], st["failures"]

    print(f"alpf {alpf['rate']:.1f} bit/s, oracle {oracle['rate']:.1f}, "
          f"benchmark {bench['rate']:.1f}, alpha {alpf['alpha']:.4f}")
    print("smoke test PASS")


if __name__ == "__main__":
    main()
