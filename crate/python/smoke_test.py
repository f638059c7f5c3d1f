"""Smoke test for the aclab extension module.

Build and place the module next to this script first:

    cargo build --release -p aclab-py --features extension-module
    cp target/release/libaclab_py.so python/aclab.so
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import aclab  # noqa: E402


def close(x, y, tol):
    return abs(x - y) <= tol * max(1.0, abs(y))


def main():
    assert close(aclab.kappa(1.0, 1.0, 0.0), math.tanh(1.0), 1e-14)
    assert close(aclab.ecost_opt(0.0, 0.0), 1.5, 1e-14)
    assert close(aclab.ecost_constant_gain(0.0, 0.0, 5.0), 1.5, 1e-14)
    assert aclab.ecost_opt(3.0, 2.0) <= aclab.ecost_constant_gain(1.0, 3.0, 2.0)
    regime, _ = aclab.opt_lower_bound(10.0, 100.0, 1.0)
    assert regime == "|b| >= a"
    p = aclab.reflection_sup_prob(0.0, 1.0, 1.0)
    assert close(p, math.erfc(1.0 / math.sqrt(2.0)), 1e-12)

    cg = aclab.Blueprint.constant_gain(1.0)
    path = aclab.simulate(cg, a=0.0, b=1.0, zero_noise=True)
    assert close(path["cost"], 1.0 - math.exp(-2.0), 1e-12)
    assert len(path["t"]) == len(path["q"]) == len(path["u"]) + 1

    br = aclab.Blueprint.br(10.0)
    assert aclab.Blueprint.from_json(br.to_json()) == br
    assert json.loads(br.to_json())["kind"] == "br"
    run = aclab.simulate(br, a=10.0, b=0.0, zero_noise=True)
    tags = [tag for _, tag in run["events"]]
    assert tags == [f"{nu}.i" for nu in range(1, 11)] + ["apathy"], tags
    assert br.replay(run["t"], run["q"])[: len(run["u"])] == run["u"]

    mean, se, n = aclab.estimate_expected_cost(aclab.Blueprint.constant_gain(0.0), 0.0, 2.0,
                                               n_paths=4000, seed=1, dt_base=0.01)
    assert n == 4000 and abs(mean - 1.5) < 4 * se, (mean, se)

    rows = aclab.regret_sweep([15.0], [-1.0, 1.0], ["br", "cg(1)", "opt(b)"], n_paths=200, seed=3)
    assert [r["strategy"] for r in rows[:3]] == ["br", "cg(1)", "opt(b)"]
    assert all(math.isfinite(r["mreg"]) for r in rows)

    (stay, _, _), (leave, _, _) = aclab.estimate_lemma("bkpl-A", 50.0, beta=50.0 * math.exp(4), n_paths=2000)
    assert stay < 0.01 and close(stay + leave, 1.0, 1e-12)
    hit, _, _ = aclab.estimate_lemma("nhl-Ai", 50.0, n_paths=2000)
    assert hit < 0.05

    for bad in (lambda: aclab.kappa(-1.0, 0.0, 0.0),
                lambda: aclab.Blueprint.br(10.0, q0=0.5),
                lambda: aclab.regret_sweep([0.0], [0.0], ["nope"])):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    try:
        aclab.kappa(1.0, 0.0, 400.0)
    except OverflowError:
        pass
    else:
        raise AssertionError("expected OverflowError")

    print(f"aclab {aclab.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
