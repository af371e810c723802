"""Smoke test for the Python bindings.

Build first with `cargo build --release -p dmcic-py`, then run
`python3 python/smoke_test.py`. The script imports an installed `dmcic_py`
if there is one, otherwise it loads the freshly built library from
target/release.
"""

import importlib.util
import math
import pathlib
import shutil
import sys
import tempfile


def load_module():
    try:
        import dmcic_py

        return dmcic_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        lib = root / "target" / profile / "libdmcic_py.so"
        if lib.exists():
            break
    else:
        sys.exit("libdmcic_py.so not found; run `cargo build --release -p dmcic-py`")
    # the import machinery wants the module name as the file stem
    tmp = pathlib.Path(tempfile.mkdtemp()) / "dmcic_py.so"
    shutil.copy(lib, tmp)
    spec = importlib.util.spec_from_file_location("dmcic_py", tmp)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    d = load_module()
    budget = d.Budget(restarts=16, seed=1)

    ch = d.Channel.family("identical_outputs", [0.1])
    assert ch.sizes == (2, 2, 2, 2)
    profile = d.classify(ch, budget)
    verdicts = {r["id"]: r["verdict"] for r in profile["reports"]}
    assert set(verdicts) == set(d.CONDITIONS)
    assert all(v == "holds" for v in verdicts.values()), verdicts

    nc = d.Channel.family("null_cognitive_output", [0.0])
    cmc = d.check_condition(nc, "CMC", budget)
    assert cmc["verdict"] == "fails" and abs(cmc["worst_gap"] + 1.0) < 1e-9

    pair = d.Channel.family("noiseless_pair")
    s = d.weighted_sum_max(pair, "C_II", (1.0, 1.0), budget)
    assert abs(s["value"] - 2.0) < 1e-9

    square = d.compute_region(d.Channel.family("noiseless_product"), "C_IV", budget=budget)
    assert square["csv"].startswith("theta,R1,R2,tight_constraints")
    assert d.hausdorff(square["vertices"], [[1, 0], [1, 1], [0, 1]]) < 1e-6
    ok, viol = d.region_subset([[1, 0], [1, 1], [0, 1]], [[1, 0], [0, 1]])
    assert not ok and math.isclose(viol, 1.0)

    r = d.Channel.random(3)
    assert d.Channel.from_json(r.to_json()).to_json() == r.to_json()
    try:
        d.Channel.family("identical_outputs", [0.7])
    except ValueError:
        pass
    else:
        raise AssertionError("flip 0.7 accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
