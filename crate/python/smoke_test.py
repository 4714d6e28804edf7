"""Smoke test for the Python bindings.

Build and install first:

    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/optomech-*.whl
"""

import math
import sys
import tempfile
from pathlib import Path

import optomech


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    p = optomech.PhysicalParams.reference()
    assert p.get("quality") == 1.5e5

    d = optomech.derive(p)
    print(f"G_r/Om = {d['geff_r'] / p.get('omega_m'):.4f}  n_mech = {d['nbar_mech']:.1f}")

    st = optomech.stability(p)
    assert st["stable"] and st["margin"] < 0

    cm = optomech.output_cm(p)
    assert len(cm["matrix"]) == 6 and len(cm["quad_error"][0]) == 6

    block = optomech.reduce(p)
    en = optomech.log_negativity(block)
    print(f"{block!r}  E_N = {en:.4f}  duan = {optomech.duan_sum(block):.4f}")
    assert en > 0 and block.c > 0

    dark = p.with_field("power_r", 0.0).with_field("power_l", 0.0)
    vac = optomech.reduce(dark)
    assert close(vac.big_l, 0.5, 1e-6) and close(vac.big_r, 0.5, 1e-6)
    assert close(vac.c, 0.0, 1e-6)

    tmsv = optomech.TwoModeBlock(math.cosh(2.0) / 2, math.cosh(2.0) / 2, math.sinh(2.0) / 2)
    assert close(optomech.log_negativity(tmsv), 2.0, 1e-9)

    caps = optomech.capacities(1.0)
    assert close(caps["i_f"], 2.0, 1e-12) and close(caps["i_d_opt"], math.log2(3), 1e-12)
    assert optomech.rate_om(block, 5.0) > caps["i_c_het"]

    try:
        optomech.rate_om(block, 0.0)
    except ValueError as e:
        print("below floor:", e)
    else:
        raise AssertionError("rate below the n-bar floor must fail")

    unstable = p.with_field("power_l", 4.8).with_field("power_r", 1.0)
    assert not optomech.evaluate(unstable)["stability"]["stable"]
    try:
        optomech.reduce(unstable)
    except ArithmeticError:
        pass
    else:
        raise AssertionError("unstable model must not produce a block")

    csv_text = optomech.sweep(p, "filter_omega_l:0.9:1.1:5:omega_m", "rate:5", workers=2)
    rows = csv_text.strip().splitlines()
    assert rows[0].startswith("filter_omega_l_over_omega_m,i_om,stable") and len(rows) == 6

    with tempfile.TemporaryDirectory() as tmp:
        files = optomech.figure("fig7", out=tmp, workers=1)
        assert (Path(tmp) / "manifest.json").exists()
        checks = files["manifest.json"]["extra"]["checks"]
        print("fig7 I_OM > I_F on", checks["beats_fock"][0], "..", checks["beats_fock"][-1])

    print("optomech", optomech.__version__, "ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
