"""Smoke test for the biostab extension module.

Build and install first:  pip install --no-build-isolation -e crates/py
"""

import math

import biostab


def main():
    p = biostab.SuspensionParams(swim_speed=10, optical_depth=0.5, critical_intensity=0.63, rayleigh_thermal=50)
    p.validate()
    deg, cos0, slant = p.geometry()
    assert deg == 0.0 and cos0 == 1.0 and slant == 0.5

    q = biostab.SuspensionParams.from_config(p.to_config())
    assert q.to_config() == p.to_config()
    try:
        biostab.SuspensionParams(mesh_points=11).validate()
        raise AssertionError("mesh_points = 11 was accepted")
    except ValueError as e:
        assert "mesh below 51" in str(e)

    b = biostab.basic_state(p)
    assert abs(b.mass - 1.0) < 1e-8 and b.ode_residual < 1e-8
    print(f"basic state: sublayer z = {b.sublayer:.4f}, max n_s = {max(b.n_s):.4f}")

    off = biostab.SuspensionParams(swim_speed=0, top_boundary="rigid")
    r = biostab.growth_rate(off, 3.117, rb=0.0, rt=1707.76)
    assert abs(r.sigma.real) < 1e-3 and r.branch == "stationary" and r.mode == 1
    print(f"growth at the convection threshold: sigma = {r.sigma:.3e}")

    rigid_free = biostab.SuspensionParams(swim_speed=0, rayleigh_bio=0, top_boundary="free", mesh_points=51)
    curve = biostab.neutral_curve(rigid_free, 2.2, 3.2, 0.1, sweep="rt")
    k_c, r_c, lam, branch, mode = curve.critical_point()
    print(f"rigid-free neutral curve: k_c = {k_c:.4f}, R_c = {r_c:.2f}, {branch}, mode {mode}")
    assert abs(k_c * lam - 2 * math.pi) < 1e-12
    assert abs(r_c - biostab.benard_neutral("rigid-free", k_c)) < 1e-2 * r_c

    rows = biostab.selftest()
    failed = [name for name, ok, _ in rows if not ok]
    assert not failed, failed
    print(f"selftest: {len(rows)} checks passed")


if __name__ == "__main__":
    main()
