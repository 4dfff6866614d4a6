"""Quick end-to-end check of the gkp_magic extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/py/Cargo.toml`.
"""

import math

import gkp_magic as gm


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    vac = gm.GaussianState.vacuum()
    b = gm.bloch_normalized(vac, 0.0, 0.0)
    assert close(b.r[0], b.r[2], 1e-14) and abs(b.r[1]) < 1e-14, b
    assert close(b.norm(), 1.0, 1e-12)
    assert close(gm.pdf(vac, 0.0, 0.0), 0.0939285204, 1e-9)

    st = gm.GaussianState([0.3, -0.2], [[0.8, 0.1], [0.1, 0.6]])
    for mu in range(4):
        a = gm.bloch_theta(st, 0.7, 1.1, mu)
        c = gm.bloch_lattice_sum(st, 0.7, 1.1, mu)
        assert close(a, c, 1e-10), (mu, a, c)

    f, idx = gm.fidelity_to_nearest(list(b.r), "H")
    assert close(f, 1.0, 1e-12) and idx == 4

    fmap = gm.fidelity_map(vac, "H", "square", 16)
    lo, hi, above = fmap.summary()
    assert above > 0.99 and len(fmap.fidelity) == 256

    hot = gm.fidelity_map(gm.GaussianState.thermal(0.5), "H", "square", 8)
    assert hot.summary()[1] < gm.H_DISTILL_THRESHOLD

    nbar, (lo, hi) = gm.threshold_nbar("H", "square")
    assert close(nbar, 0.366, 0.005) and lo <= nbar <= hi

    p = gm.success_curve(0.0, [0.5], "H", "square")
    assert close(p[0], 1.0, 1e-4)

    err, n = gm.verify_dual_route(seed=1, n_pairs=5)
    assert n == 20 and err < 1e-10

    tq, tp = gm.heterodyne_to_outcome(complex(0.5, -0.25))
    assert math.isfinite(tq) and math.isfinite(tp)

    try:
        gm.GaussianState.thermal(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative occupation accepted")

    print("gkp_magic smoke test passed")


if __name__ == "__main__":
    main()
