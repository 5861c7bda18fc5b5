"""Independent reference values for the Rust test-suite.

Run with `python3 tools/oracles.py`; the printed constants are pasted into
crates/core/tests/common/oracles.rs and must not be regenerated from the Rust
implementation.
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 40

TABLE = {
    "clay_shale": dict(rho=2590, c11=66.6, c12=19.7, c13=39.4, c22=66.6, c23=39.4, c33=39.9,
                       c44=10.9, c55=10.9, c66=23.4, te1=8.00e-3, ts1=7.49e-3, te2=8.00e-3, ts2=7.25e-3),
    "phenolic": dict(rho=1364, c11=11.7, c12=6.7, c13=7.0, c22=15.4, c23=7.0, c33=17.4,
                     c44=3.8, c55=3.5, c66=3.1, te1=6.4e-3, ts1=6.0e-3, te2=6.4e-3, ts2=5.8e-3),
    "sandstone": dict(rho=2500, c11=25.6, c12=9.4, c13=9.4, c22=25.6, c23=9.4, c33=25.6,
                      c44=16.2, c55=16.2, c66=16.2, te1=3.72e-3, ts1=3.36e-3, te2=3.78e-3, ts2=3.30e-3),
}


def moduli(m):
    d = (m["c11"] + m["c22"] + m["c33"]) / 3
    g = (m["c44"] + m["c55"] + m["c66"]) / 3
    return d, g, d - 4 * g / 3


def christoffel_max(m):
    c11, c13, c33, c55 = (mp.mpf(m[k]) * mp.mpf(10) ** 9 for k in ("c11", "c13", "c33", "c55"))
    rho = mp.mpf(m["rho"])
    best = mp.mpf(0)
    for n1, n3 in ((1, 0), (0, 1), (1 / mp.sqrt(2), 1 / mp.sqrt(2))):
        g = mp.matrix([[c11 * n1**2 + c55 * n3**2, (c13 + c55) * n1 * n3],
                       [(c13 + c55) * n1 * n3, c55 * n1**2 + c33 * n3**2]])
        ev = mp.eigsy(g)[0]
        best = max(best, max(mp.sqrt(e / rho) for e in ev))
    return best


def zener(te, ts, w):
    return (ts / te) * (1 + 1j * w * te) / (1 + 1j * w * ts)


def complex_stiffness(m, w):
    """2D Voigt stiffness (e11, e33, g13) with the Zener correction on the two modes."""
    d, g, k = moduli(m)
    c = np.array([[m["c11"], m["c13"], 0], [m["c13"], m["c33"], 0], [0, 0, m["c55"]]], dtype=complex) * 1e9
    p = np.array([[1, 1, 0], [0.5, -0.5, 0], [0, 0, 1]])
    gam = np.diag([k, 4 * g, m["c55"]]) * 1e9
    mm = np.diag([zener(m["te1"], m["ts1"], w) - 1, zener(m["te2"], m["ts2"], w) - 1,
                  zener(m["te2"], m["ts2"], w) - 1])
    return c + p.T @ gam @ mm @ p


def christoffel_root(m, k, w0):
    """Nonlinear dispersion det(K(w) - rho w^2) = 0 for complex w (e^{i(wt-kx)})."""
    k1, k3 = k

    def det(w):
        w = complex(w)
        c = complex_stiffness(m, w)
        # strain from displacement u e^{-ikx}: e11 = -ik1 u1, e33 = -ik3 u3, g13 = -i(k3 u1 + k1 u3)
        b = np.array([[k1, 0], [0, k3], [k3, k1]])
        kk = b.T @ c @ b
        return np.linalg.det(kk - m["rho"] * w * w * np.eye(2))

    scale = (m["rho"] * w0 * w0) ** 2
    w = complex(w0)
    for _ in range(60):
        f = det(w) / scale
        h = 1e-7 * abs(w)
        df = (det(w + h) - det(w - h)) / (2 * h) / scale
        step = f / df
        w -= step
        if abs(step) < 1e-15 * abs(w):
            break
    return w


def state_space_modes(m, k):
    """Eigenvalues of the (sigma, e, v) first-order system in its rate-memory form."""
    d, g, kk = moduli(m)
    c = np.array([[m["c11"], m["c13"], 0], [m["c13"], m["c33"], 0], [0, 0, m["c55"]]]) * 1e9
    mmat = np.array([[kk, 2 * g, 0], [kk, -2 * g, 0], [0, 0, m["c55"]]]) * 1e9
    p = np.array([[1, 1, 0], [0.5, -0.5, 0], [0, 0, 1]])
    t1 = (1 / m["ts1"]) * (m["ts1"] / m["te1"] - 1)
    t2 = (1 / m["ts2"]) * (m["ts2"] / m["te2"] - 1)
    tt = np.diag([t1, t2, t2])
    lam = np.diag([1 / m["ts1"], 1 / m["ts2"], 1 / m["ts2"]])
    k1, k3 = k
    # strain rate = G v with G = -i B
    b = -1j * np.array([[k1, 0], [0, k3], [k3, k1]])
    lmat = np.zeros((8, 8), dtype=complex)
    lmat[0:3, 6:8] = c @ b
    lmat[0:3, 3:6] = mmat
    lmat[3:6, 6:8] = tt @ p @ b
    lmat[3:6, 3:6] = -lam
    lmat[6:8, 0:3] = b.T / m["rho"]
    # d/dt q = L q  and  d/dt -> i w
    w = np.linalg.eigvals(-1j * lmat)
    return w


def main():
    print("// moduli (Pa)")
    for name in ("sandstone", "clay_shale"):
        d, g, k = moduli(TABLE[name])
        print(name, "D", repr(d * 1e9), "G", repr(g * 1e9), "K", repr(k * 1e9))
    s = TABLE["sandstone"]
    c = mp.matrix([[s["c11"], s["c12"], s["c13"]], [s["c12"], s["c22"], s["c23"]], [s["c13"], s["c23"], s["c33"]]])
    r = c**-1
    print("// sandstone compliance (1/GPa)", [mp.nstr(r[0, 0], 17), mp.nstr(r[0, 1], 17), mp.nstr(r[0, 2], 17), mp.nstr(r[2, 2], 17)])
    t1 = (1 / mp.mpf("3.36e-3")) * (mp.mpf("3.36") / mp.mpf("3.72") - 1)
    print("// T1 sandstone", mp.nstr(t1, 17))
    for name, m in TABLE.items():
        print("// lambda_max", name, mp.nstr(christoffel_max(m), 17))

    print("// Hankel H^(2)_0, H^(2)_1")
    for z in (mp.mpc(0.3, 0), mp.mpc(2.5, -0.1), mp.mpc(7.0, -0.4), mp.mpc(11.9, -0.02),
              mp.mpc(12.1, -0.02), mp.mpc(25.0, -1.5), mp.mpc(140.0, -3.0)):
        h0 = mp.hankel2(0, z)
        h1 = mp.hankel2(1, z)
        print(f"    ({float(z.real)!r}, {float(z.imag)!r}, {float(h0.real)!r}, {float(h0.imag)!r}, "
              f"{float(h1.real)!r}, {float(h1.imag)!r}),")

    print("// plane-wave modes (rad/s), nonlinear Christoffel roots")
    for kvec in ((np.pi / 1000, np.pi / 1000), (2 * np.pi, 0.0)):
        m = s
        kn = np.hypot(*kvec)
        # elastic start guesses from the unrelaxed Christoffel speeds
        c11, c13, c33, c55 = (m[x] * 1e9 for x in ("c11", "c13", "c33", "c55"))
        n1, n3 = kvec[0] / kn, kvec[1] / kn
        gm = np.array([[c11 * n1**2 + c55 * n3**2, (c13 + c55) * n1 * n3],
                       [(c13 + c55) * n1 * n3, c55 * n1**2 + c33 * n3**2]]) / m["rho"]
        sp = np.sqrt(np.sort(np.linalg.eigvalsh(gm))[::-1])
        roots = [christoffel_root(m, kvec, kn * v) for v in sp]
        ss = state_space_modes(m, kvec)
        ss = sorted([w for w in ss if w.real > 1e-9], key=lambda w: -abs(w.real))[:2]
        print("k", kvec, "P", repr(roots[0]), "S", repr(roots[1]))
        print("   state-space check", ss, [abs(a - b) / abs(b) for a, b in zip(ss, roots)])

    print("// elastic Green's function, sandstone moduli c11/c55, rho 2500, receiver (250, 250)")
    rho = 2500.0
    cp = mp.sqrt(25.6e9 / rho)
    cs = mp.sqrt(16.2e9 / rho)
    x, z = mp.mpf(250), mp.mpf(250)
    rr = mp.sqrt(x * x + z * z)
    for w in (mp.mpf(50), mp.mpf(300), mp.mpf(1500)):
        kp, ks = w * rr / cp, w * rr / cs
        g1 = -1j * mp.pi / 2 * (mp.hankel2(0, kp) / cp**2 + mp.hankel2(1, ks) / (w * rr * cs) - mp.hankel2(1, kp) / (w * rr * cp))
        g3 = 1j * mp.pi / 2 * (mp.hankel2(0, ks) / cs**2 - mp.hankel2(1, ks) / (w * rr * cs) + mp.hankel2(1, kp) / (w * rr * cp))
        pre = 1 / (2 * mp.pi * rho)
        u1 = pre * x * z / rr**2 * (g1 + g3)
        u3 = pre / rr**2 * (z * z * g1 - x * x * g3)
        print(f"    ({float(w)!r}, {float(u1.real)!r}, {float(u1.imag)!r}, {float(u3.real)!r}, {float(u3.imag)!r}),")


if __name__ == "__main__":
    main()
