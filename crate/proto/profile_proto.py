# Dev-time prototype. Fast scipy evaluation of g and its radial derivatives
# via the scaled-Bessel moment integrals G_j, checked at a few points against
# mpmath. Also: envelope stabilization, Gauss-Laguerre convergence, closed
# form critical radii. Not wired into the build.
import mpmath as mp
import numpy as np
from scipy import integrate, special

A1 = 3 * 2 ** (1 / 3.0) / 16
S_CUT = 6.2


def scaled_j(nu, s, eta):
    """eta^-nu J_nu(s eta), stable at eta -> 0 (array in s)."""
    z = s * eta
    out = np.empty_like(s)
    small = z < 1e-6
    # leading series term (s/2)^nu/Gamma(nu+1): enough at z<1e-6 for abs 1e-15
    out[small] = (s[small] / 2.0) ** nu / special.gamma(nu + 1)
    if eta > 0:
        out[~small] = eta ** (-nu) * special.jv(nu, z[~small])
    return out


def g_moment(n, eta, j, pts=4001):
    nu = (n - 2) / 2.0
    s = np.linspace(0, S_CUT, pts)
    f = np.exp(-(s ** 4)) * s ** (nu + 1 + j) * scaled_j(nu + j, s, eta)
    return integrate.simpson(f, x=s)


def g_deriv(n, eta, m):
    G = lambda j: g_moment(n, eta, j)
    e = eta
    if m == 0:
        return G(0)
    if m == 1:
        return -e * G(1)
    if m == 2:
        return -G(1) + e ** 2 * G(2)
    if m == 3:
        return 3 * e * G(2) - e ** 3 * G(3)
    if m == 4:
        return 3 * G(2) - 6 * e ** 2 * G(3) + e ** 4 * G(4)
    raise ValueError


def g_profile_mp(n, eta, dps=22):
    with mp.workdps(dps):
        nu = mp.mpf(n - 2) / 2
        eta = mp.mpf(eta)

        def integrand(s):
            z = s * eta
            if z < mp.mpf("1e-10"):
                scaled = (s / 2) ** nu / mp.gamma(nu + 1)
            else:
                scaled = eta ** (-nu) * mp.besselj(nu, z)
            return mp.e ** (-(s ** 4)) * s ** (nu + 1) * scaled

        return mp.quad(integrand, [0, 1, 2, 3, 4.5, 6.2])


print("== reference g values (mpmath, 17 digits) ==")
for n, eta in [(1, 0.0), (1, 1.0), (1, 3.0), (2, 0.5), (2, 2.0), (3, 1.0), (3, 6.0), (5, 2.0), (6, 4.0)]:
    v = g_profile_mp(n, eta)
    print(f"g(n={n}, eta={eta}) = {mp.nstr(v, 17)}   scipy diff={abs(float(v) - g_deriv(n, eta, 0)):.2e}")

print("\nclosed form g(0): 2^{-(n-2)/2} Gamma(n/4) / (4 Gamma(n/2))")
for n in range(1, 7):
    v = mp.mpf(2) ** (-mp.mpf(n - 2) / 2) / mp.gamma(mp.mpf(n) / 2) * mp.gamma(mp.mpf(n) / 4) / 4
    print(f"  n={n}: {mp.nstr(v, 17)}  scipy diff={abs(float(v) - g_deriv(n, 0.0, 0)):.2e}")

print("\n== finite-difference check of G_j derivative formulas (n=2, eta=1.3) ==")
h = 1e-4
for m in (1, 2, 3, 4):
    fd = sum(
        c * g_deriv(2, 1.3 + k * h, 0)
        for c, k in {
            1: [(-0.5, -1), (0.5, 1)],
            2: [(1.0, -1), (-2.0, 0), (1.0, 1)],
            3: [(-0.5, -2), (1.0, -1), (-1.0, 1), (0.5, 2)],
            4: [(1.0, -2), (-4.0, -1), (6.0, 0), (-4.0, 1), (1.0, 2)],
        }[m]
    ) / h ** m
    an = g_deriv(2, 1.3, m)
    print(f"  m={m}: formula={an:.12f} fd={fd:.12f} rel={abs(an - fd) / abs(an):.2e}")

print("\n== normalization ==")
for n in (1, 2, 3):
    surf = float(2 * mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2))
    rs = np.linspace(0, 40, 4001)
    gs = np.array([g_deriv(n, r, 0) for r in rs])
    val = surf * integrate.simpson(gs * rs ** (n - 1), x=rs)
    print(f"  n={n}: {val:.10f}")

print("\n== envelope ratio stabilization ==")
for n in (1, 2, 3, 6):
    for m in (0, 1, 2):
        etas = np.arange(0.0, 12.01, 0.25)
        ratios = []
        for e in etas:
            gm = g_deriv(n, e, m)
            denom = (1 + e) ** (-(n - m) / 3.0) * np.exp(-A1 * e ** (4 / 3.0))
            ratios.append(abs(gm) / denom)
        ratios = np.array(ratios)
        c8 = ratios[etas <= 8].max()
        c12 = ratios.max()
        am8 = etas[ratios.argmax()]
        print(f"  n={n} m={m}: C8={c8:.6f} C12={c12:.6f} incr={(c12 - c8) / c8 * 100:.3f}% argmax={am8}")

print("\n== kernel-lemma ratios as functions of eta ==")
for n in (1, 5):
    etas = np.arange(0.0, 12.01, 0.25)
    g0 = np.array([g_deriv(n, e, 0) for e in etas])
    g1 = np.array([g_deriv(n, e, 1) for e in etas])
    g2 = np.array([g_deriv(n, e, 2) for e in etas])
    E = np.exp(-A1 * etas ** (4 / 3.0))
    Bt = -(n / 4.0) * g0 - etas / 4.0 * g1          # time-derivative profile
    Bxt = -((n + 1) / 4.0) * g1 - etas / 4.0 * g2   # d_t of gradient profile
    rk = np.abs(g0) / E
    rkt = np.abs(Bt) / ((1 + etas) ** (-(n - 4) / 3.0) * E)
    rkx = np.abs(g1) / ((1 + etas) ** (-(n - 1) / 3.0) * E)
    rb1 = np.abs(Bt) * (1 + etas) ** (n + 4)
    rb2 = np.abs(Bxt) * (1 + etas) ** (n + 5)
    for name, r in [("k", rk), ("kt", rkt), ("kx", rkx), ("bxt01", rb1), ("bxt11", rb2)]:
        i23 = etas <= 8
        print(f"  n={n} {name}: C8={r[i23].max():.4f} C12={r.max():.4f} incr={(r.max() - r[i23].max()) / r[i23].max() * 100:.3f}%")

print("\n== Gauss-Laguerre alpha=-1/2 for exp(-a/r) vs exp(-2 sqrt(a)) ==")
for nnodes in (32, 64):
    r, w = special.roots_genlaguerre(nnodes, -0.5)
    errs = []
    for a in (1e-8, 1e-4, 0.01, 0.0625, 0.25, 1.0, 4.0, 25.0):
        approx = (w * np.exp(-a / r)).sum() / special.gamma(0.5)
        exact = np.exp(-2 * np.sqrt(a))
        errs.append((a, abs(approx - exact)))
    print(f"  nodes={nnodes}: " + " ".join(f"a={a:g}:{e:.1e}" for a, e in errs))

print("\n== closed forms ==")
om5 = mp.pi ** mp.mpf("2.5") / mp.gamma(mp.mpf("3.5"))
print("omega_5 =", mp.nstr(om5, 17))
print("gamma const c=1 n=5:", mp.nstr(om5 ** mp.mpf("-0.5"), 17))
print("gamma power a=2 n=5:", mp.nstr((mp.mpf(5) / 7 * om5) ** (-mp.mpf(1) / 4), 17))
print("A1 =", mp.nstr(3 * mp.cbrt(2) / 16, 17))
print("Gamma(1/4)/(2 sqrt(2pi)) =", mp.nstr(mp.gamma(0.25) / (2 * mp.sqrt(2 * mp.pi)), 17))
print("2/pi =", mp.nstr(2 / mp.pi, 17), "  3^(1/3) =", mp.nstr(mp.cbrt(3), 17))
print("J0 first zero =", mp.nstr(mp.besseljzero(0, 1), 17))
