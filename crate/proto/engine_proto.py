# Dev-time prototype round 2: unit-mass profile references, bxt stabilization
# range, Poisson node-count convergence configs, Strang order config, Duhamel
# configs, column mass. Not wired into the build.
import mpmath as mp
import numpy as np
from scipy import integrate, special

A1 = 3 * 2 ** (1 / 3.0) / 16
S_CUT = 6.2


def g_moment(n, eta, j, pts=6001):
    nu = (n - 2) / 2.0
    s = np.linspace(1e-12, S_CUT, pts)
    z = s * eta
    order = nu + j
    scaled = (s / 2.0) ** order / special.gamma(order + 1)
    big = z >= 1e-6
    if big.any():
        scaled[big] = eta ** (-order) * special.jv(order, z[big])
    f = np.exp(-(s ** 4)) * s ** (nu + 1 + j) * scaled
    # unit-mass normalization: (2pi)^-n * (2pi)^{n/2} = (2pi)^{-n/2} times the
    # bare Hankel moment
    return (2 * np.pi) ** (-n / 2.0) * integrate.simpson(f, x=s)


def g_deriv(n, eta, m):
    G = lambda j: g_moment(n, eta, j)
    e = eta
    return {
        0: lambda: G(0),
        1: lambda: -e * G(1),
        2: lambda: -G(1) + e ** 2 * G(2),
        3: lambda: 3 * e * G(2) - e ** 3 * G(3),
        4: lambda: 3 * G(2) - 6 * e ** 2 * G(3) + e ** 4 * G(4),
    }[m]()


print("== unit-mass g reference values (freeze candidates) ==")
with mp.workdps(25):
    print("g(0) closed form n=1..6: 2^{-(n-2)/2} Gamma(n/4)/(4 Gamma(n/2)) / (2pi)^{n/2}")
    for n in range(1, 7):
        v = (
            mp.mpf(2) ** (-mp.mpf(n - 2) / 2)
            / mp.gamma(mp.mpf(n) / 2)
            * mp.gamma(mp.mpf(n) / 4)
            / 4
            / (2 * mp.pi) ** (mp.mpf(n) / 2)
        )
        print(f"  n={n}: {mp.nstr(v, 17)}   scipy {g_deriv(n, 0.0, 0):.15e}")
    print("  Gamma(1/4)/(4 pi) =", mp.nstr(mp.gamma(mp.mpf(1) / 4) / (4 * mp.pi), 17))
for n, eta in [(1, 1.0), (1, 3.0), (2, 0.5), (2, 2.0), (3, 1.0), (3, 6.0), (5, 2.0)]:
    print(f"  g(n={n}, eta={eta}) = {g_deriv(n, eta, 0):.15e}")

print("\n== normalization check (unit-mass) ==")
for n in (1, 2, 3):
    surf = 2 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)
    rs = np.linspace(0, 40, 4001)
    gs = np.array([g_deriv(n, r, 0) for r in rs])
    print(f"  n={n}: {surf * integrate.simpson(gs * rs ** (n - 1), x=rs):.12f}")

print("\n== bxt stabilization with eta up to 24 (tail rule: <=16 vs <=24) ==")
for n in range(1, 7):
    etas = np.arange(0.0, 24.01, 0.25)
    g0 = np.array([g_deriv(n, e, 0) for e in etas])
    g1 = np.array([g_deriv(n, e, 1) for e in etas])
    g2 = np.array([g_deriv(n, e, 2) for e in etas])
    Bt = -(n / 4.0) * g0 - etas / 4.0 * g1
    Bxt = -((n + 1) / 4.0) * g1 - etas / 4.0 * g2
    r01 = np.abs(Bt) * (1 + etas) ** (n + 4)
    r11 = np.abs(Bxt) * (1 + etas) ** (n + 5)
    for name, r in [("(0,1)", r01), ("(1,1)", r11)]:
        c16 = r[etas <= 16].max()
        c24 = r.max()
        print(
            f"  n={n} {name}: C16={c16:.4e} C24={c24:.4e} incr={(c24 - c16) / c16 * 100:.3f}% argmax_eta={etas[r.argmax()]}"
        )

print("\n== Poisson sigma=1/2: pick box so 32->64 diff < 1e-8 on t in [0.1,1] ==")
for box in (0.5, 0.625, 0.7, 1.0, 1.4):
    mu = (2 * np.pi / box) ** 4
    worst = 0.0
    vals = {}
    for t in (0.1, 0.25, 0.5, 1.0):
        a = t * t * mu / 4.0
        out = {}
        for N in (32, 64):
            r, w = special.roots_genlaguerre(N, -0.5)
            out[N] = (w * np.exp(-a / r)).sum() / special.gamma(0.5)
        d = abs(out[32] - out[64])
        e64 = abs(out[64] - np.exp(-2 * np.sqrt(a)))
        worst = max(worst, d)
        vals[t] = (out[64], d, e64)
    print(f"  box={box}: mu={mu:.1f} worst |P32-P64|={worst:.2e}")
    for t, (v, d, e) in vals.items():
        print(f"    t={t}: P64={v:.3e} diff={d:.2e} err_vs_exact={e:.2e}")

print("\n== Strang order (d=1, m=128, box=2pi, V=sin^2(x)) ==")
m, box = 128, 2 * np.pi
x = np.arange(m) * box / m
freq = np.fft.fftfreq(m, d=1.0 / m)
xi4 = (2 * np.pi / box * freq) ** 4
K = np.zeros((m, m))
for dlt in range(m):
    K[0, dlt] = (xi4 * np.cos(2 * np.pi * freq * dlt / m)).real.sum() / m
for i in range(1, m):
    K[i] = np.roll(K[0], i)
V = np.sin(x) ** 2
M = K + np.diag(V ** 2)
lam, Q = np.linalg.eigh(M)
rng = np.random.default_rng(7)
coef = rng.standard_normal(2 * (m // 8) + 1)
f = coef[0] * np.ones(m)
for k in range(1, m // 8 + 1):
    f += coef[2 * k - 1] * np.cos(2 * np.pi * k * x / box) + coef[2 * k] * np.sin(2 * np.pi * k * x / box)


def bi_step(u, t):
    return np.fft.ifft(np.fft.fft(u) * np.exp(-t * xi4)).real


def strang(u, t, steps):
    dt = t / steps
    for _ in range(steps):
        u = u * np.exp(-dt * V ** 2 / 2)
        u = bi_step(u, dt)
        u = u * np.exp(-dt * V ** 2 / 2)
    return u


for t in (0.2, 0.5, 1.0):
    dense = Q @ (np.exp(-t * lam) * (Q.T @ f))
    errs = {}
    for steps in (2, 4, 8, 16):
        errs[steps] = np.linalg.norm(strang(f, t, steps) - dense) / np.sqrt(m)
    orders = [np.log2(errs[s] / errs[2 * s]) for s in (2, 4, 8)]
    print(f"  t={t}: errs={[f'{errs[s]:.3e}' for s in (2,4,8,16)]} orders={[f'{o:.3f}' for o in orders]}")

print("\n== Duhamel residual (d=1, m=64, box=2pi) ==")
m = 64
x = np.arange(m) * box / m
freq = np.fft.fftfreq(m, d=1.0 / m)
xi4 = (2 * np.pi / box * freq) ** 4
K = np.zeros((m, m))
for dlt in range(m):
    K[0, dlt] = (xi4 * np.cos(2 * np.pi * freq * dlt / m)).real.sum() / m
for i in range(1, m):
    K[i] = np.roll(K[0], i)


def residual(Vv, t, panels, f):
    M = K + np.diag(Vv ** 2)
    lam, Q = np.linalg.eigh(M)
    ev = lambda u, s: Q @ (np.exp(-s * lam) * (Q.T @ u))
    bi = lambda u, s: np.fft.ifft(np.fft.fft(u) * np.exp(-s * xi4)).real
    integrand = lambda s: bi(Vv ** 2 * ev(f, s), t - s)
    h = t / panels
    acc = np.zeros(m)
    for p in range(panels):
        lo = p * h
        acc += integrand(lo) + 4 * integrand(lo + h / 2) + integrand(lo + h)
    integral = acc * h / 6
    r = ev(f, t) - bi(f, t) + integral
    return np.linalg.norm(r) * np.sqrt(box / m)


rng = np.random.default_rng(11)
coef = rng.standard_normal(2 * (m // 8) + 1)
f = coef[0] * np.ones(m)
for k in range(1, m // 8 + 1):
    f += coef[2 * k - 1] * np.cos(2 * np.pi * k * x / box) + coef[2 * k] * np.sin(2 * np.pi * k * x / box)

print("  V=0, t=0.1:", residual(np.zeros(m), 0.1, 16, f))
Vc = np.ones(m)
print("  V=1 const, t=0.1, 64 panels:", residual(Vc, 0.1, 64, f))
Vs = np.sin(x) ** 2
for t in (0.1, 0.5):
    r16, r32, r64 = (residual(Vs, t, p, f) for p in (16, 32, 64))
    print(f"  V=sin^2, t={t}: r16={r16:.3e} r32={r32:.3e} r64={r64:.3e} ratios {r16/r32:.1f} {r32/r64:.1f}")

print("\n== column mass (V=sin^2 bump, d=1, m=128) ==")
m = 128
x = np.arange(m) * box / m
freq = np.fft.fftfreq(m, d=1.0 / m)
xi4 = (2 * np.pi / box * freq) ** 4
K = np.zeros((m, m))
for dlt in range(m):
    K[0, dlt] = (xi4 * np.cos(2 * np.pi * freq * dlt / m)).real.sum() / m
for i in range(1, m):
    K[i] = np.roll(K[0], i)
for amp in (1.0, 5.0):
    M = K + np.diag((amp * np.sin(x) ** 2) ** 2)
    lam, Q = np.linalg.eigh(M)
    worst = -1.0
    for t in (1e-3, 1e-2, 0.1, 1.0):
        expM = Q @ (np.exp(-t * lam)[:, None] * Q.T)
        mass = expM.sum(axis=0) * (box / m) / (box / m)  # column sums (delta scaled by 1/cell * cell)
        worst = max(worst, mass.max())
    print(f"  amplitude={amp}: max column mass over t = {worst:.12f}")
