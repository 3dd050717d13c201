# Probe: Strang order window [1.7,2.3] at m=128, and
# duhamel floor at m=32.
import numpy as np


def setup(m, box):
    x = np.arange(m) * box / m
    freq = np.fft.fftfreq(m, d=1.0 / m)
    xi4 = (2 * np.pi / box * freq) ** 4
    K = np.zeros((m, m))
    for dlt in range(m):
        K[0, dlt] = (xi4 * np.cos(2 * np.pi * freq * dlt / m)).real.sum() / m
    for i in range(1, m):
        K[i] = np.roll(K[0], i)
    return x, freq, xi4, K


def band_field(x, box, kmax, seed):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(2 * kmax + 1)
    f = coef[0] * np.ones_like(x)
    for k in range(1, kmax + 1):
        f += coef[2 * k - 1] * np.cos(2 * np.pi * k * x / box) + coef[2 * k] * np.sin(
            2 * np.pi * k * x / box
        )
    return f


def strang_orders(m, box, kmax, t, steps_list, amp=1.0, seed=7):
    x, freq, xi4, K = setup(m, box)
    V = amp * np.sin(2 * np.pi * x / box) ** 2
    M = K + np.diag(V ** 2)
    lam, Q = np.linalg.eigh(M)
    f = band_field(x, box, kmax, seed)
    dense = Q @ (np.exp(-t * lam) * (Q.T @ f))

    def stepper(u, steps):
        dt = t / steps
        eV = np.exp(-dt * V ** 2 / 2)
        eK = np.exp(-dt * xi4)
        for _ in range(steps):
            u = np.fft.ifft(np.fft.fft(u * eV) * eK).real * eV
        return u

    errs = [np.linalg.norm(stepper(f.copy(), s) - dense) / np.sqrt(m) for s in steps_list]
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    return errs, orders


print("== Strang, box=4pi, band<=2, V=sin^2(2pix/box) ==")
for m in (64, 128):
    for t in (0.5, 1.0):
        errs, orders = strang_orders(m, 4 * np.pi, 2, t, [8, 16, 32, 64])
        print(f"  m={m} t={t}: errs={[f'{e:.3e}' for e in errs]} orders={[f'{o:.3f}' for o in orders]}")

print("== Strang, box=2pi, band<=2 ==")
for m in (64, 128):
    for t in (0.5, 1.0):
        errs, orders = strang_orders(m, 2 * np.pi, 2, t, [16, 32, 64, 128])
        print(f"  m={m} t={t}: errs={[f'{e:.3e}' for e in errs]} orders={[f'{o:.3f}' for o in orders]}")

print("== Strang, box=4pi, band<=4, t=1 ==")
for m in (64, 128):
    errs, orders = strang_orders(m, 4 * np.pi, 4, 1.0, [8, 16, 32, 64])
    print(f"  m={m}: errs={[f'{e:.3e}' for e in errs]} orders={[f'{o:.3f}' for o in orders]}")

print("\n== Duhamel at m=32, box=2pi, band<=4, t=0.1 ==")
m, box = 32, 2 * np.pi
x, freq, xi4, K = setup(m, box)
f = band_field(x, box, 4, 11)


def residual(Vv, t, panels):
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
    r = ev(f, t) - bi(f, t) + acc * h / 6
    return np.linalg.norm(r) * np.sqrt(box / m)


print("  V=0:", residual(np.zeros(m), 0.1, 16))
print("  V=1 const, 64 panels:", residual(np.ones(m), 0.1, 64))
Vs = np.sin(x) ** 2
rs = {p: residual(Vs, 0.1, p) for p in (16, 32, 64)}
print(f"  V=sin^2: r16={rs[16]:.3e} r32={rs[32]:.3e} r64={rs[64]:.3e} ratios {rs[16]/rs[32]:.1f} {rs[32]/rs[64]:.1f}")
Vs5 = 5 * np.sin(x) ** 2
rs = {p: residual(Vs5, 0.1, p) for p in (16, 32, 64)}
print(f"  V=5sin^2: ratios {rs[16]/rs[32]:.1f} {rs[32]/rs[64]:.1f}  r64={rs[64]:.2e}")
