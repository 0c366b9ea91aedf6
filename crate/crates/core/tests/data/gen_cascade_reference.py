"""Writes cascade_reference.json: 50-digit logarithms of the cascade outputs."""
import json
import mpmath as mp

mp.mp.dps = 60

CASES = [
    dict(n=1, eta=0.5, C4=1.0),
    dict(n=1, eta=0.9, C4=0.01),
    dict(n=1, eta=0.3, C3=2.0, C5=0.5),
    dict(n=2, eta=0.5, C4=0.5),
    dict(n=2, eta=0.9, C4=0.001),
    dict(n=2, eta=0.2, C4=0.1, L=2),
    dict(n=1, eta=0.05, C4=1.0),
    dict(n=1, eta=0.7, C4=0.05, Lambda=2.0, C0_prime=1e-6, C_D=10.0),
    dict(n=2, eta=0.1, C4=1.0),
    dict(n=1, eta=0.99, C4=1e-3, C3=0.1, C5=3.0),
]


def full(case):
    n = case["n"]
    c = dict(C0_prime=1.0, C3=1.0, C4=1.0, C5=1.0, Lambda=1.0, L=0, C_D=1.0)
    c.update(case)
    c["vol_m"] = float(mp.pi) if n == 1 else float(mp.pi)
    c["vol_boundary"] = 2.0 if n == 1 else float(2 * mp.pi)
    c["c_n"] = 2.0 if n == 1 else float(mp.pi)
    return c


def logs(c):
    n = mp.mpf(c["n"])
    eta = mp.mpf(c["eta"])
    C3, C4, C5 = (mp.mpf(c[k]) for k in ("C3", "C4", "C5"))
    Lam, C0p, CD = mp.mpf(c["Lambda"]), mp.mpf(c["C0_prime"]), mp.mpf(c["C_D"])
    vol, volb, cn = mp.mpf(c["vol_m"]), mp.mpf(c["vol_boundary"]), mp.mpf(c["c_n"])
    c_lower = 1 if c["n"] == 1 else 2
    N = volb * 4 ** (n - 1) / c_lower * eta ** (1 - n)
    eps_star = cn * eta**n / 2
    eps = eps_star / (2 ** (c["L"] + 1) * 2 * vol)
    gamma = (eps**2 / (32 * C5**2 * Lam**2)) ** (n + 1)
    e20 = eps**2 / (64 * N)
    h = (e20 * gamma**3 / (2 * C5 * Lam)) ** (3 * n + 3)
    H = h ** (-C4 * n)
    X = gamma ** -18 * h ** -6 * mp.mpf(128) ** 6 * N**6 * C3**2 * mp.exp(6 * H) / eps**12
    ln_eps1 = mp.log(h**1.5 * gamma**-3) - X
    ln_lam = mp.log(CD * h**-12) + 8 * X
    weyl = cn * vol / (2 * mp.pi) ** n
    ln_j = mp.log(weyl) + n / 2 * ln_lam
    ln_delta = (
        mp.log(eps**2 / (128 * N))
        + mp.log(h)
        + ln_eps1
        - mp.log(C3) / 3
        - H
        + 3 * mp.log(gamma)
        - mp.log(C0p)
        - ln_j
        - mp.mpf(1.5) * ln_lam
    )
    return dict(
        eps=mp.log(eps), gamma=mp.log(gamma), h=mp.log(h),
        eps1=ln_eps1, lambda_j=ln_lam, J=ln_j, delta=ln_delta,
    )


def levels(x):
    out = {"ln": mp.nstr(x, 50)}
    a = abs(x)
    if a > 0:
        out["lnln"] = mp.nstr(mp.log(a), 50)
        if a > 1:
            out["lnlnln"] = mp.nstr(mp.log(mp.log(a)), 50)
    return out


cases = []
for case in CASES:
    c = full(case)
    cases.append({"input": c, "logs": {k: levels(v) for k, v in logs(c).items()}})
with open(__file__.replace("gen_cascade_reference.py", "cascade_reference.json"), "w") as f:
    json.dump(cases, f, indent=1)
