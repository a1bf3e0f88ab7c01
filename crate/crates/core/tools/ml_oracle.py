#!/usr/bin/env python3
"""Regenerate the high-precision Mittag-Leffler reference tables used by the
test suite (tests/data/ml_values.csv and tests/data/ml_derivs.csv).

Values come from closed forms where one exists (alpha = 1, alpha = 1/2) and
otherwise from the power series summed in multiprecision arithmetic, with the
working precision raised until the cancellation between terms is absorbed.
Derivatives use the term-wise differentiated series (digamma weights).

    python3 tools/ml_oracle.py tests/data
"""
import sys
from fractions import Fraction

import mpmath as mp

ALPHAS = [Fraction(1, 2), Fraction(7, 10), Fraction(9, 10), Fraction(1, 1)]


def series_terms(alpha, beta, z, dps, want_derivs):
    """Yield (k, 1/Gamma(alpha k + beta), digamma(alpha k + beta)) using the
    integer-step recurrence available for rational alpha = p/q."""
    p, q = alpha.numerator, alpha.denominator
    a = mp.mpf(p) / q
    b = mp.mpf(beta.numerator) / beta.denominator
    gam = []
    psi = []
    for r in range(q):
        x = a * r + b
        gam.append(mp.gamma(x))
        psi.append(mp.digamma(x) if want_derivs else None)
    k = 0
    while True:
        r = k % q
        m = k // q
        x = a * r + b + p * m
        yield k, 1 / gam[r], psi[r]
        # advance this residue class by one step: x -> x + p
        g = gam[r]
        s = mp.mpf(0)
        for i in range(p):
            g *= x + i
            if want_derivs:
                s += 1 / (x + i)
        gam[r] = g
        if want_derivs:
            psi[r] = psi[r] + s
        k += 1


def ml_series(alpha, beta, z, want_derivs=False):
    zf = float(z)
    grow = abs(zf) ** (1.0 / float(alpha)) if zf != 0 else 0.0
    dps = int(40 + grow / 2.0)
    with mp.workdps(dps):
        zz = mp.mpf(z)
        val = mp.mpf(0)
        dz = mp.mpf(0)
        da = mp.mpf(0)
        db = mp.mpf(0)
        zk = mp.mpf(1)
        zkm1 = mp.mpf(0)
        kpeak = int(3 * grow / float(alpha)) + 20
        tiny = mp.mpf(10) ** (-45)
        for k, rg, ps in series_terms(alpha, beta, z, dps, want_derivs):
            t = zk * rg
            val += t
            if want_derivs:
                if k > 0:
                    dz += k * zkm1 * rg
                da -= k * t * ps
                db -= t * ps
            if k > kpeak and abs(t) * (k + 1) * (abs(ps) + 1 if want_derivs else 1) < tiny:
                break
            zkm1 = zk
            zk *= zz
        return val, da, db, dz


def ml_value(alpha, beta, z):
    with mp.workdps(60):
        zz = mp.mpf(z)
        if alpha == 1 and beta == 1:
            return mp.exp(zz)
        if alpha == Fraction(1, 2):
            e_half = mp.exp(zz * zz) * mp.erfc(-zz)
            if beta == 1:
                return e_half
            return 1 / mp.sqrt(mp.pi) + zz * e_half
    return ml_series(alpha, beta, z)[0]


def grid(lo, hi, count):
    return [lo + (hi - lo) * j / (count - 1) for j in range(count)]


def main(outdir):
    with open(f"{outdir}/ml_values.csv", "w") as f:
        f.write("alpha,beta,z,value\n")
        for alpha in ALPHAS:
            for beta in sorted({Fraction(1), alpha}):
                for z in grid(-100.0, 0.0, 1000):
                    v = ml_value(alpha, beta, z)
                    f.write(f"{float(alpha)!r},{float(beta)!r},{z!r},{mp.nstr(v, 20)}\n")
    with open(f"{outdir}/ml_derivs.csv", "w") as f:
        f.write("alpha,beta,z,value,d_alpha,d_beta,d_z\n")
        for alpha in ALPHAS:
            for beta in sorted({Fraction(1), alpha}):
                for z in grid(-20.0, 0.0, 201):
                    v, da, db, dz = ml_series(alpha, beta, z, want_derivs=True)
                    f.write(
                        f"{float(alpha)!r},{float(beta)!r},{z!r},"
                        f"{mp.nstr(v, 20)},{mp.nstr(da, 20)},{mp.nstr(db, 20)},{mp.nstr(dz, 20)}\n"
                    )


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data")
