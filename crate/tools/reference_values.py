"""Independent high-precision values frozen in crates/core/tests/reference_values.rs.

Run with: python3 tools/reference_values.py
"""
from mpmath import mp, mpf, erfc, sqrt, quad, exp, gammainc, inf, log10, expm1, log1p

mp.dps = 50


def q(x):
    return erfc(x / sqrt(2)) / 2


def fer(g, L, c=2):
    # 1 - (1 - Q(sqrt(c g)))^L
    return -expm1(L * log1p(-q(sqrt(c * g))))


def uncoded_threshold(d, L):
    f = lambda g: d * g ** (d - 1) * fer(g, L)
    return quad(f, [0, 1, 5, 20, 60, 200]) ** (mpf(1) / d)


def legacy_threshold(L):
    # 1 / int_0^U (1 - P(1/u)) du. The integrand tends to 2^-L like
    # 2^-L (1 + c L / sqrt(u)), so the integral diverges for every L; for
    # L = 100 any cut-off U between 10 and 1e50 gives the same value to
    # 25 digits. U = 1000 is used here.
    f = lambda u: 1 - fer(1 / u, L)
    return 1 / quad(f, [0, mpf(1) / 200, mpf(1) / 60, mpf(1) / 20, mpf(1) / 5, 1, 10, 1000])


def hrs_cdf(l0, kappa, g):
    def f(u):
        p = mpf(1)
        for k in kappa:
            p *= -expm1(-k * u)
        return l0 * exp(-l0 * (g - u)) * p
    a = quad(f, [0, g / 4, g / 2, 3 * g / 4, g])
    b = quad(f, [0, g], method="gauss-legendre", maxdegree=12)
    assert abs(a / b - 1) < mpf(10) ** -18, (a, b)
    return a


def params(omega, snr_db, gt1, gtd):
    o0, o1, o2 = omega
    snr = mpf(10) ** (mpf(snr_db) / 10)
    l0 = 1 / (snr * o0)
    l1 = [1 / (snr * w) for w in o1]
    l2 = [1 / (snr * w) for w in o2]
    return l0, l1, l2, mpf(gt1) / mpf(gtd), mpf(gtd)


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


show("q_sqrt2", q(sqrt(2)))
show("q_3", q(3))
show("fer_g1_l1", fer(1, 1))
show("fer_g4_l100", fer(4, 100))
for d in range(1, 6):
    show(f"uncoded_l100_d{d}", uncoded_threshold(d, 100))
show("uncoded_l1_d1", uncoded_threshold(1, 1))
show("uncoded_l1_d3", uncoded_threshold(3, 1))
show("uncoded_l200_d2", uncoded_threshold(2, 200))
show("legacy_l100", legacy_threshold(100))
show("legacy_l100_db", 10 * log10(legacy_threshold(100)))

# HRS with explicit lambdas
l0, l1, l2, gt1, gtd = mpf("0.01"), [mpf("0.02"), mpf("0.005")], [mpf("0.01"), mpf("0.03")], mpf("3.2"), mpf("3.6")
r = gt1 / gtd
show("hrs_explicit_n2", hrs_cdf(l0, [r * a + b for a, b in zip(l1, l2)], gtd))
show("pdfrs_explicit_n2", hrs_cdf(l0, l2, gtd))
show("afrs_explicit_n2", hrs_cdf(l0, [a + b for a, b in zip(l1, l2)], gtd))

# symmetric networks; thresholds passed in linear scale
for tag, omega, n, snr_db in [
    ("case1_n4_60db", (1, [1] * 4, [1] * 4), 4, 60),
    ("case1_n2_20db", (1, [1] * 2, [1] * 2), 2, 20),
    ("case3_n3_5db", (1, [mpf(1) / 16] * 3, [1] * 3), 3, 5),
    ("case2_n8_45db", (1, [16] * 8, [1] * 8), 8, 45),
]:
    l0, l1, l2, r, gtd = params(omega, snr_db, "3.2", "3.6")
    show(f"hrs_{tag}", hrs_cdf(l0, [r * a + b for a, b in zip(l1, l2)], gtd))

# MIMO combiner: Gamma(N, gamma_bar / n_t) CDF at gamma_t
for n, snr_db in [(2, 20), (4, 20), (4, 10)]:
    snr = mpf(10) ** (mpf(snr_db) / 10)
    show(f"mimo_cdf_n{n}_{snr_db}db", gammainc(n, 0, mpf("3.6") / snr, regularized=True))
