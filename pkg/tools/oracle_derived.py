"""Independent high-precision oracle for derived expected test values.

Solves the two-level curve equations in closed form with 50-digit Decimal
arithmetic (quadratic formula + Decimal ln/sqrt), with no imports from the
package under test.  Frozen outputs are pasted into the test suite.

Run: python3 tools/oracle_derived.py
"""

from decimal import Decimal, getcontext

getcontext().prec = 50

LOG2 = Decimal(2).ln()


def log2(x: Decimal) -> Decimal:
    return x.ln() / LOG2


def two_level_T_for_distortion(v1, v2, w1, w2, d) -> Decimal:
    """Solve w1 v1/(1+v1 T) + w2 v2/(1+v2 T) = d (largest root)."""
    m = w1 * v1 + w2 * v2
    a = d * v1 * v2
    b = d * (v1 + v2) - v1 * v2 * (w1 + w2)
    c = d - m
    disc = b * b - 4 * a * c
    return (-b + disc.sqrt()) / (2 * a)


def main() -> None:
    # The spectrum of the [1.8, 0.2] / [0.5, 0.5] examples, as exact doubles.
    v1, v2 = Decimal(1.8), Decimal(0.2)
    w1 = w2 = Decimal(0.5)

    # rr_wf at d* = 0.2: the water level sits exactly at the lower level
    # (0.5 t + 0.5*0.2 = 0.2 gives t = 0.2), so rate = 0.25 * log2(v1/v2).
    d = Decimal(0.2)
    t = (d - w2 * v2) / w1
    rate_wf = (w1 * log2(v1 / t)) / 2
    print(f"t_wf([1.8,.2], d*=0.2)        = {float(t)!r}")
    print(f"rr_wf([1.8,.2], d*=0.2)       = {float(rate_wf)!r}")

    # t_rc_for_rate at rate = 2:
    # 0.25 log2((1+v1 T)(1+v2 T)) = 2  =>  v1 v2 T^2 + (v1+v2) T + 1 = 2^8.
    target = Decimal(2) ** 8
    a = v1 * v2
    b = v1 + v2
    c = 1 - target
    T_rate = (-b + (b * b - 4 * a * c).sqrt()) / (2 * a)
    print(f"t_rc_for_rate([1.8,.2], R=2)  = {float(T_rate)!r}")

    # t_rc_for_distortion at d* = 0.2, then the rate there and the gap.
    T_dist = two_level_T_for_distortion(v1, v2, w1, w2, d)
    rate_rc = (w1 * log2(1 + v1 * T_dist) + w2 * log2(1 + v2 * T_dist)) / 2
    print(f"t_rc_for_dist([1.8,.2], 0.2)  = {float(T_dist)!r}")
    print(f"rr_rc([1.8,.2], d*=0.2)       = {float(rate_rc)!r}")
    print(f"gap([1.8,.2], d*=0.2)         = {float(rate_rc - rate_wf)!r}")

    # merge_close derived example: merge 2 and 1.999 (weights .3/.3), then
    # normalize to unit mean.  Exact decimal arithmetic.
    merged = (Decimal("0.3") * 2 + Decimal("0.3") * Decimal("1.999")) / Decimal("0.6")
    mean = Decimal("0.6") * merged + Decimal("0.4") * Decimal("0.5")
    print(f"merge_close v1                = {float(merged / mean)!r}")
    print(f"merge_close v2                = {float(Decimal('0.5') / mean)!r}")
    # The same example entered through a pre-normalized (unit-mean) spectrum:
    # inputs divided by 1.3997 first; merging commutes with the rescale.
    pre = [Decimal(2) / Decimal("1.3997"), Decimal("1.999") / Decimal("1.3997"),
           Decimal("0.5") / Decimal("1.3997")]
    print(f"normalized inputs             = {[float(x) for x in pre]!r}")

    # grad_rates spot value at [1.8, 0.2], d* = 0.3 (kink-free): analytic
    # formulas evaluated in high precision as an extra cross-check.
    d3 = Decimal(0.3)
    t3 = (d3 - w2 * v2) / w1  # active set = {v1} since t3 in (v2, v1)
    gw1 = w1 / (2 * LOG2 * v1)
    gw2 = w2 / (2 * LOG2 * t3)
    T3 = two_level_T_for_distortion(v1, v2, w1, w2, d3)
    A = (w1 * v1 / (1 + v1 * T3) + w2 * v2 / (1 + v2 * T3)) / (
        w1 * v1 * v1 / (1 + v1 * T3) ** 2 + w2 * v2 * v2 / (1 + v2 * T3) ** 2
    )
    gr1 = w1 / (2 * LOG2) * (T3 / (1 + v1 * T3) + A / (1 + v1 * T3) ** 2)
    gr2 = w2 / (2 * LOG2) * (T3 / (1 + v2 * T3) + A / (1 + v2 * T3) ** 2)
    print(f"t_wf([1.8,.2], d*=0.3)        = {float(t3)!r}")
    print(f"grad_wf([1.8,.2], 0.3)        = ({float(gw1)!r}, {float(gw2)!r})")
    print(f"grad_rc([1.8,.2], 0.3)        = ({float(gr1)!r}, {float(gr2)!r})")


if __name__ == "__main__":
    main()
