"""Generate the committed Monte-Carlo pilot fixtures.

Run from the repository root after any intentional change to the simulator's
randomness contract, then commit the refreshed JSON files:

    python3 tools/run_pilots.py

The fixtures freeze exact floating-point outputs at fixed seeds; the test
suite asserts byte-level equality against them, so they fail loudly if the
stream layout, chunking, or arithmetic ever changes.
"""

import json
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from rdgap import simulator as sim  # noqa: E402
from rdgap import spectra  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"


def pilot_success() -> dict:
    """Flat spectrum, n=10, R=0.5, eta=0.05, 8192 x 256 = 2^21 draws.

    The exact value (tools/oracle_success.py) is p_n = 0.011568975720421,
    exponent 0.643359505121377; the pilot's Monte-Carlo point estimate at this
    seed must sit within the acceptance band |exponent - 0.5| < 0.15.
    """
    cfg = sim.SimConfig(
        n=10,
        rate_bits=0.5,
        spectrum=spectra.flat(),
        trials=256,
        seed=2026,
        eta=0.05,
        w_batches=8192,
    )
    rep = sim.estimate_codeword_success(cfg)
    return {
        "n": cfg.n,
        "rate_bits": cfg.rate_bits,
        "eta": cfg.eta,
        "trials": cfg.trials,
        "w_batches": cfg.w_batches,
        "seed": cfg.seed,
        "total_draws": cfg.trials * cfg.w_batches,
        "p_hat": rep.p_hat,
        "wilson_low": rep.wilson_low,
        "wilson_high": rep.wilson_high,
        "exponent": rep.exponent,
        "exact_p": 0.01156897572042136,
        "exact_exponent": 0.643359505121377,
    }


def pilot_scheme_trend() -> dict:
    """Flat spectrum, R=1, n in {8,12,16}, 512 trials, one seed schedule.

    Freezes the mean distortions whose excess over 0.25 must decrease in n.
    """
    out = {"rate_bits": 1.0, "trials": 512, "seed": 2026, "points": []}
    for n in (8, 12, 16):
        cfg = sim.SimConfig(
            n=n, rate_bits=1.0, spectrum=spectra.flat(), trials=512, seed=2026
        )
        rep = sim.run_universal_scheme(cfg)
        out["points"].append(
            {"n": n, "mean": rep.mean, "se": rep.se, "analytic": rep.analytic}
        )
    return out


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, fn in [
        ("pilot_success.json", pilot_success),
        ("pilot_scheme_trend.json", pilot_scheme_trend),
    ]:
        path = FIXTURES / name
        path.write_text(json.dumps(fn(), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
