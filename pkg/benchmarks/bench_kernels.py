"""Timing comparison of the numba kernels against the interpreted fallback.

The package compiles its evolution loops with numba unless
FOCKFADE_DISABLE_NUMBA=1 is set, in which case the same functions run as
plain Python/numpy.  Because backend selection happens at import time, this
script re-executes itself once per backend in a subprocess and prints a
small table at the end.

Usage:  python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time


def run_cases(repeat: int) -> dict:
    import fockfade as ff
    from fockfade import _backend
    from fockfade.channel import evolve_generic

    sq = ff.squeezing_from_db(10.0)
    tm50 = ff.build_state(ff.StateRecipe(family="tmsv", squeezing=sq), n_max=50)
    pss3 = ff.build_state(
        ff.StateRecipe(family="pss_b", squeezing=ff.squeezing_from_db(3.0), T=0.9),
        n_max=10)
    p = ff.ChannelParams.make(math.sqrt(0.5), 0.02)

    cases = {
        "asym noisy, TMSV 10 dB, F=50":
            lambda: ff.evolve_asymmetric_noisy(tm50, p, 50),
        "asym noiseless, TMSV 10 dB, F=50":
            lambda: ff.evolve_asymmetric_noiseless(tm50, math.sqrt(0.5), 50),
        "sym noisy, PSS_b 3 dB, F=l=10":
            lambda: ff.evolve_symmetric_noisy(pss3, p, p, 10, 10),
        "generic, NOON n=2, F=10":
            lambda: evolve_generic(ff.NoonState(2), p, p, 10),
        "PT spectrum, evolved TMSV, F=50":
            lambda: ff.partial_transpose_spectrum(
                ff.evolve_asymmetric_noisy(tm50, p, 50)),
    }

    results = {}
    for name, fn in cases.items():
        fn()  # warm-up: jit compilation / cache priming
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        results[name] = (time.perf_counter() - t0) / repeat
    return {"numba": _backend.HAVE_NUMBA, "timings": results}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        json.dump(run_cases(args.repeat), sys.stdout)
        return

    reports = {}
    for label, disable in (("numba", "0"), ("fallback", "1")):
        env = dict(os.environ, FOCKFADE_DISABLE_NUMBA=disable)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child",
             "--repeat", str(args.repeat)],
            env=env, capture_output=True, text=True, check=True)
        reports[label] = json.loads(out.stdout)

    if reports["numba"]["numba"] == reports["fallback"]["numba"]:
        print("warning: numba unavailable, both runs used the fallback")

    width = max(len(k) for k in reports["numba"]["timings"])
    print(f"{'case':<{width}}  {'numba':>10}  {'fallback':>10}  {'speedup':>8}")
    for name, t_jit in reports["numba"]["timings"].items():
        t_py = reports["fallback"]["timings"][name]
        print(f"{name:<{width}}  {t_jit * 1e3:>8.2f}ms  {t_py * 1e3:>8.2f}ms"
              f"  {t_py / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
