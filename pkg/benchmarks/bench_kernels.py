"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

Times the Jacobi eigensolver, one Choi-state trajectory of the two-atom model
and the full i_bar pipeline (trajectory plus entropies) for each backend, and
checks that both produce the same numbers.  The first numba call of a fresh
checkout includes compilation; it is timed separately as ``warmup``.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from dyncorr import _kernels
from dyncorr.channels import max_entangled_state
from dyncorr.correlation import i_bar
from dyncorr.experiments import default_time_grid
from dyncorr.lindblad import _finalise
from dyncorr.models import TwoAtomParams, two_atom_generator


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times), statistics.median(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--size", type=int, default=16, help="Hermitian matrix size for Jacobi")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    z = rng.standard_normal((args.size, args.size)) + 1j * rng.standard_normal((args.size, args.size))
    herm = z + z.conj().T

    p = TwoAtomParams(r=0.5)
    gen = two_atom_generator(p).extend(4)
    heff, ms = gen.effective_operators
    rho0 = max_entangled_state(4, (2, 2)).matrix
    times = default_time_grid(200) / p.gamma0
    integ = (rho0, heff, ms, times, 1e-3 / gen.rate_scale, 1e-10, 1e-13, 10**7)

    backends = {"numpy": (_kernels.jacobi_eigh_numpy, _kernels.integrate_numpy)}
    if _kernels.HAVE_NUMBA:
        backends["numba"] = (_kernels.jacobi_eigh_numba, _kernels.integrate_numba)

    rows, outputs = [], {}
    bound = _kernels.jacobi_eigh
    for name, (jac, integrate) in backends.items():
        _kernels.jacobi_eigh = jac  # entropies in the pipeline use this backend too
        start = time.perf_counter()
        jac(herm.copy(), 1e-12, 100)
        integrate(*integ)
        warmup = time.perf_counter() - start

        def pipeline():
            states = integrate(*integ)[0]
            return [i_bar(_finalise(s, (2, 2, 2, 2), float(t), None)).i_bar for s, t in zip(states, times)]

        j = _best(lambda: jac(herm.copy(), 1e-12, 100), args.repeat)
        r = _best(lambda: integrate(*integ), args.repeat)
        pl = _best(pipeline, max(1, args.repeat // 2))
        outputs[name] = (np.sort(jac(herm.copy(), 1e-12, 100)[0]), integrate(*integ)[0], np.array(pipeline()))
        rows.append((name, warmup, j, r, pl))
    _kernels.jacobi_eigh = bound

    print(f"{'backend':<8} {'warmup':>9} {'jacobi %dx%d' % (args.size, args.size):>14} "
          f"{'trajectory':>12} {'i_bar pipeline':>15}   (best of {args.repeat}, seconds)")
    for name, warm, j, r, pl in rows:
        print(f"{name:<8} {warm:9.3f} {j[0]:14.5f} {r[0]:12.4f} {pl[0]:15.4f}")
    if len(rows) == 2:
        (_, _, j0, r0, p0), (_, _, j1, r1, p1) = rows
        print(f"speed-up numba/numpy: jacobi x{j0[0] / j1[0]:.1f}, trajectory x{r0[0] / r1[0]:.1f}, "
              f"pipeline x{p0[0] / p1[0]:.1f}")
        a, b = outputs["numpy"], outputs["numba"]
        print(f"max deviation: eigenvalues {np.max(np.abs(a[0] - b[0])):.1e}, "
              f"states {np.max(np.abs(a[1] - b[1])):.1e}, i_bar {np.max(np.abs(a[2] - b[2])):.1e}")


if __name__ == "__main__":
    main()
