"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Times state preparation, observable evaluation and parameter-shift
gradients for H2 (2 qubits), H3+ (4 qubits) and a random 8-qubit operator.
"""

import argparse
import timeit

import numpy as np

from spvqe import _kernels_py
from spvqe.circuit import CompiledObservables
from spvqe.fcidump import read_fcidump
from spvqe.fermion import map_problem
from spvqe.pauli import QubitOperator
from spvqe.scan import fixture_path

try:
    from spvqe import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    for name in ("h2_0.735", "h3p_2.000"):
        p = map_problem(read_fcidump(fixture_path(f"{name}.fcidump")))
        yield name, [p.hamiltonian, p.number, p.spin]
    rng = np.random.default_rng(0)
    words = {"".join(rng.choice(list("IXYZ"), 8)): rng.normal() for _ in range(200)}
    yield "random_8q", [QubitOperator(words, 8)]


def bench(backend, n, depth, params, obs, repeat):
    psi = backend.prepare_state(n, depth, params)
    args = (obs.xm, obs.zm, obs.w, obs.offsets)
    timings = {
        "prepare": lambda: backend.prepare_state(n, depth, params),
        "values": lambda: backend.observable_values(psi, *args),
        "gradients": lambda: backend.shift_gradients(n, depth, params, *args),
    }
    return {k: min(timeit.repeat(f, number=1, repeat=repeat)) for k, f in timings.items()}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--depth", type=int, default=3)
    args = parser.parse_args()
    if compiled is None:
        print("compiled extension not built; only the numpy backend is timed")
    print(f"{'case':<12}{'kernel':<11}{'python (ms)':>13}{'cython (ms)':>13}{'speedup':>9}")
    for name, ops in cases():
        obs = CompiledObservables(ops)
        n = obs.n_qubits
        params = np.random.default_rng(1).uniform(-np.pi, np.pi, n * (args.depth + 1))
        py = bench(_kernels_py, n, args.depth, params, obs, args.repeat)
        cy = bench(compiled, n, args.depth, params, obs, args.repeat) if compiled else None
        for kernel, t in py.items():
            if cy:
                c = cy[kernel]
                print(f"{name:<12}{kernel:<11}{t * 1e3:>13.4f}{c * 1e3:>13.4f}{t / c:>9.1f}")
            else:
                print(f"{name:<12}{kernel:<11}{t * 1e3:>13.4f}{'-':>13}{'-':>9}")


if __name__ == "__main__":
    main()
