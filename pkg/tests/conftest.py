import mpmath
import numpy as np


def mp_lstsq(phi, y, cols, dps=50):
    """Normal-equations least squares in extended precision (independent oracle)."""
    with mpmath.workdps(dps):
        a = mpmath.matrix([[mpmath.mpf(float(phi[i, j])) for j in cols] for i in range(phi.shape[0])])
        b = mpmath.matrix([mpmath.mpf(float(v)) for v in y])
        c = mpmath.lu_solve(a.T * a, a.T * b)
        r = b - a * c
        return (np.array([float(v) for v in c]),
                np.array([float(v) for v in r]))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
