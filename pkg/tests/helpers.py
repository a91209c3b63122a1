"""Shared random generators and independent brute-force oracles for tests."""

import math

import numpy as np

from mospaces import (
    Indicator,
    IntSpaceSpec,
    Linear,
    MeasureGrid,
    MusielakField,
    OrliczCurve,
    PiecewiseLinear,
    Power,
    StepFunction,
    SumSpaceSpec,
)

INF = math.inf


def random_grid(rng, n, lo=0.1, hi=3.0, dyadic=False):
    if dyadic:
        weights = tuple(float(2.0 ** int(k)) for k in rng.integers(-2, 3, size=n))
    else:
        weights = tuple(float(w) for w in rng.uniform(lo, hi, size=n))
    return MeasureGrid(weights)


def random_pwl(rng, allow_jump=True):
    k = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(0.2, 3.0, size=k))
    cuts = [float(c) for c in cuts]
    for j in range(1, len(cuts)):  # keep breakpoints separated
        cuts[j] = max(cuts[j], cuts[j - 1] + 0.05)
    bounded = rng.uniform() < 0.5
    if bounded:
        bp = [0.0] + cuts
    else:
        bp = [0.0] + cuts[:-1] + [INF]
    nseg = len(bp) - 1
    slopes = []
    s = 0.0 if (rng.uniform() < 0.3 and (bounded or nseg > 1)) else float(rng.uniform(0.05, 1.0))
    slopes.append(s)
    for _ in range(nseg - 1):
        s += float(rng.uniform(0.1, 1.5))
        slopes.append(s)
    if bounded:
        if allow_jump and rng.uniform() < 0.25:
            return PiecewiseLinear(tuple(bp), tuple(slopes), INF)
        return PiecewiseLinear.closed(tuple(bp), tuple(slopes))
    return PiecewiseLinear(tuple(bp), tuple(slopes), None)


def random_curve(rng, families=("power", "linear", "indicator", "pwl"), allow_jump=True):
    family = families[int(rng.integers(0, len(families)))]
    if family == "power":
        return Power(float(rng.uniform(1.05, 5.0)))
    if family == "linear":
        return Linear(float(rng.uniform(0.2, 3.0)))
    if family == "indicator":
        return Indicator(float(rng.uniform(0.2, 3.0)))
    return random_pwl(rng, allow_jump=allow_jump)


def random_field(rng, n=None, families=("power", "linear", "indicator", "pwl"), allow_jump=True, dyadic=False):
    n = n or int(rng.integers(1, 7))
    grid = random_grid(rng, n, dyadic=dyadic)
    curves = tuple(random_curve(rng, families, allow_jump) for _ in range(n))
    return MusielakField(grid, curves)


def random_x(rng, grid, scale=3.0):
    return StepFunction(grid, tuple(float(v) for v in rng.uniform(-scale, scale, len(grid))))


def random_sum_spec(rng, n=None, gamma_all=True):
    n = n or int(rng.integers(2, 7))
    grid = random_grid(rng, n)
    gamma = grid.cell_set() if gamma_all else grid.cell_set(grid.ids[: max(1, n - 1)])
    v = tuple(float(t) for t in rng.uniform(0.3, 2.0, n))
    w = tuple(float(t) for t in rng.uniform(0.3, 2.0, n))
    return SumSpaceSpec(grid, gamma, v, w)


def random_int_spec(rng, n=None, gamma_all=True):
    n = n or int(rng.integers(2, 7))
    grid = random_grid(rng, n)
    gamma = grid.cell_set() if gamma_all else grid.cell_set(grid.ids[: max(1, n - 1)])
    w = tuple(float(t) for t in rng.uniform(0.3, 2.0, n))
    v = tuple(float(t) for t in rng.uniform(0.3, 2.0, n))
    return IntSpaceSpec(grid, gamma, w, v)


def domain_samples(curve: OrliczCurve, rng, count=100):
    """Points in the finite-value domain (avoiding a blow-up end value)."""
    p = curve.params()
    if math.isinf(p.b):
        hi = 10.0
        pts = rng.uniform(0.0, hi, count - 1)
        return [0.0] + [float(t) for t in pts]
    pts = [float(t) for t in rng.uniform(0.0, p.b, count - 2)]
    out = [0.0] + pts
    if math.isfinite(p.value_at_b):
        out.append(p.b)  # left-continuous end belongs to the domain
    else:
        out.append(p.b * (1.0 - 1e-9))
    return out


# --------------------------------------------------------------------------
# independent oracles


def d_param_scan(curve: OrliczCurve, u_max=20.0, steps=200_000):
    """Brute-force sup{u : phi(u/2) = phi(u)/2} over a fine grid."""
    p = curve.params()
    hi = min(u_max, p.b) if math.isfinite(p.b) else u_max
    best = 0.0
    for u in np.linspace(0.0, hi, steps):
        fu = curve.value_closed(float(u))
        half = curve.value(float(u) / 2.0)
        if math.isinf(fu):
            continue
        if abs(half - fu / 2.0) <= 1e-12 * (1.0 + fu):
            best = float(u)
    return best


def half_ratio_scan(curve: OrliczCurve, lo, hi, steps=100_000):
    best = 0.0
    for u in np.linspace(lo, hi, steps):
        den = curve.value_closed(float(u))
        if den <= 0 or math.isinf(den):
            continue
        best = max(best, 2.0 * curve.value(float(u) / 2.0) / den)
    return best


def wsum_lp_oracle(spec: SumSpaceSpec, x: StepFunction):
    """Exact sum norm as a linear program (scipy)."""
    from scipy.optimize import linprog

    grid = spec.grid
    ax = [abs(t) for t in x.values]
    gam = [i for i, cid in enumerate(grid.ids) if cid in spec.gamma]
    m = len(gam)
    # variables: c, z_0..z_{m-1}
    cvec = [1.0] + [spec.v[i] * grid.weights[i] for i in gam]
    a_ub, b_ub = [], []
    for j, i in enumerate(gam):
        row = [0.0] * (m + 1)
        row[0] = -1.0 / spec.w[i]
        row[j + 1] = -1.0
        a_ub.append(row)
        b_ub.append(-ax[i])
    c_floor = 0.0
    for i, cid in enumerate(grid.ids):
        if cid not in spec.gamma:
            c_floor = max(c_floor, ax[i] * spec.w[i])
    bounds = [(c_floor, None)] + [(0.0, None)] * m
    res = linprog(cvec, A_ub=a_ub or None, b_ub=b_ub or None, bounds=bounds, method="highs")
    assert res.success, res.message
    return res.fun


def wsum_ternary_oracle(spec: SumSpaceSpec, x: StepFunction, tol=1e-12):
    """Golden-section minimisation of the convex sup-level objective."""
    grid = spec.grid
    ax = [abs(t) for t in x.values]
    gam = [i for i, cid in enumerate(grid.ids) if cid in spec.gamma]

    def g(c):
        total = c
        for i in gam:
            excess = ax[i] - c / spec.w[i]
            if excess > 0:
                total += spec.v[i] * grid.weights[i] * excess
        return total

    c_floor = 0.0
    for i, cid in enumerate(grid.ids):
        if cid not in spec.gamma:
            c_floor = max(c_floor, ax[i] * spec.w[i])
    hi = max([c_floor] + [ax[i] * spec.w[i] for i in gam]) + 1.0
    lo = c_floor
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - phi * (b - a)
    c2 = a + phi * (b - a)
    f1, f2 = g(c1), g(c2)
    for _ in range(300):
        if b - a <= tol * max(1.0, abs(a)):
            break
        if f1 <= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - phi * (b - a)
            f1 = g(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + phi * (b - a)
            f2 = g(c2)
    return min(g(a), g(b), f1, f2)
