"""Numerical probes for parametric identification of smooth choice models.

This is the one floating-point module.  A model maps a parameter vector in an
open box to a vector of transformed choice probabilities.  Two failure modes are
probed: a singular Jacobian somewhere (local failure) and parameter sequences
that escape the box while their images settle on a value the model also
attains inside the box (failure of properness).  Every verdict is evidence from
sampling, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

FullRule = dict[tuple[int, ...], np.ndarray]
Ray = Callable[[float], np.ndarray]


class DomainError(ValueError):
    pass


@dataclass
class ParametricModel:
    """Smooth submodel ``theta -> R^d`` on the open box ``(lower, upper)``.

    ``search_lower``/``search_upper`` bound a finite region used for random
    starts and solver bounds; they must sit strictly inside the domain.
    ``full`` optionally returns every menu's choice probabilities.
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    evaluate: Callable[[np.ndarray], np.ndarray]
    search_lower: np.ndarray
    search_upper: np.ndarray
    full: Callable[[np.ndarray], FullRule] | None = None

    @property
    def dim(self) -> int:
        return len(self.lower)

    def inside(self, theta: np.ndarray, margin: float = 0.0) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta > self.lower + margin) and np.all(theta < self.upper - margin))

    def __call__(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if not self.inside(theta):
            raise DomainError(f"{self.name}: parameter {theta.tolist()} is outside the open domain")
        return np.asarray(self.evaluate(theta), dtype=float)

    def full_vector(self, theta: Sequence[float]) -> np.ndarray:
        if self.full is None:
            raise DomainError(f"{self.name} has no full-model evaluator")
        theta = np.asarray(theta, dtype=float)
        if not self.inside(theta):
            raise DomainError(f"{self.name}: parameter {theta.tolist()} is outside the open domain")
        rule = self.full(theta)
        return np.concatenate([rule[m] for m in sorted(rule)])


# ---------------------------------------------------------------------------
# built-in models


def _luce_full(w: np.ndarray) -> FullRule:
    weights = np.concatenate([[1.0], w])
    n = len(weights)
    out: FullRule = {}
    for r in range(1, n + 1):
        for menu in combinations(range(n), r):
            ws = weights[list(menu)]
            out[menu] = ws / ws.sum()
    return out


def luce(k: int) -> ParametricModel:
    """Luce weights ``w_1..w_k`` (``w_0 = 1``); the submodel is rho(x_i, X) / rho(x_0, X)."""
    if k < 1:
        raise DomainError("luce needs k >= 1")

    def evaluate(w: np.ndarray) -> np.ndarray:
        probs = _luce_full(w)[tuple(range(k + 1))]
        return probs[1:] / probs[0]

    return ParametricModel(
        f"luce(k={k})",
        np.zeros(k),
        np.full(k, np.inf),
        evaluate,
        np.full(k, 1e-2),
        np.full(k, 1e2),
        _luce_full,
    )


def _habit_split(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return theta[0::2], theta[1::2]


def habit_probabilities(v: np.ndarray, c: np.ndarray, menu: Sequence[int]) -> np.ndarray:
    """Habit-formation logit probabilities on ``menu`` (indices into 0..N, containing 0)."""
    vs = np.concatenate([[1.0], v])[list(menu)]
    cs = np.concatenate([[1.0], c])[list(menu)]
    total = vs.sum()
    scores = vs * (total - vs + vs * cs)
    return scores / scores.sum()


def _habit_full(theta: np.ndarray) -> FullRule:
    v, c = _habit_split(theta)
    n = len(v)
    out: FullRule = {}
    for r in range(0, n + 1):
        for rest in combinations(range(1, n + 1), r):
            menu = (0,) + rest
            out[menu] = habit_probabilities(v, c, menu)
    return out


def habit_submodel_values(theta: np.ndarray) -> np.ndarray:
    """Closed-form submodel components for ``theta = (v1, c1, ..., vN, cN)``."""
    v, c = _habit_split(np.asarray(theta, dtype=float))
    nxt = np.roll(v, -1)
    first = (1 + v) / (v * (1 + v * c))
    second = (1 + v + nxt) / (v + v * nxt + c * v**2)
    return np.concatenate([first, second])


def habit(n: int, *, use_full_for_submodel: bool = False) -> ParametricModel:
    """Habit-formation logit with ``v_i, c_i > 1``; parameters interleaved as (v1, c1, ...)."""
    if n < 1:
        raise DomainError("habit model needs n >= 1")

    def via_full(theta: np.ndarray) -> np.ndarray:
        v, c = _habit_split(theta)
        vals = []
        for i in range(1, n + 1):
            p = habit_probabilities(v, c, (0, i))
            vals.append(p[0] / p[1])
        for i in range(1, n + 1):
            j = i % n + 1
            if j == i:
                # one alternative: the cyclic neighbour is itself
                vv, cc = v[i - 1], c[i - 1]
                vals.append((1 + 2 * vv) / (vv + vv * vv + cc * vv**2))
                continue
            menu = tuple(sorted((0, i, j)))
            p = habit_probabilities(v, c, menu)
            vals.append(p[0] / p[menu.index(i)])
        return np.array(vals)

    return ParametricModel(
        f"habit(n={n})",
        np.ones(2 * n),
        np.full(2 * n, np.inf),
        via_full if use_full_for_submodel else habit_submodel_values,
        np.full(2 * n, 1.0 + 1e-2),
        np.full(2 * n, 12.0),
        _habit_full,
    )


def habit_curve_c(v: float | np.ndarray, variant: str = "consistent") -> float | np.ndarray:
    """Habit parameter that pins the pairwise component.

    ``"printed"`` is ``(1+v)/(10 v^2) - 1/v`` which gives a component of 10;
    ``"consistent"`` is ``10(1+v)/v^2 - 1/v`` which gives 1/10 and the
    stated curve value ``(1+2v)/(v^2 + 10(1+v))``.
    """
    if variant == "printed":
        return (1 + v) / (10 * v**2) - 1 / v
    if variant == "consistent":
        return 10 * (1 + v) / v**2 - 1 / v
    raise DomainError(f"unknown curve variant {variant!r}")


def habit_curve_point(v: float, n: int, variant: str = "consistent") -> np.ndarray:
    return np.tile([v, habit_curve_c(v, variant)], n)


def habit_curve_ray(n: int, start: float = 3.0, variant: str = "consistent") -> Ray:
    """Along the curve from ``v = start`` (t = 1) down to the boundary ``v = 1``."""
    return lambda t: habit_curve_point(1 + (start - 1) * t, n, variant)


def habit_curve_value(v: float) -> float:
    return (1 + 2 * v) / (v**2 + 10 * (1 + v))


def affine(a: Sequence[Sequence[float]], lower: float = -10.0, upper: float = 10.0) -> ParametricModel:
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    return ParametricModel("affine", np.full(d, lower), np.full(d, upper), lambda t: a @ t, np.full(d, lower / 2), np.full(d, upper / 2))


def from_function(name: str, fn: Callable[[np.ndarray], np.ndarray], lower: Sequence[float], upper: Sequence[float], search_margin: float = 1e-2) -> ParametricModel:
    lo, hi = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    slo = np.where(np.isfinite(lo), lo + search_margin, -1e2)
    shi = np.where(np.isfinite(hi), hi - search_margin, 1e2)
    return ParametricModel(name, lo, hi, fn, slo, shi)


def builtin(name: str, size: int) -> ParametricModel:
    if name == "luce":
        return luce(size)
    if name == "habit-submodel":
        return habit(size)
    if name == "habit-full":
        return habit(size, use_full_for_submodel=True)
    raise DomainError(f"unknown built-in model {name!r}")


# ---------------------------------------------------------------------------
# probes


def default_step(theta: np.ndarray) -> np.ndarray:
    return 1e-6 * np.maximum(1.0, np.abs(theta))


def jacobian(m: ParametricModel, theta: Sequence[float], h: float | Sequence[float] | None = None) -> np.ndarray:
    """Central finite differences; step ``1e-6 * max(1, |theta_i|)`` by default."""
    theta = np.asarray(theta, dtype=float)
    steps = default_step(theta) if h is None else np.broadcast_to(np.asarray(h, dtype=float), theta.shape)
    cols = []
    for i in range(m.dim):
        e = np.zeros(m.dim)
        e[i] = steps[i]
        if not (m.inside(theta + e) and m.inside(theta - e)):
            raise DomainError(f"finite-difference stencil leaves the domain along coordinate {i}")
        cols.append((m(theta + e) - m(theta - e)) / (2 * steps[i]))
    return np.column_stack(cols)


@dataclass
class GridSpec:
    lower: Sequence[float]
    upper: Sequence[float]
    points: int | Sequence[int]

    def iter_points(self) -> list[np.ndarray]:
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        counts = [self.points] * len(lo) if isinstance(self.points, int) else list(self.points)
        axes = [np.linspace(a, b, n) for a, b, n in zip(lo, hi, counts)]
        return [np.array(p) for p in product(*axes)]

    def to_json(self) -> dict:
        return {"lower": list(map(float, self.lower)), "upper": list(map(float, self.upper)), "points": self.points}


@dataclass
class LocalReport:
    grid: dict
    dets: list[float]
    min_abs_det: float
    tolerance: float
    witnesses: list[list[float]]

    def to_json(self) -> dict:
        return {
            "grid": self.grid,
            "min_abs_det": self.min_abs_det,
            "tolerance": self.tolerance,
            "points_checked": len(self.dets),
            "witnesses": self.witnesses,
        }


def check_local(m: ParametricModel, grid: GridSpec | Sequence[Sequence[float]], tol: float = 1e-10) -> LocalReport:
    """``|det J|`` at each grid point; points below ``tol`` are local-failure witnesses."""
    if isinstance(grid, GridSpec):
        pts, spec = grid.iter_points(), grid.to_json()
    else:
        pts = [np.asarray(p, float) for p in grid]
        spec = {"points": [p.tolist() for p in pts]}
    dets, wit = [], []
    for p in pts:
        d = abs(float(np.linalg.det(jacobian(m, p))))
        dets.append(d)
        if d < tol:
            wit.append(p.tolist())
    return LocalReport(spec, dets, min(dets) if dets else float("nan"), tol, wit)



def coordinate_rays(m: ParametricModel) -> list[tuple[str, Ray]]:
    """From the centre of the search box, push one coordinate to each edge of the domain."""
    centre = (np.asarray(m.search_lower) + np.asarray(m.search_upper)) / 2
    rays: list[tuple[str, Ray]] = []
    for i in range(m.dim):
        for side, bound in (("lower", m.lower[i]), ("upper", m.upper[i])):

            def ray(t: float, i=i, bound=bound, side=side) -> np.ndarray:
                p = centre.copy()
                if np.isfinite(bound):
                    p[i] = bound + (centre[i] - bound) * t
                else:
                    p[i] = centre[i] + (1 / t if side == "upper" else -1 / t)
                return p

            rays.append((f"coord{i}-{side}", ray))
    return rays


def segment_ray(start: Sequence[float], end: Sequence[float]) -> Ray:
    """Straight ray from ``start`` (t = 1) to ``end`` (t -> 0)."""
    s, e = np.asarray(start, float), np.asarray(end, float)
    return lambda t: e + (s - e) * t


@dataclass
class RayResult:
    name: str
    last_params: list[float]
    tail: list[list[float]]
    accumulates: bool
    limit: list[float] | None
    interior_preimage: list[float] | None
    residual: float | None

    @property
    def violation(self) -> bool:
        return self.interior_preimage is not None

    def to_json(self) -> dict:
        return {
            "ray": self.name,
            "last_params": self.last_params,
            "image_tail": self.tail,
            "accumulates": self.accumulates,
            "limit": self.limit,
            "interior_preimage": self.interior_preimage,
            "residual": self.residual,
            "violation": self.violation,
        }


def _search_preimage(m: ParametricModel, target: np.ndarray, margin: float, starts: int, rng: np.random.Generator) -> tuple[np.ndarray | None, float]:
    lo = np.maximum(m.search_lower, m.lower + margin)
    hi = np.minimum(m.search_upper, m.upper - margin)
    best, best_r = None, np.inf
    scale = np.maximum(1.0, np.abs(target))

    def resid(t: np.ndarray) -> np.ndarray:
        return (m.evaluate(t) - target) / scale

    for _ in range(starts):
        x0 = rng.uniform(lo, hi)
        try:
            sol = least_squares(resid, x0, bounds=(lo, hi), xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
        except (ValueError, FloatingPointError):
            continue
        r = float(np.max(np.abs(m.evaluate(sol.x) - target)))
        if r < best_r:
            best, best_r = sol.x, r
    return best, best_r


def properness_probe(
    m: ParametricModel,
    rays: Sequence[tuple[str, Ray]] | None = None,
    *,
    auto_rays: bool = True,
    steps: int = 30,
    acc_tol: float = 1e-6,
    match_tol: float = 1e-6,
    margin: float = 1e-3,
    bound: float = 1e6,
    starts: int = 40,
    seed: int = 0,
) -> list[RayResult]:
    """Follow each ray ``t -> theta(t)`` as ``t = 2^-s`` shrinks to 0.

    If the images settle (successive gap below ``acc_tol``, magnitude below
    ``bound``), look for an interior parameter at least ``margin`` inside the
    domain whose image matches the limit to ``match_tol``.  Such a parameter is
    a properness-violation witness.
    """
    rng = np.random.default_rng(seed)
    all_rays = list(rays or []) + (coordinate_rays(m) if auto_rays else [])
    out = []
    for name, ray in all_rays:
        imgs, last = [], None
        for s in range(1, steps + 1):
            p = ray(2.0**-s)
            if not m.inside(p):
                break
            last = p
            with np.errstate(all="ignore"):
                imgs.append(m.evaluate(p))
        if len(imgs) < 2 or last is None:
            out.append(RayResult(name, [] if last is None else last.tolist(), [], False, None, None, None))
            continue
        tail = [y.tolist() for y in imgs[-3:]]
        y1, y0 = imgs[-1], imgs[-2]
        settles = bool(np.all(np.isfinite(y1)) and np.max(np.abs(y1 - y0)) < acc_tol and np.max(np.abs(y1)) < bound)
        if not settles:
            out.append(RayResult(name, last.tolist(), tail, False, None, None, None))
            continue
        pre, r = _search_preimage(m, y1, margin, starts, rng)
        hit = pre is not None and r < match_tol and np.max(np.abs(pre - last)) > margin
        out.append(RayResult(name, last.tolist(), tail, True, y1.tolist(), pre.tolist() if hit else None, r))
    return out


@dataclass
class Collision:
    theta: list[float]
    theta_prime: list[float]
    max_gap: float
    separation: float

    def to_json(self) -> dict:
        return {"theta": self.theta, "theta_prime": self.theta_prime, "max_gap": self.max_gap, "separation": self.separation}


def image_gap(m: ParametricModel, a: Sequence[float], b: Sequence[float], target: str) -> float:
    if target == "full":
        return float(np.max(np.abs(m.full_vector(a) - m.full_vector(b))))
    return float(np.max(np.abs(m(a) - m(b))))


def collision_search(
    m: ParametricModel,
    attempts: int = 200,
    tol: float = 1e-9,
    *,
    target: str = "submodel",
    separation: float = 1e-3,
    seed: int = 0,
    starts: Sequence[tuple[Sequence[float], Sequence[float]]] = (),
) -> Collision | None:
    """Multi-start least squares on ``image(theta) - image(theta')`` with a
    penalty keeping the pair at least ``separation`` apart.

    ``starts`` are tried before the ``attempts`` random start pairs; a
    properness witness (last ray point, interior preimage) is a good seed.
    ``target="full"`` compares every menu's probabilities and needs a
    full-model evaluator.  A candidate is re-verified from scratch before it
    is returned; absence of a result is not a proof of injectivity.
    """
    if target not in ("submodel", "full"):
        raise DomainError(f"unknown collision target {target!r}")
    if target == "full" and m.full is None:
        raise DomainError(f"{m.name} has no full-model evaluator")
    d = m.dim
    lo, hi = np.asarray(m.search_lower, float), np.asarray(m.search_upper, float)
    def full_image(t: np.ndarray) -> np.ndarray:
        rule = m.full(t)
        return np.concatenate([rule[k] for k in sorted(rule)])

    img = full_image if target == "full" else m.evaluate
    rng = np.random.default_rng(seed)

    def resid(z: np.ndarray) -> np.ndarray:
        a, b = z[:d], z[d:]
        gap = img(a) - img(b)
        short = max(0.0, 2 * separation - float(np.linalg.norm(a - b)))
        return np.concatenate([gap, [short]])

    seeded = [np.clip(np.concatenate([np.asarray(x, float), np.asarray(y, float)]), np.concatenate([lo, lo]), np.concatenate([hi, hi])) for x, y in starts]
    randoms = (np.concatenate([rng.uniform(lo, hi), rng.uniform(lo, hi)]) for _ in range(attempts))
    for z0 in [*seeded, *randoms]:
        try:
            sol = least_squares(resid, z0, bounds=(np.concatenate([lo, lo]), np.concatenate([hi, hi])), xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=200)
        except (ValueError, FloatingPointError):
            continue
        a, b = sol.x[:d], sol.x[d:]
        sep = float(np.linalg.norm(a - b))
        if sep < separation or not (m.inside(a) and m.inside(b)):
            continue
        gap = image_gap(m, a, b, target)
        if gap < tol:
            return Collision(a.tolist(), b.tolist(), gap, sep)
    return None


def verify_collision(m: ParametricModel, c: Collision, tol: float, target: str = "submodel") -> bool:
    a, b = np.asarray(c.theta), np.asarray(c.theta_prime)
    if not (m.inside(a) and m.inside(b)):
        return False
    return image_gap(m, a, b, target) < tol and float(np.linalg.norm(a - b)) >= c.separation * (1 - 1e-12)


@dataclass
class ProbeReport:
    local: LocalReport | None
    rays: list[RayResult] = field(default_factory=list)
    collision: Collision | None = None

    @property
    def verdict(self) -> str:
        if self.local is not None and self.local.witnesses:
            return "local-failure-witness"
        if any(r.violation for r in self.rays) or self.collision is not None:
            return "properness-violation-witness"
        return "no-violation-found"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "evidence_only": True,
            "local": None if self.local is None else self.local.to_json(),
            "rays": [r.to_json() for r in self.rays],
            "collision": None if self.collision is None else self.collision.to_json(),
        }
