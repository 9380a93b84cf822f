"""Loss-function families and the utilization quantities derived from them.

A loss family maps (offered load, capacity) to a blocking probability
F(rho, cap).  Every family must satisfy:

  (i)   0 <= F <= 1,
  (ii)  F continuous, nondecreasing in rho,
  (iii) F nonincreasing in cap,

plus saturation: F(rho, cap) -> 1 as rho -> infinity for fixed cap.
Saturation is what makes the log-loss level y = -log(1 - F) invertible in
rho, which the utilization function below depends on.

Derived quantities:

* ``utilization(spec, y, cap)``: U(y, cap) = rho(y) * e^(-y), where
  rho(y) = sup{rho : -log(1 - F(rho, cap)) <= y} is the generalized
  (upper) inverse of the log-loss curve.  U is the mean capacity in use
  on an entity whose loss probability is 1 - e^(-y).
* ``utilization_measure(spec, B, cap)``: integral of U(z, cap) for z in
  [0, -log(1-B)]; the capacity-cost correction attached to a blocking
  level B.

Three families ship here; more can be added with ``register_family``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expi, gammaincc, gammaln

__all__ = [
    "LossSpec",
    "LossFamily",
    "LossDomainError",
    "InversionError",
    "QuadratureError",
    "loss",
    "utilization",
    "utilization_measure",
    "utilization_integral",
    "log_loss_ceiling",
    "register_family",
    "get_family",
    "loss_kinds",
]

RHO_BRACKET_CAP = 1e12
INVERSION_TOL = 1e-10
INVERSION_MAX_ITERS = 200
MEASURE_ABS_TOL = 1e-8
MEASURE_REL_TOL = 1e-6
MEASURE_MAX_DEPTH = 40

# Tight tolerances for the internal integral path used inside optimization
# loops, where finite differences of the objective divide out steps ~1e-6
# and would otherwise amplify quadrature noise past the gradient checks.
_TIGHT_INVERSION_TOL = 1e-13
_TIGHT_QUAD_REL = 1e-12
_TIGHT_QUAD_ABS = 1e-13


class LossDomainError(ValueError):
    """Input outside a loss operation's domain (negative load, B >= 1, ...)."""


class InversionError(RuntimeError):
    """The log-loss inverse left its bracket; loss family not saturating."""


class QuadratureError(RuntimeError):
    """An adaptive quadrature failed to reach its tolerance."""


# ---------------------------------------------------------------------------
# numerical kernels


def _adaptive_simpson(f, a, b, abs_tol, rel_tol, max_depth):
    """Recursive adaptive Simpson integration of f over [a, b].

    A panel is accepted when its Richardson estimate |S2 - S1| is within
    15x the global tolerance; the err/15 correction then leaves its true
    error far below that bar.  The tolerance is judged globally rather
    than split per subdivision so that root-type edge behaviour (the
    Erlang utilization curve rises like z^(1/cap) at 0) refines in depth
    ~ log of the target instead of exhausting the budget.  Raises
    QuadratureError when max_depth is exhausted anywhere.
    """
    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tol = max(abs_tol, rel_tol * abs(whole))
    return _simpson_panel(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_panel(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise QuadratureError("adaptive Simpson exceeded max depth")
    return _simpson_panel(f, a, m, fa, flm, fm, left, tol, depth - 1) + _simpson_panel(
        f, m, b, fm, frm, fb, right, tol, depth - 1
    )


def _doubling_simpson(f, a, b, abs_tol, rel_tol, max_doublings=14):
    """Composite Simpson on a uniform grid, doubled until two refinements agree.

    f must accept a numpy array of nodes and return an array of values.
    """
    if b <= a:
        return 0.0
    n = 8
    xs = np.linspace(a, b, n + 1)
    fx = np.asarray(f(xs), dtype=float)

    def simpson(values, panels):
        h = (b - a) / panels
        return h / 3.0 * (values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum())

    prev = simpson(fx, n)
    for _ in range(max_doublings):
        mids = 0.5 * (xs[:-1] + xs[1:])
        fm = np.asarray(f(mids), dtype=float)
        xs2 = np.empty(2 * n + 1)
        fx2 = np.empty(2 * n + 1)
        xs2[0::2] = xs
        xs2[1::2] = mids
        fx2[0::2] = fx
        fx2[1::2] = fm
        n *= 2
        xs, fx = xs2, fx2
        cur = simpson(fx, n)
        if abs(cur - prev) <= max(abs_tol, rel_tol * abs(cur)):
            return cur + (cur - prev) / 15.0
        prev = cur
    raise QuadratureError("composite Simpson failed to settle")


def _upper_inverse(family, y, cap, tol, bracket_cap=RHO_BRACKET_CAP, max_iters=INVERSION_MAX_ITERS):
    """rho(y) = sup{rho >= 0 : -log(1 - F(rho, cap)) <= y}.

    Bracket by doubling from max(1, cap), then bisect until the bracket's
    log-loss spread is within tol.  The sup convention resolves plateaus of
    F from above (so e.g. linear_clip gives rho(0) = cap, not 0).
    """
    if y < 0.0 or not math.isfinite(y):
        raise LossDomainError("log-loss level must be finite and >= 0")

    def log_loss(rho):
        s = family.survival_scalar(rho, cap)
        if s <= 0.0:
            return math.inf
        return -math.log(s)

    lo = 0.0
    hi = max(1.0, cap)
    doublings = 0
    while log_loss(hi) <= y:
        lo = hi
        hi *= 2.0
        doublings += 1
        if hi > bracket_cap or doublings > max_iters:
            raise InversionError("non-saturating loss function")
    f_lo = log_loss(lo)
    f_hi = log_loss(hi)
    for _ in range(max_iters):
        if f_hi - f_lo <= tol:
            break
        if hi - lo <= 1e-16 * (1.0 + hi):
            break
        mid = 0.5 * (lo + hi)
        f_mid = log_loss(mid)
        if f_mid <= y:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo


def _broadcast(rho, cap):
    """Common scalar/array handling for the blocking implementations."""
    arr_rho = np.asarray(rho, dtype=float)
    arr_cap = np.asarray(cap, dtype=float)
    shape = np.broadcast_shapes(arr_rho.shape, arr_cap.shape)
    r = np.broadcast_to(arr_rho, shape).reshape(-1)
    c = np.broadcast_to(arr_cap, shape).reshape(-1)
    return r, c, shape


def _finish(values, shape):
    out = values.reshape(shape)
    if shape == ():
        return float(out)
    return out


# ---------------------------------------------------------------------------
# families


class LossFamily:
    """Extension point for additional loss families.

    Subclasses must implement ``blocking`` (accepting scalars or numpy
    arrays) and must satisfy the module axioms including saturation;
    the generic inversion raises InversionError otherwise.  Override the
    remaining methods when closed forms exist.  Register instances with
    ``register_family``.
    """

    name = "abstract"

    def blocking(self, rho, cap):
        raise NotImplementedError

    def survival(self, rho, cap):
        """1 - F; override where the subtraction loses precision near F = 1
        (the inversion and quadrature kernels lean on this in saturation)."""
        return 1.0 - self.blocking(rho, cap)

    def survival_scalar(self, rho, cap):
        """Scalar 1 - F; hot kernels (bisection, recursive quadrature) call
        this once per node, so families can shed the array dispatch."""
        return float(self.survival(rho, cap))

    def offered_at(self, y, cap, tol=INVERSION_TOL):
        """Generalized upper inverse rho(y) of the log-loss curve."""
        return _upper_inverse(self, y, cap, tol)

    def utilization(self, y, cap, tol=INVERSION_TOL):
        return self.offered_at(y, cap, tol) * math.exp(-y)

    def utilization_integral(self, y, cap):
        """Integral of U(z, cap) for z in [0, y] (tight-tolerance path)."""
        if y <= 0.0 or cap <= 0.0:
            return 0.0
        return _adaptive_simpson(
            lambda z: self.utilization(z, cap, _TIGHT_INVERSION_TOL),
            0.0,
            y,
            MEASURE_ABS_TOL,
            MEASURE_REL_TOL,
            MEASURE_MAX_DEPTH,
        )

    def log_loss_ceiling(self, cap):
        """Largest y this family can be evaluated at before the inversion
        bracket cap would be exceeded; inf when the inverse is analytic."""
        return math.inf


class _ErlangB(LossFamily):
    """Continuous-capacity Erlang-B blocking.

    1/B = rho * Int_0^inf e^(-rho t) (1+t)^cap dt, which equals
    e^rho * rho^(-cap) * Gamma(cap+1, rho); evaluated in log space through
    the regularized upper incomplete gamma function, with a falling-
    factorial asymptotic series where the gamma tail underflows
    (rho far above cap, where B -> 1).
    """

    name = "erlang_b"

    def __init__(self):
        self._head_cache: dict[float, float] = {}

    def blocking(self, rho, cap):
        r, c, shape = _broadcast(rho, cap)
        out = np.zeros(r.size)
        pos = r > 0.0
        out[pos & (c <= 0.0)] = 1.0
        work = pos & (c > 0.0)
        if np.any(work):
            rw = r[work]
            cw = c[work]
            log_inv_b = _erlang_log_inv_b(rw, cw)
            vals = np.exp(-log_inv_b)
            bad = ~np.isfinite(log_inv_b)
            if np.any(bad):
                vals[bad] = 1.0 / (1.0 + _erlang_series_rest(rw[bad], cw[bad]))
            out[work] = vals
        return _finish(out, shape)

    def survival(self, rho, cap):
        # 1 - B to high *relative* accuracy even deep into saturation,
        # where the gamma route cancels rho-sized logs and turns to noise.
        r, c, shape = _broadcast(rho, cap)
        out = np.ones(r.size)
        pos = r > 0.0
        out[pos & (c <= 0.0)] = 0.0
        work = pos & (c > 0.0)
        if np.any(work):
            rw = r[work]
            cw = c[work]
            vals = np.empty(rw.size)
            series = rw >= np.maximum(4.0 * cw, 35.0)
            direct = ~series
            if np.any(direct):
                log_inv_b = _erlang_log_inv_b(rw[direct], cw[direct])
                with np.errstate(invalid="ignore"):
                    vals[direct] = -np.expm1(-log_inv_b)
                bad = direct.copy()
                bad[direct] = ~np.isfinite(log_inv_b)
                series |= bad
            if np.any(series):
                rest = _erlang_series_rest(rw[series], cw[series])
                vals[series] = rest / (1.0 + rest)
            out[work] = vals
        return _finish(out, shape)

    def offered_at(self, y, cap, tol=INVERSION_TOL):
        if y < 0.0 or not math.isfinite(y):
            raise LossDomainError("log-loss level must be finite and >= 0")
        if y == 0.0:
            # F strictly increasing from F(0, cap) = 0, so y = 0 <=> rho = 0
            return 0.0
        return _upper_inverse(self, y, cap, tol)

    def utilization_integral(self, y, cap):
        # Change of variables z -> rho turns Int_0^y U dz into
        # Int_0^rho(y) survival(s) ds - rho(y) e^(-y).  The floor term is
        # exact, the head [0, max(1, cap)] does not depend on y (so it is
        # cached per capacity), and the tail runs in log space, where the
        # saturated curve s * survival(s) ~ cap is nearly flat.  Together
        # these keep deep-saturation calls (rho many decades above cap,
        # e.g. probes of a near-zero capacity) at a flat cost instead of
        # one quadrature segment per decade.
        if y <= 0.0 or cap <= 0.0:
            return 0.0
        rho = self.offered_at(y, cap, _TIGHT_INVERSION_TOL)
        if rho <= 0.0:
            return 0.0
        b0 = max(1.0, cap)
        if rho <= b0:
            total = self._survival_head(rho, cap)
        else:
            total = self._head_cache.get(cap)
            if total is None:
                if len(self._head_cache) >= 4096:
                    self._head_cache.clear()
                total = self._survival_head(b0, cap)
                self._head_cache[cap] = total

            def tail(u):
                s = np.exp(u)
                return self.survival(s, cap) * s

            total += _doubling_simpson(tail, math.log(b0), math.log(rho), _TIGHT_QUAD_ABS, _TIGHT_QUAD_REL)
        return total - rho * math.exp(-y)

    def _survival_head(self, x, cap):
        # Near s = 0 the curve behaves like s^cap; for cap < 1 that is a
        # root cusp, handled by integrating the blocking side over dyadic
        # panels (each panel sees a smooth rescaled curve) and flipping:
        # Int survival = x - Int B.  The absolute bar scales with the
        # range: the integrand is <= 1, so a short head's integral can sit
        # far below the nominal absolute tolerance.
        if cap < 1.0:
            return x - self._blocking_head(x, cap)
        abs_tol = _TIGHT_QUAD_ABS * min(1.0, x)
        return _doubling_simpson(lambda s: self.survival(s, cap), 0.0, x, abs_tol, _TIGHT_QUAD_REL)

    def _blocking_head(self, x, cap):
        # Int_0^x B(s, cap) ds.  Uniform grids lose the s^cap cusp and a
        # scalar recursive rule pays per-node dispatch; dyadic panels
        # toward 0 each see bounded derivative ratios, and stacking all
        # panels' nodes makes the whole head one vectorized blocking()
        # call.  Panels stop once the dropped cusp tail (~2^(-K(1+cap)) of
        # the total) is below machine-relative; its analytic estimate
        # B(eps) * eps/(1+cap) is added back.
        if x <= 0.0:
            return 0.0
        panels = int(math.ceil(47.0 / (1.0 + cap)))
        hi = x * np.exp2(-np.arange(panels, dtype=float))
        lo = 0.5 * hi
        n = 64
        t = np.linspace(0.0, 1.0, n + 1)
        nodes = lo[:, None] + (hi - lo)[:, None] * t[None, :]
        vals = np.asarray(self.blocking(nodes.reshape(-1), cap)).reshape(panels, n + 1)
        width = hi - lo

        def simpson(stride):
            sub = vals[:, ::stride]
            h = width * (stride / n)
            return h / 3.0 * (sub[:, 0] + sub[:, -1] + 4.0 * sub[:, 1:-1:2].sum(axis=1) + 2.0 * sub[:, 2:-2:2].sum(axis=1))

        fine = simpson(1)
        coarse = simpson(2)
        total = float((fine + (fine - coarse) / 15.0).sum())
        eps = float(lo[-1])
        return total + float(self.blocking(eps, cap)) * eps / (1.0 + cap)

    def survival_scalar(self, rho, cap):
        # Scalar twin of survival() for the bisection inversion, which
        # evaluates one node at a time and would otherwise pay array
        # dispatch on every call.
        if rho <= 0.0:
            return 1.0
        if cap <= 0.0:
            return 0.0
        if rho < max(4.0 * cap, 35.0):
            q = float(gammaincc(cap + 1.0, rho))
            if q > 0.0:
                log_inv_b = rho - cap * math.log(rho) + math.lgamma(cap + 1.0) + math.log(q)
                return -math.expm1(-log_inv_b)
        rest = 0.0
        term = 1.0
        falling = cap
        prev_mag = math.inf
        for _ in range(120):
            term *= falling / rho
            mag = abs(term)
            if not mag < prev_mag or mag <= 1e-18 * abs(1.0 + rest):
                break
            rest += term
            prev_mag = mag
            falling -= 1.0
        return rest / (1.0 + rest)

    def log_loss_ceiling(self, cap):
        # Carried load <= cap gives rho(y) <= cap * e^y; keeping that under
        # 1e10 leaves a 100x margin inside the 1e12 bracket cap.
        return max(1e-3, math.log(1e10 / max(cap, 1e-10)))


def _erlang_log_inv_b(rho, cap):
    # log(1/B) = rho - cap log rho + log Gamma(cap+1) + log Q(cap+1, rho);
    # -inf where the regularized gamma tail Q underflows (deep saturation).
    with np.errstate(divide="ignore"):
        log_q = np.log(gammaincc(cap + 1.0, rho))
    return rho - cap * np.log(rho) + gammaln(cap + 1.0) + log_q


def _erlang_series_rest(rho, cap):
    """1/B - 1 from the asymptotic series 1/B = sum_k (cap)_k / rho^k.

    (cap)_k is the falling factorial; the series is asymptotic, so each
    element stops at its smallest term.  Truncation error is ~e^(cap-rho)
    relative, which is why callers gate it on rho >= max(4 cap, 35).
    """
    rest = np.zeros_like(rho)
    term = np.ones_like(rho)
    falling = np.array(cap, dtype=float, copy=True)
    prev_mag = np.full(rho.shape, np.inf)
    active = np.ones(rho.shape, dtype=bool)
    for _ in range(120):
        term = term * falling / rho
        mag = np.abs(term)
        active &= mag < prev_mag
        active &= mag > 1e-18 * np.abs(1.0 + rest)
        if not np.any(active):
            break
        rest[active] += term[active]
        prev_mag = mag
        falling = falling - 1.0
    return rest


def erlang_b_by_quadrature(rho, cap, abs_tol=1e-10):
    """Erlang-B via adaptive quadrature of the integral representation.

    Alternate evaluation route kept for cross-checking the incomplete-gamma
    path; factors the integrand's maximum out so large capacities do not
    overflow.
    """
    if rho < 0.0 or cap < 0.0:
        raise LossDomainError("negative load or capacity")
    if rho == 0.0:
        return 0.0
    if cap == 0.0:
        return 1.0
    t_star = max(0.0, cap / rho - 1.0)
    peak = cap * math.log1p(t_star) - rho * t_star
    width = math.sqrt(cap) / rho + 1.0 / rho
    upper = t_star + 45.0 * width + 45.0 / rho

    def shifted(t):
        return np.exp(cap * np.log1p(t) - rho * t - peak)

    integral = _doubling_simpson(shifted, 0.0, upper, abs_tol, 1e-12)
    log_inv_b = math.log(rho) + peak + math.log(integral)
    return math.exp(-log_inv_b)


class _LinearClip(LossFamily):
    """B = max(0, (rho - cap)/rho): lossless below cap, overflow above."""

    name = "linear_clip"

    def blocking(self, rho, cap):
        r, c, shape = _broadcast(rho, cap)
        out = np.zeros(r.size)
        pos = r > 0.0
        out[pos] = np.clip((r[pos] - c[pos]) / r[pos], 0.0, 1.0)
        return _finish(out, shape)

    def survival(self, rho, cap):
        r, c, shape = _broadcast(rho, cap)
        out = np.ones(r.size)
        pos = r > 0.0
        out[pos] = np.clip(c[pos] / r[pos], 0.0, 1.0)
        return _finish(out, shape)

    def offered_at(self, y, cap, tol=INVERSION_TOL):
        if y < 0.0 or not math.isfinite(y):
            raise LossDomainError("log-loss level must be finite and >= 0")
        return cap * math.exp(y)

    def utilization(self, y, cap, tol=INVERSION_TOL):
        if y < 0.0 or not math.isfinite(y):
            raise LossDomainError("log-loss level must be finite and >= 0")
        return cap

    def utilization_integral(self, y, cap):
        if y <= 0.0:
            return 0.0
        return cap * y


class _ExpOverflow(LossFamily):
    """B = exp(-cap/rho): smooth everywhere, saturating in rho."""

    name = "exp_overflow"

    def blocking(self, rho, cap):
        r, c, shape = _broadcast(rho, cap)
        out = np.zeros(r.size)
        pos = r > 0.0
        with np.errstate(divide="ignore"):
            out[pos] = np.exp(-c[pos] / r[pos])
        return _finish(out, shape)

    def survival(self, rho, cap):
        r, c, shape = _broadcast(rho, cap)
        out = np.ones(r.size)
        pos = r > 0.0
        with np.errstate(divide="ignore"):
            out[pos] = -np.expm1(-c[pos] / r[pos])
        return _finish(out, shape)

    def offered_at(self, y, cap, tol=INVERSION_TOL):
        if y < 0.0 or not math.isfinite(y):
            raise LossDomainError("log-loss level must be finite and >= 0")
        if y == 0.0 or cap <= 0.0:
            return 0.0
        # solve exp(-cap/rho) = 1 - e^(-y)
        log_b = math.log1p(-math.exp(-y))
        return -cap / log_b

    def utilization(self, y, cap, tol=INVERSION_TOL):
        return self.offered_at(y, cap) * math.exp(-y)

    def utilization_integral(self, y, cap):
        # substituting u = 1 - e^(-z) gives cap * Int_0^B du/(-log u),
        # the logarithmic integral, expressed through Ei.
        if y <= 0.0 or cap <= 0.0:
            return 0.0
        log_b = math.log1p(-math.exp(-y))
        return -cap * float(expi(log_b))


# ---------------------------------------------------------------------------
# registry and public operations


_REGISTRY: dict[str, LossFamily] = {}


def register_family(family: LossFamily) -> None:
    """Add a loss family to the registry under family.name."""
    name = getattr(family, "name", "")
    if not name or not isinstance(name, str):
        raise LossDomainError("loss family must carry a non-empty name")
    _REGISTRY[name] = family


def get_family(kind: str) -> LossFamily:
    try:
        return _REGISTRY[kind]
    except KeyError:
        raise LossDomainError(f"unknown loss kind '{kind}'") from None


def loss_kinds() -> tuple[str, ...]:
    return tuple(_REGISTRY)


register_family(_ErlangB())
register_family(_LinearClip())
register_family(_ExpOverflow())


@dataclass(frozen=True)
class LossSpec:
    """Reference to a registered loss family."""

    kind: str

    def __post_init__(self):
        if self.kind not in _REGISTRY:
            raise LossDomainError(f"unknown loss kind '{self.kind}'")


def _check_domain(rho, cap):
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(cap))):
        raise LossDomainError("load and capacity must be finite")
    if np.any(np.asarray(rho) < 0.0) or np.any(np.asarray(cap) < 0.0):
        raise LossDomainError("load and capacity must be >= 0")


def loss(spec: LossSpec, rho, cap):
    """Blocking probability F(rho, cap) for the family named by `spec`.

    Accepts scalars or broadcastable numpy arrays.
    """
    _check_domain(rho, cap)
    return get_family(spec.kind).blocking(rho, cap)


def utilization(spec: LossSpec, y: float, cap: float, tol: float = INVERSION_TOL) -> float:
    """U(y, cap) = rho(y) * e^(-y), mean capacity in use at log-loss y."""
    if cap < 0.0 or not math.isfinite(cap):
        raise LossDomainError("capacity must be finite and >= 0")
    if y < 0.0 or not math.isfinite(y):
        raise LossDomainError("log-loss level must be finite and >= 0")
    return float(get_family(spec.kind).utilization(y, cap, tol))


def utilization_measure(spec: LossSpec, blocking_prob: float, cap: float) -> float:
    """Adaptive-Simpson value of Int_0^{-log(1-B)} U(z, cap) dz.

    This is the reference quadrature route for all families; closed forms
    and the change-of-variables fast path are checked against it in tests.
    """
    if not (0.0 <= blocking_prob < 1.0):
        raise LossDomainError("blocking must lie in [0, 1)")
    if cap < 0.0 or not math.isfinite(cap):
        raise LossDomainError("capacity must be finite and >= 0")
    if blocking_prob == 0.0 or cap == 0.0:
        return 0.0
    family = get_family(spec.kind)
    top = -math.log1p(-blocking_prob)
    return _adaptive_simpson(
        lambda z: family.utilization(z, cap),
        0.0,
        top,
        MEASURE_ABS_TOL,
        MEASURE_REL_TOL,
        MEASURE_MAX_DEPTH,
    )


def utilization_integral(spec: LossSpec, y: float, cap: float) -> float:
    """Integral of U(z, cap) over [0, y]; same value as
    utilization_measure at B = 1 - e^(-y), via each family's fast path."""
    if y < 0.0 or not math.isfinite(y):
        raise LossDomainError("log-loss level must be finite and >= 0")
    if cap < 0.0 or not math.isfinite(cap):
        raise LossDomainError("capacity must be finite and >= 0")
    return float(get_family(spec.kind).utilization_integral(y, cap))


def log_loss_ceiling(spec: LossSpec, cap: float) -> float:
    """Safe upper bound on y for this family and capacity (inf if analytic)."""
    return get_family(spec.kind).log_loss_ceiling(cap)
