"""Interaction potentials for nonlocal aggregation dynamics.

All built-in kernels are radial: W(x) = w(|x|) with w(0) = 0, so W is even
and vanishes at the origin. They are globally Lipschitz with a known bound
``w_inf`` on the gradient, and semi-convex with a known modulus ``lam <= 0``
(W(x) - lam/2 |x|^2 is convex). The gradient has a kink at the origin; we
always use the *hatted* gradient, which is the classical gradient away from
zero and exactly the zero vector at zero. This makes the induced velocity
field of a discrete measure well defined on its own atoms.

Built-in families:

* ``morse(a)``: w(r) = 1 - exp(-a r), with lam = -a**2 and w_inf = a.
* ``absolute_value()``: w(r) = r, with lam = 0 and w_inf = 1.

``mollify`` produces a C^1 approximant by capping the radial profile with a
quadratic near the origin; the cap preserves lam and w_inf, leaves the
gradient untouched outside the cap radius, and perturbs values by at most
the requested tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Potential", "morse", "absolute_value", "mollify"]

KIND_ABS = "abs"
KIND_MORSE = "morse"
KIND_CAPPED_ABS = "capped_abs"
KIND_CAPPED_MORSE = "capped_morse"

_BASE_KINDS = (KIND_ABS, KIND_MORSE)
_CAPPED_KINDS = (KIND_CAPPED_ABS, KIND_CAPPED_MORSE)

# integer codes used by the numba kernels in particles.py
KIND_CODES = {
    KIND_ABS: 0,
    KIND_MORSE: 1,
    KIND_CAPPED_ABS: 2,
    KIND_CAPPED_MORSE: 3,
}


@dataclass(frozen=True)
class Potential:
    """A radial interaction kernel together with its sharp constants.

    Instances are immutable; all operations are pure and may be called
    concurrently. Positions are arrays whose last axis is the spatial
    dimension (a bare scalar is treated as a point on the line).
    """

    kind: str
    a: float = 0.0           # Morse stiffness (unused for the |x| family)
    cap_radius: float = 0.0  # mollification radius, > 0 only for capped kinds
    lam: float = 0.0         # convexity modulus, <= 0
    w_inf: float = 0.0       # uniform gradient bound, >= 0

    # -- radial profile ---------------------------------------------------

    def radial_value(self, r):
        """w(r) for r >= 0 (vectorized)."""
        r = np.asarray(r, dtype=float)
        if self.kind == KIND_ABS:
            return r.copy()
        if self.kind == KIND_MORSE:
            return -np.expm1(-self.a * r)
        rc = self.cap_radius
        s = self._cap_slope()
        if self.kind == KIND_CAPPED_ABS:
            outer = r - 0.5 * rc
        else:  # capped Morse
            shift = -np.expm1(-self.a * rc) - 0.5 * s * rc
            outer = -np.expm1(-self.a * r) - shift
        inner = 0.5 * s * r * r / rc
        return np.where(r <= rc, inner, outer)

    def radial_slope(self, r):
        """w'(r) for r > 0; continuously extended by 0 at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.kind == KIND_ABS:
            return np.ones_like(r)
        if self.kind == KIND_MORSE:
            return self.a * np.exp(-self.a * r)
        rc = self.cap_radius
        s = self._cap_slope()
        if self.kind == KIND_CAPPED_ABS:
            outer = np.ones_like(r)
        else:
            outer = self.a * np.exp(-self.a * r)
        return np.where(r <= rc, s * r / rc, outer)

    def _cap_slope(self) -> float:
        if self.kind == KIND_CAPPED_ABS:
            return 1.0
        return self.a * float(np.exp(-self.a * self.cap_radius))

    # -- point operations --------------------------------------------------

    def eval(self, x):
        """W at one point or an array of points (last axis = dimension)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return float(self.radial_value(abs(float(x))))
        r = np.sqrt(np.sum(x * x, axis=-1))
        out = self.radial_value(r)
        return float(out) if out.ndim == 0 else out

    def grad_hat(self, x):
        """Hatted gradient: w'(|x|) x/|x| for x != 0, the zero vector at 0."""
        x = np.asarray(x, dtype=float)
        scalar_input = x.ndim == 0
        if scalar_input:
            x = x.reshape(1)
        r = np.sqrt(np.sum(x * x, axis=-1))
        scale = np.zeros_like(r)
        nz = r > 0.0
        np.divide(self.radial_slope(r), r, out=scale, where=nz)
        scale[~nz] = 0.0
        out = scale[..., None] * x
        if scalar_input:
            return float(out[0])
        return out

    def constants(self) -> tuple[float, float]:
        """(lam, w_inf): convexity modulus and gradient bound."""
        return (self.lam, self.w_inf)

    # -- helpers for jitted kernels ----------------------------------------

    def kernel_params(self) -> tuple[int, float, float, float]:
        """(kind_code, a, cap_radius, cap_slope) for the numba pair kernels."""
        return (KIND_CODES[self.kind], self.a, self.cap_radius, self._cap_slope())


def morse(a: float) -> Potential:
    """Fully attractive Morse-type kernel W(x) = 1 - exp(-a|x|), a > 0."""
    if not a > 0.0:
        raise ValueError(f"Morse stiffness must be positive, got {a!r}")
    return Potential(kind=KIND_MORSE, a=float(a), lam=-float(a) ** 2, w_inf=float(a))


def absolute_value() -> Potential:
    """The kernel W(x) = |x| (convex, unit gradient bound)."""
    return Potential(kind=KIND_ABS, lam=0.0, w_inf=1.0)


def mollify(p: Potential, eps: float) -> Potential:
    """C^1 approximant of `p`, smooth at the origin, same lam and w_inf.

    The radial profile is replaced on [0, r_cap] by the quadratic that
    matches value and slope at r_cap and has zero slope at 0; the whole
    profile is then shifted by a constant so the value at the origin stays
    zero. Gradients agree exactly outside B(0, r_cap), and r_cap <= eps is
    chosen so the value perturbation is at most eps everywhere.
    """
    if not eps > 0.0:
        raise ValueError(f"mollification tolerance must be positive, got {eps!r}")
    if p.kind in _CAPPED_KINDS:
        raise ValueError("potential is already mollified")
    if p.kind not in _BASE_KINDS:
        raise ValueError(f"unknown potential kind {p.kind!r}")
    # Constant shift is bounded by 1.5 * w_inf * r_cap; keep it below eps.
    r_cap = eps / max(1.0, 1.5 * p.w_inf)
    kind = KIND_CAPPED_ABS if p.kind == KIND_ABS else KIND_CAPPED_MORSE
    return Potential(kind=kind, a=p.a, cap_radius=r_cap, lam=p.lam, w_inf=p.w_inf)


def from_spec(kind: str, a: float | None = None, mollify_eps: float | None = None) -> Potential:
    """Build a potential from config-file fields (kind, parameters)."""
    if kind == "morse":
        if a is None:
            raise ValueError("potential kind 'morse' requires parameter 'a'")
        p = morse(a)
    elif kind == "abs":
        p = absolute_value()
    else:
        raise ValueError(f"unknown potential kind {kind!r} (expected 'morse' or 'abs')")
    if mollify_eps is not None:
        p = mollify(p, mollify_eps)
    return p
