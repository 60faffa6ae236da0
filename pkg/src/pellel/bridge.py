"""Conversions between complex (1,1)/(1,0)/(0,1) forms and real forms,
and the translation of real convexity into a Levi-form lower bound.

Complex coordinates are interleaved with the real axes throughout:
z_j = x_{2j-1} + i x_{2j}, so the real partner axes of complex slot j
(1-based) are 2j-1 and 2j.  A real (1,1) form f = (A + iB)_{i jbar}
(A antisymmetric, B symmetric) corresponds to the real 2-form

    2 ( sum_{i<j} A_{i jbar} dx_i^dx_j + sum_{i<j} A_{i jbar} dy_i^dy_j
        + sum_{i,j} B_{i jbar} dx_i^dy_j ),

which satisfies |2-form|**2 = 4 |(1,1) form|**2 pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Weight
from .errors import ValidationError
from .forms import ComplexForm, RealForm
from .multiindex import MultiIndex, increasing_indices, index_positions


def _pair_maps(n: int):
    """Real increasing-pair positions of the x-x, y-y and x-y blocks.

    Returns (xx, yy, mixed): xx[i,j] and yy[i,j] for complex i<j (0-based),
    mixed[i][j] = (position, sign) for the real pair of (x_i, y_j).
    """
    pos = index_positions(2 * n, 2)
    xx, yy, mixed = {}, {}, {}
    for i in range(n):
        for j in range(i + 1, n):
            xx[i, j] = pos[MultiIndex((2 * i + 1, 2 * j + 1))]
            yy[i, j] = pos[MultiIndex((2 * i + 2, 2 * j + 2))]
    for i in range(n):
        for j in range(n):
            a, b = 2 * i + 1, 2 * j + 2  # x_i axis, y_j axis (1-based)
            if a < b:
                mixed[i, j] = (pos[MultiIndex((a, b))], 1.0)
            else:
                mixed[i, j] = (pos[MultiIndex((b, a))], -1.0)
    return xx, yy, mixed


def real11_to_real2(f: ComplexForm, require_real: bool = True,
                    tol: float = 1e-10) -> RealForm:
    """Convert a real (1,1) form to the corresponding real 2-form.

    require_real checks A antisymmetric and B symmetric (that is
    f = conj(f)) and raises with the largest asymmetry otherwise.
    """
    if tuple(f.bidegree) != (1, 1):
        raise ValidationError("input must be a (1,1) form")
    n = f.n
    mat = f.coeffs.reshape((n, n) + f.grid.shape)
    A, B = mat.real, mat.imag
    if require_real:
        scale = max(float(np.abs(f.coeffs).max()), 1e-300)
        asym = max(float(np.abs(A + np.swapaxes(A, 0, 1)).max()),
                   float(np.abs(B - np.swapaxes(B, 0, 1)).max()))
        if asym > tol * scale:
            raise ValidationError(
                f"(1,1) form is not real: max asymmetry {asym:.3e} exceeds {tol:.1e} * {scale:.3e}")
    g = RealForm.zeros(f.grid, 2)
    xx, yy, mixed = _pair_maps(n)
    for (i, j), kx in xx.items():
        g.coeffs[kx] += 2.0 * A[i, j]
        g.coeffs[yy[i, j]] += 2.0 * A[i, j]
    for (i, j), (k, sign) in mixed.items():
        g.coeffs[k] += 2.0 * sign * B[i, j]
    return g


def real2_to_real11(g: RealForm, tol: float = 1e-10) -> ComplexForm:
    """Inverse conversion; validates that g lies in the image of the real
    (1,1) forms (x-x and y-y blocks agree, mixed block symmetric)."""
    if g.degree != 2:
        raise ValidationError("input must be a real 2-form")
    if g.grid.dim % 2:
        raise ValidationError("real dimension must be even")
    n = g.grid.dim // 2
    xx, yy, mixed = _pair_maps(n)
    shape = g.grid.shape
    A = np.zeros((n, n) + shape)
    B = np.zeros((n, n) + shape)
    scale = max(float(np.abs(g.coeffs).max()) if g.coeffs.size else 0.0, 1e-300)
    worst = 0.0
    for (i, j), kx in xx.items():
        vx, vy = g.coeffs[kx], g.coeffs[yy[i, j]]
        worst = max(worst, float(np.abs(vx - vy).max()))
        A[i, j] = 0.5 * vx
        A[j, i] = -A[i, j]
    for (i, j), (k, sign) in mixed.items():
        B[i, j] = 0.5 * sign * g.coeffs[k]
    worst = max(worst, float(np.abs(B - np.swapaxes(B, 0, 1)).max()))
    if worst > tol * scale:
        raise ValidationError(
            f"2-form outside the image of real (1,1) forms: block mismatch {worst:.3e}")
    B = 0.5 * (B + np.swapaxes(B, 0, 1))
    coeffs = (A + 1j * B).reshape((n * n,) + shape)
    return ComplexForm(g.grid, (1, 1), coeffs)


def complex2_to_real2(f20: ComplexForm, f11: ComplexForm, f02: ComplexForm,
                      tol: float = 1e-10) -> RealForm:
    """Real 2-form of a conjugation-symmetric triple of type components
    (f02 = conj(f20), f11 real).  Together with real11_to_real2 this pins
    down every sign convention of the complexified exterior derivative:
    for a real 1-form v, d v reassembles exactly from the type components
    of (holomorphic + antiholomorphic derivative) of its split."""
    if tuple(f20.bidegree) != (2, 0) or tuple(f02.bidegree) != (0, 2):
        raise ValidationError("expected (2,0) and (0,2) forms")
    n = f20.n
    scale = max(float(np.abs(f20.coeffs).max()) if f20.coeffs.size else 0.0, 1e-300)
    if f20.coeffs.size and float(np.abs(f02.coeffs - f20.coeffs.conj()).max()) > tol * scale:
        raise ValidationError("(0,2) part is not the conjugate of the (2,0) part")
    g = real11_to_real2(f11, require_real=True, tol=tol)
    if n >= 2:
        pos = index_positions(2 * n, 2)
        for q, pair in enumerate(increasing_indices(n, 2)):
            i, j = pair[0] - 1, pair[1] - 1  # complex slots, 0-based
            c = f20.coeffs[q]
            g.coeffs[pos[MultiIndex((2 * i + 1, 2 * j + 1))]] += 2.0 * c.real
            g.coeffs[pos[MultiIndex((2 * i + 2, 2 * j + 2))]] -= 2.0 * c.real
            g.coeffs[pos[MultiIndex((2 * i + 1, 2 * j + 2))]] -= 2.0 * c.imag
            g.coeffs[pos[MultiIndex((2 * i + 2, 2 * j + 1))]] -= 2.0 * c.imag
    return g


def split_1form(v: RealForm) -> tuple[ComplexForm, ComplexForm]:
    """Split a real 1-form into its (1,0) and (0,1) parts.

    Components: (v_{2j-1}/2 + v_{2j}/(2i)) dz_j and the conjugate; the two
    parts reassemble to v exactly and are exact conjugates of each other.
    """
    if v.degree != 1:
        raise ValidationError("input must be a real 1-form")
    if v.grid.dim % 2:
        raise ValidationError("real dimension must be even")
    n = v.grid.dim // 2
    shape = v.grid.shape
    c10 = np.empty((n,) + shape, dtype=complex)
    for j in range(n):
        c10[j] = 0.5 * v.coeffs[2 * j] - 0.5j * v.coeffs[2 * j + 1]
    v10 = ComplexForm(v.grid, (1, 0), c10)
    v01 = ComplexForm(v.grid, (0, 1), c10.conj())
    return v10, v01


def join_1form(v10: ComplexForm, v01: ComplexForm) -> RealForm:
    """Reassemble a real 1-form from conjugate (1,0)/(0,1) parts."""
    if tuple(v10.bidegree) != (1, 0) or tuple(v01.bidegree) != (0, 1):
        raise ValidationError("expected a (1,0) and a (0,1) form")
    n = v10.n
    out = RealForm.zeros(v10.grid, 1)
    total = v10.coeffs + v01.coeffs.conj()  # = 2 * v10 for conjugate pairs
    for j in range(n):
        out.coeffs[2 * j] = total[j].real
        out.coeffs[2 * j + 1] = -total[j].imag
    return out


@dataclass(frozen=True)
class HessianSplit:
    """Complex Hessian blocks of a weight at a batch of points: the
    holomorphic block phi_{z_j z_k}, the mixed (Levi) block
    phi_{z_j zbar_k} and the antiholomorphic block (conjugate of the
    holomorphic one)."""

    holo: np.ndarray
    mixed: np.ndarray
    anti: np.ndarray


def complex_hessian(weight: Weight, points: np.ndarray) -> HessianSplit:
    """Wirtinger second derivatives from the real Hessian (interleaved
    coordinate pairing)."""
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] % 2:
        raise ValidationError("points must have an even leading dimension")
    n = pts.shape[0] // 2
    H = weight.hess(pts)
    shape = pts.shape[1:]
    holo = np.empty((n, n) + shape, dtype=complex)
    mixed = np.empty((n, n) + shape, dtype=complex)
    for j in range(n):
        for k in range(n):
            aj, bj, ak, bk = 2 * j, 2 * j + 1, 2 * k, 2 * k + 1
            holo[j, k] = 0.25 * ((H[aj, ak] - H[bj, bk]) - 1j * (H[aj, bk] + H[bj, ak]))
            mixed[j, k] = 0.25 * ((H[aj, ak] + H[bj, bk]) + 1j * (H[aj, bk] - H[bj, ak]))
    return HessianSplit(holo, mixed, holo.conj())


def hessian_split_identity(weight: Weight, x, xi) -> tuple[float, float]:
    """Both sides of the real-to-complex Hessian splitting at one point:
    xi^T Hess(phi) xi versus the holomorphic + 2 mixed + antiholomorphic
    quadratic, with omega_j = xi_{2j-1} + i xi_{2j}."""
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    xi = np.asarray(xi, dtype=float)
    if x.shape[0] != xi.shape[0] or x.shape[0] % 2:
        raise ValidationError("point and direction must share an even dimension")
    H = weight.hess(x)[..., 0]
    lhs = float(xi @ H @ xi)
    split = complex_hessian(weight, x)
    omega = xi[0::2] + 1j * xi[1::2]
    holo = split.holo[..., 0]
    mixed = split.mixed[..., 0]
    quad_holo = omega @ holo @ omega  # antiholomorphic block contributes its conjugate
    quad_mixed = np.einsum("jk,j,k->", mixed, omega, omega.conj())
    rhs = float((quad_holo + np.conj(quad_holo) + 2.0 * quad_mixed).real)
    return lhs, rhs


def levi_lower_bound(weight: Weight, c: float, x, omega) -> tuple[float, float]:
    """Levi-form value against its convexity lower bound at one point:
    returns (sum mixed_{jk} w_j conj(w_k), c/2 |w|**2 + |holomorphic
    quadratic|).  The first is at least the second for weights with real
    Hessian bounded below by c."""
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    omega = np.asarray(omega, dtype=complex)
    split = complex_hessian(weight, x)
    mixed = split.mixed[..., 0]
    holo = split.holo[..., 0]
    levi = float(np.einsum("jk,j,k->", mixed, omega, omega.conj()).real)
    bound = float(0.5 * c * np.vdot(omega, omega).real
                  + abs(omega @ holo @ omega))
    return levi, bound
