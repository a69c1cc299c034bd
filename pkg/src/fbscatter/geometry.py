"""Parameterized closed curves and corner-graded boundary meshes."""

from dataclasses import dataclass, field, replace
from typing import Callable, Tuple

import numpy as np

from .special import ParameterError

TWO_PI = 2.0 * np.pi

# segment labels on the boundary of the truncated cell
OBSTACLE, LEFT, BOTTOM, RIGHT, TOP = 1, 2, 3, 4, 5


class MeshingError(ValueError):
    pass


@dataclass(frozen=True)
class ParamCurve:
    """Closed curve x(s), s in [0, period), with analytic derivatives.

    ``corners`` lists the parameters of tangent discontinuities.
    """

    label: str
    x: Callable[[np.ndarray], np.ndarray]
    dx: Callable[[np.ndarray], np.ndarray]
    ddx: Callable[[np.ndarray], np.ndarray]
    period: float = TWO_PI
    corners: Tuple[float, ...] = ()

    def __post_init__(self):
        c = tuple(float(v) for v in self.corners)
        if any(v < 0 or v >= self.period for v in c) or list(c) != sorted(c):
            raise ParameterError("corners must be sorted and lie in [0, period)")
        object.__setattr__(self, "corners", c)

    def __call__(self, s):
        return self.x(np.asarray(s, dtype=float))

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return replace(self, x=lambda s, f=self.x: f(s) + shift)

    def signed_area(self, n=512):
        s = np.arange(n) * self.period / n
        p, d = self.x(s), self.dx(s)
        return 0.5 * np.sum(p[:, 0] * d[:, 1] - p[:, 1] * d[:, 0]) * self.period / n


def _stack(a, b):
    return np.stack(np.broadcast_arrays(a, b), axis=-1)


def disk(radius=2.0, center=(0.0, 0.0)):
    c = np.asarray(center, dtype=float)
    return ParamCurve(
        "disk",
        lambda s: c + radius * _stack(np.cos(s), np.sin(s)),
        lambda s: radius * _stack(-np.sin(s), np.cos(s)),
        lambda s: -radius * _stack(np.cos(s), np.sin(s)),
    )


def ellipse(a=2.8, b=2.5, center=(0.0, 0.0)):
    """Ellipse with semi-axes ``a`` (along x1) and ``b`` (along x2)."""
    c = np.asarray(center, dtype=float)
    return ParamCurve(
        "ellipse",
        lambda s: c + _stack(a * np.cos(s), b * np.sin(s)),
        lambda s: _stack(-a * np.sin(s), b * np.cos(s)),
        lambda s: _stack(-a * np.cos(s), -b * np.sin(s)),
    )


def drop(scale=1.8, offset=1.8, center=(0.0, 0.0)):
    """x(s) = (scale sin s, 2 scale sin(s/2) + offset); a corner at s = 0."""
    c = np.asarray(center, dtype=float)
    return ParamCurve(
        "drop",
        lambda s: c + _stack(scale * np.sin(s), 2 * scale * np.sin(s / 2) + offset),
        lambda s: _stack(scale * np.cos(s), scale * np.cos(s / 2)),
        lambda s: _stack(-scale * np.sin(s), -0.5 * scale * np.sin(s / 2)),
        corners=(0.0,),
    )


def rectangle(width, height, center=(0.0, 0.0)):
    """Arc-length parameterized rectangle, counterclockwise from the lower-left corner."""
    c = np.asarray(center, dtype=float)
    lengths = np.array([width, height, width, height], dtype=float)
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    origin = c - 0.5 * np.array([width, height])
    vertices = origin + np.array([[0, 0], [width, 0], [width, height], [0, height]])
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    period = float(lengths.sum())

    def side(s):
        s = np.mod(s, period)
        return np.clip(np.searchsorted(starts, s, side="right") - 1, 0, 3), s

    def x(s):
        i, s = side(s)
        return vertices[i] + (s - starts[i])[..., None] * dirs[i]

    def dx(s):
        i, _ = side(s)
        return dirs[i]

    def ddx(s):
        return np.zeros(np.shape(s) + (2,))

    return ParamCurve("rectangle", x, dx, ddx, period=period, corners=tuple(starts))


def square(side=3.0, center=(0.0, 0.0)):
    return replace(rectangle(side, side, center), label="square")


def polyline(vertices):
    """Closed polygon through ``vertices`` (counterclockwise), arc-length parameterized."""
    v = np.asarray(vertices, dtype=float)
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths == 0):
        raise ParameterError("repeated polygon vertex")
    starts = np.concatenate([[0.0], np.cumsum(lengths)[:-1]])
    dirs = edges / lengths[:, None]
    period = float(lengths.sum())
    nv = len(v)

    def idx(s):
        s = np.mod(s, period)
        return np.clip(np.searchsorted(starts, s, side="right") - 1, 0, nv - 1), s

    def x(s):
        i, s = idx(s)
        return v[i] + (s - starts[i])[..., None] * dirs[i]

    def dx(s):
        return dirs[idx(s)[0]]

    return ParamCurve("polyline", x, dx, lambda s: np.zeros(np.shape(s) + (2,)),
                      period=period, corners=tuple(starts))


def fourier(cos1, sin1, cos2, sin2, center=(0.0, 0.0)):
    """Smooth curve with coordinate Fourier series; index m of each list is mode m."""
    c = np.asarray(center, dtype=float)
    a1, b1, a2, b2 = (np.asarray(v, dtype=float) for v in (cos1, sin1, cos2, sin2))

    def series(s, a, b, order):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for m in range(max(len(a), len(b))):
            am = a[m] if m < len(a) else 0.0
            bm = b[m] if m < len(b) else 0.0
            cs, sn = np.cos(m * s), np.sin(m * s)
            if order == 0:
                out = out + am * cs + bm * sn
            elif order == 1:
                out = out + m * (-am * sn + bm * cs)
            else:
                out = out - m * m * (am * cs + bm * sn)
        return out

    return ParamCurve(
        "fourier",
        lambda s: c + _stack(series(s, a1, b1, 0), series(s, a2, b2, 0)),
        lambda s: _stack(series(s, a1, b1, 1), series(s, a2, b2, 1)),
        lambda s: _stack(series(s, a1, b1, 2), series(s, a2, b2, 2)),
    )


_BUILTINS = {
    "disk": disk,
    "drop": drop,
    "square": square,
    "ellipse": ellipse,
    "rectangle": rectangle,
    "polyline": polyline,
    "fourier": fourier,
}


def builtin_curve(name, **params):
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ParameterError(f"unknown curve {name!r}") from None
    return factory(**params)


def graded_map(t, t_b, t_e, s_b, s_e, p=6):
    """Kress-type grading of [t_b, t_e] onto [s_b, s_e], flat to order p-1 at both ends."""
    return _graded(t, t_b, t_e, s_b, s_e, p)[0]


def _graded(t, t_b, t_e, s_b, s_e, p):
    if p < 2:
        raise ParameterError("grading exponent p must be >= 2")
    if not (t_b < t_e and s_b < s_e):
        raise ParameterError("need t_b < t_e and s_b < s_e")
    t = np.asarray(t, dtype=float)
    xi = (2.0 * t - (t_b + t_e)) / (t_e - t_b)
    e1 = (0.5 - 1.0 / p) * xi**3 + xi / p + 0.5
    e2 = 1.0 - e1
    a, b = e1**p, e2**p
    s = s_b + (s_e - s_b) * a / (a + b)
    de1 = 3.0 * (0.5 - 1.0 / p) * xi**2 + 1.0 / p
    ds = (s_e - s_b) * p * de1 * (e1 * e2) ** (p - 1) / (a + b) ** 2 * 2.0 / (t_e - t_b)
    return s, ds


@dataclass(frozen=True)
class BoundaryMesh:
    """Nodes on one closed curve, uniform in the mesh parameter t_j = 2 pi j / n.

    ``jac`` is |dx/dt| (zero at corners) and quadrature weights are h * jac.
    Densities handed around the package are always ``jac * normal derivative``.
    """

    curve: ParamCurve
    t: np.ndarray
    s: np.ndarray
    points: np.ndarray
    jac: np.ndarray
    normals: np.ndarray
    curv: np.ndarray  # x_tt . nu
    p: int
    segment: np.ndarray
    is_corner: np.ndarray = field(repr=False)

    @property
    def n(self):
        return len(self.t)

    @property
    def h(self):
        return TWO_PI / self.n

    @property
    def weights(self):
        return self.h * self.jac

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return replace(self, curve=self.curve.translated(shift), points=self.points + shift)

    def flipped(self):
        """Same nodes with the normal reversed."""
        return replace(self, normals=-self.normals, curv=-self.curv)


def build_mesh(curve, n, p=6, normal="outward", segment_label=OBSTACLE):
    """Mesh ``curve`` with ``n`` nodes (graded between corners).

    ``normal='outward'`` points away from the region the curve encloses,
    ``'inward'`` into it.
    """
    if n < 8 or n % 2:
        raise ParameterError("node_count must be an even integer >= 8")
    t = TWO_PI * np.arange(n) / n
    corners = curve.corners
    if not corners:
        s = t * curve.period / TWO_PI
        dsdt = np.full(n, curve.period / TWO_PI)
        is_corner = np.zeros(n, dtype=bool)
    else:
        c0 = corners[0]
        bounds = np.array(list(corners) + [c0 + curve.period])
        lens = np.diff(bounds)
        counts = _allocate(n, lens)
        if np.any(counts < 2):
            raise MeshingError("too few nodes to place every corner on the grid")
        idx = np.concatenate([[0], np.cumsum(counts)])
        s = np.empty(n)
        dsdt = np.empty(n)
        for a in range(len(lens)):
            i0, i1 = idx[a], idx[a + 1]
            tt = TWO_PI * np.arange(i0, i1) / n
            s[i0:i1], dsdt[i0:i1] = _graded(tt, TWO_PI * i0 / n, TWO_PI * i1 / n,
                                            bounds[a], bounds[a + 1], p)
        s = np.mod(s, curve.period)
        is_corner = np.zeros(n, dtype=bool)
        is_corner[idx[:-1]] = True
        dsdt[is_corner] = 0.0
        s[is_corner] = np.array(corners)
    pts = curve.x(s)
    d1 = curve.dx(s)
    d2 = curve.ddx(s)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    orient = 1.0 if curve.signed_area() > 0 else -1.0
    if normal == "inward":
        orient = -orient
    elif normal != "outward":
        raise ParameterError("normal must be 'outward' or 'inward'")
    nu = orient * np.stack([d1[:, 1], -d1[:, 0]], axis=1) / speed[:, None]
    curv = np.einsum("ij,ij->i", d2, nu) * dsdt**2
    return BoundaryMesh(curve, t, s, pts, speed * dsdt, nu, curv, p,
                        np.full(n, segment_label), is_corner)


def _allocate(n, lengths):
    raw = n * lengths / lengths.sum()
    counts = np.floor(raw).astype(int)
    for i in np.argsort(-(raw - counts))[: n - counts.sum()]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class CellBoundary:
    """Rectangle around one unit cell plus wall/top/bottom index bookkeeping.

    ``left[i]`` and ``right[i]`` are nodes at the same height, with
    ``points[right[i]] == points[left[i]] + (2 pi, 0)`` exactly.
    """

    mesh: BoundaryMesh
    H: float
    left: np.ndarray
    right: np.ndarray
    bottom: np.ndarray
    top: np.ndarray

    def translated(self, shift):
        return replace(self, mesh=self.mesh.translated(shift))


def cell_rectangle(H, n, p=6, x1_center=0.0):
    if n % 4:
        raise ParameterError("rectangle node count must be divisible by 4")
    curve = rectangle(TWO_PI, 2.0 * H, center=(x1_center, 0.0))
    half = n // 2
    n_b = int(round(half * TWO_PI / (TWO_PI + 2.0 * H)))
    n_s = half - n_b
    if min(n_b, n_s) < 4:
        raise MeshingError("rectangle node count too small for its aspect ratio")
    # force the side split so that corners land on nodes with equal wall counts
    t = TWO_PI * np.arange(n) / n
    bounds_idx = np.array([0, n_b, n_b + n_s, 2 * n_b + n_s, n])
    lens = np.array([TWO_PI, 2 * H, TWO_PI, 2 * H])
    sb = np.concatenate([[0.0], np.cumsum(lens)])
    s = np.empty(n)
    dsdt = np.empty(n)
    for a in range(4):
        i0, i1 = bounds_idx[a], bounds_idx[a + 1]
        s[i0:i1], dsdt[i0:i1] = _graded(t[i0:i1], t[i0], TWO_PI * i1 / n, sb[a], sb[a + 1], p)
    is_corner = np.zeros(n, dtype=bool)
    is_corner[bounds_idx[:-1]] = True
    s[is_corner] = sb[:-1]
    dsdt[is_corner] = 0.0
    pts = curve.x(s)
    d1 = curve.dx(s)
    nu = np.stack([d1[:, 1], -d1[:, 0]], axis=1)
    right = np.arange(n_b, n_b + n_s + 1)
    left = (n - np.arange(n_s + 1)) % n
    # exact translates: copy right-wall data onto the left wall
    pts[left] = pts[right] - np.array([TWO_PI, 0.0])
    dsdt[left] = dsdt[right]
    segment = np.empty(n, dtype=int)
    bottom = np.arange(1, n_b)
    top = np.arange(n_b + n_s + 1, 2 * n_b + n_s)
    segment[bottom] = BOTTOM
    segment[top] = TOP
    segment[right] = RIGHT
    segment[left] = LEFT
    mesh = BoundaryMesh(curve, t, s, pts, dsdt.copy(), nu, np.zeros(n), p, segment, is_corner)
    return CellBoundary(mesh, float(H), left, right, bottom, top)

def contains(curve, points, n=2048):
    """True for points strictly inside a closed curve (even-odd rule on a fine polygon)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = curve(np.linspace(0.0, curve.period, n, endpoint=False))
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    crosses = (y0 > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
    return np.count_nonzero(crosses & (px < xint), axis=1) % 2 == 1
