"""Directional kernels sampled on the unit sphere.

A kernel is a finite quadrature on S^(n-1) together with one sample value
per node.  For n=1 the sphere is the two-point set {-1, +1} carrying
counting measure; for n=2 the nodes are equispaced angles with equal
weights (the periodic trapezoid rule, spectrally accurate for smooth
integrands).  Sampled kernels are treated as exact at their nodes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import KernelError, ParameterError

UNIT_NORM_TOL = 1e-12
MEASURE_TOL = 1e-10

#: surface measure of S^(n-1) for the supported dimensions
SURFACE_MEASURE = {1: 2.0, 2: 2.0 * math.pi}


@dataclass(frozen=True)
class DirectionalKernel:
    """Quadrature nodes, weights, and sample values on the unit sphere.

    Attributes
    ----------
    dimension : int
        Ambient dimension n (1 or 2).  Nodes live on S^(n-1).
    nodes : ndarray, shape (m, n)
        Unit vectors.
    weights : ndarray, shape (m,)
        Positive quadrature weights summing to the surface measure.
    values : ndarray, shape (m,)
        Kernel samples at the nodes.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.dimension not in SURFACE_MEASURE:
            raise ParameterError(f"unsupported dimension {self.dimension}")
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.dimension:
            raise KernelError(f"nodes must have shape (m, {self.dimension})")
        m = nodes.shape[0]
        if m == 0:
            raise KernelError("kernel needs at least one node")
        if weights.shape != (m,) or values.shape != (m,):
            raise KernelError("weights and values must match the node count")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))
                and np.all(np.isfinite(values))):
            raise KernelError("kernel data must be finite")
        norms = np.linalg.norm(nodes, axis=1)
        if np.max(np.abs(norms - 1.0)) > UNIT_NORM_TOL:
            raise KernelError("nodes must lie on the unit sphere")
        if np.any(weights <= 0.0):
            raise KernelError("weights must be positive")
        total = float(np.sum(weights))
        if abs(total - SURFACE_MEASURE[self.dimension]) > MEASURE_TOL:
            raise KernelError(
                f"weights sum to {total}, expected {SURFACE_MEASURE[self.dimension]}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "values", values)

    @property
    def node_count(self) -> int:
        return self.nodes.shape[0]

    def angles(self) -> np.ndarray:
        """Node angles in [0, 2pi) for n=2, signs for n=1."""
        if self.dimension == 1:
            return self.nodes[:, 0].copy()
        return np.mod(np.arctan2(self.nodes[:, 1], self.nodes[:, 0]),
                      2.0 * math.pi)

    def with_values(self, values) -> "DirectionalKernel":
        return DirectionalKernel(self.dimension, self.nodes, self.weights,
                                 np.asarray(values, dtype=float))


# --------------------------------------------------------------------------
# constructors


def two_point_kernel(value_pos: float, value_neg: float) -> DirectionalKernel:
    """n=1 kernel on nodes (+1, -1) with unit counting weights."""
    nodes = np.array([[1.0], [-1.0]])
    return DirectionalKernel(1, nodes, np.ones(2),
                             np.array([value_pos, value_neg], dtype=float))


def hilbert_kernel() -> DirectionalKernel:
    """Odd two-point kernel reproducing the classical Hilbert transform."""
    return two_point_kernel(1.0 / math.pi, -1.0 / math.pi)


def circle_kernel(values_of_angle, node_count: int = 512) -> DirectionalKernel:
    """n=2 kernel sampling ``values_of_angle(theta)`` at equispaced angles.

    Node angles are offset by half a step so sector boundaries at rational
    multiples of pi fall between nodes.
    """
    if node_count < 4:
        raise ParameterError("node_count must be at least 4")
    theta = (np.arange(node_count) + 0.5) * (2.0 * math.pi / node_count)
    nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    weights = np.full(node_count, 2.0 * math.pi / node_count)
    vals = np.asarray(values_of_angle(theta), dtype=float)
    return DirectionalKernel(2, nodes, weights, vals)


def constant_kernel(dimension: int, value: float = 1.0,
                    node_count: int = 512) -> DirectionalKernel:
    if dimension == 1:
        return two_point_kernel(value, value)
    return circle_kernel(lambda th: np.full_like(th, value), node_count)


def cosine_kernel(harmonic: int = 1, node_count: int = 512) -> DirectionalKernel:
    """Mean-zero kernel cos(m*theta) on the circle."""
    if harmonic < 1:
        raise ParameterError("harmonic must be a positive integer")
    return circle_kernel(lambda th: np.cos(harmonic * th), node_count)


def sector_kernel(sectors: int = 1, node_count: int = 512) -> DirectionalKernel:
    """Alternating +-1 on 2k equal sectors of opening pi/k.

    k=1 is the half-plane sign kernel.  The node count is rounded up to a
    multiple of 2k so every sector carries the same number of nodes and the
    mean vanishes exactly.
    """
    if sectors < 1:
        raise ParameterError("sectors must be a positive integer")
    step = 2 * sectors
    node_count = step * math.ceil(max(node_count, step) / step)

    def vals(th):
        return np.where(np.floor(th / (math.pi / sectors)).astype(int) % 2 == 0,
                        1.0, -1.0)

    return circle_kernel(vals, node_count)


# --------------------------------------------------------------------------
# operations


def lq_norm(kernel: DirectionalKernel, q: float) -> float:
    """Lq norm of the kernel against its quadrature measure."""
    if not (1.0 < q < math.inf):
        raise ParameterError(f"q must lie in (1, inf), got {q}")
    return float(np.sum(kernel.weights * np.abs(kernel.values) ** q) ** (1.0 / q))


def mean(kernel: DirectionalKernel) -> float:
    """Integral of the kernel over the sphere."""
    return float(np.sum(kernel.weights * kernel.values))


def split_mean_zero(kernel: DirectionalKernel):
    """Split off the quadrature mean: values = zero-mean part + constant.

    Returns
    -------
    (DirectionalKernel, float)
        The mean-zero kernel and the constant, so that adding the constant
        back reproduces the original values exactly.
    """
    c = mean(kernel) / float(np.sum(kernel.weights))
    return kernel.with_values(kernel.values - c), c


# --------------------------------------------------------------------------
# preset parsing and file format


_PRESET_RE = re.compile(r"^([a-z_]+)(?::(.*))?$")


def _parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise ParameterError(f"malformed parameter {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = float(val)
    return out


def parse_kernel(spec: str, node_count: int = 512) -> DirectionalKernel:
    """Build a kernel from a preset string.

    Supported: ``hilbert``, ``constant``, ``cos:m=2``, ``sector:k=4``,
    ``file:<path>``.
    """
    if spec.startswith("file:"):
        return read_kernel(spec[5:])
    m = _PRESET_RE.match(spec)
    if not m:
        raise ParameterError(f"unrecognized kernel spec {spec!r}")
    name, params = m.group(1), _parse_params(m.group(2))
    if name == "hilbert":
        return hilbert_kernel()
    if name == "constant":
        return constant_kernel(int(params.get("n", 2)),
                               params.get("value", 1.0), node_count)
    if name == "cos":
        return cosine_kernel(int(params.get("m", 1)), node_count)
    if name == "sector":
        return sector_kernel(int(params.get("k", 1)), node_count)
    raise ParameterError(f"unknown kernel preset {name!r}")


def write_kernel(kernel: DirectionalKernel, path) -> None:
    """Plain-text kernel file: dimension, node count, then angle/sign value rows."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"dim {kernel.dimension}\n")
        fh.write(f"count {kernel.node_count}\n")
        for a, v in zip(kernel.angles(), kernel.values):
            fh.write(f"{float(a)!r} {float(v)!r}\n")


def read_kernel(path) -> DirectionalKernel:
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("dim ") \
            or not lines[1].startswith("count "):
        raise KernelError(f"{path}: malformed kernel header")
    dim = int(lines[0].split()[1])
    count = int(lines[1].split()[1])
    rows = lines[2:]
    if len(rows) != count:
        raise KernelError(f"{path}: expected {count} rows, found {len(rows)}")
    sites = np.empty(count)
    vals = np.empty(count)
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != 2:
            raise KernelError(f"{path}: malformed row {row!r}")
        sites[i], vals[i] = float(parts[0]), float(parts[1])
    if dim == 1:
        if sorted(sites.tolist()) != [-1.0, 1.0]:
            raise KernelError(f"{path}: n=1 kernels need exactly nodes +1 and -1")
        pos = vals[sites > 0][0]
        neg = vals[sites < 0][0]
        return two_point_kernel(pos, neg)
    if dim == 2:
        nodes = np.stack([np.cos(sites), np.sin(sites)], axis=1)
        weights = np.full(count, 2.0 * math.pi / count)
        return DirectionalKernel(2, nodes, weights, vals)
    raise KernelError(f"{path}: unsupported dimension {dim}")
