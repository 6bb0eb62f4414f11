"""Nonlocal operators: fractional (magnetic) Laplacian, Gagliardo forms, and
the Riesz-potential convolution.

Normalization: the singular-integral constant is fixed so the A == 0 operator
has Fourier symbol |xi|^(2s); the quadratic forms carry the matching factor,
i.e. the discrete [u]^2 approximates the squared L2 norm of (-Delta)^(s/2) u.

Two quadrature modes are provided:

* "free"  - true displacements inside the box, kernel cut at a ball of radius
  R_cut, with the far tail approximated under zero extension of the field by
  c_{N,s} * u(x) * |S^{N-1}| / (2s * R_cut^{2s}).  Midpoint phases use the
  literal arithmetic midpoint, which makes gauge covariance under constant
  shifts exact in floating point.  This is the default and the only mode that
  accepts a magnetic potential.
* "torus" - periodized kernel (lattice image sums), no tail term.  This is
  the operator whose A == 0 action is comparable with the spectral
  Fourier-multiplier path, and it annihilates constants exactly.

Both modes exclude the singular cell from the pair sum and restore accuracy
with the analytic integral of the second-order Taylor model over a near zone
of `near_radius` cells; the model derivatives are formed with link-phase
covariant differences so the correction is also exactly gauge covariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, zeta

from ._fft import fftn, ifftn
from .grids import Field, GridSpec


def frac_lap_constant(N: int, s: float) -> float:
    """c_{N,s} = 4^s Gamma(N/2+s) / (pi^{N/2} |Gamma(-s)|)."""
    return 4.0 ** s * gamma(N / 2 + s) / (np.pi ** (N / 2) * abs(gamma(-s)))


def sphere_area(N: int) -> float:
    return 2.0 * np.pi ** (N / 2) / gamma(N / 2)


def _check_s(s: float):
    if not (0.0 < s < 1.0):
        raise ValueError("fractional order s must lie in (0, 1)")


# ------------------------------------------------------------------ helpers

def _shift_zero(u: np.ndarray, axis: int, step: int) -> np.ndarray:
    """Shift by one cell with zero fill (zero extension outside the box)."""
    v = np.zeros_like(u)
    src = [slice(None)] * u.ndim
    dst = [slice(None)] * u.ndim
    if step > 0:
        src[axis] = slice(1, None)
        dst[axis] = slice(0, -1)
    else:
        src[axis] = slice(0, -1)
        dst[axis] = slice(1, None)
    v[tuple(dst)] = u[tuple(src)]
    return v


def near_zone_weight(N: int, s: float, h: float, r0: int) -> float:
    """Second-moment discrepancy of the kernel over the near ball |z| <= (r0+1/2)h.

    W = int_{|z|<=R0} |z|^2 k(z) dz - h^N * sum_{0<|z_m|<=R0} |z_m|^2 k(z_m),
    with k(z) = |z|^(-N-2s); the correction term -c*(W/2N)*Lap restores the
    accuracy the midpoint pair sum loses near the singularity.
    """
    R0 = (r0 + 0.5) * h
    w_int = sphere_area(N) * R0 ** (2 - 2 * s) / (2 - 2 * s)
    rng = np.arange(-r0 - 1, r0 + 2)
    Z = np.stack(np.meshgrid(*([rng * h] * N), indexing="ij"), axis=-1).reshape(-1, N)
    rr = np.linalg.norm(Z, axis=-1)
    mask = (rr > 0) & (rr <= R0)
    w_sum = float(np.sum(rr[mask] ** (2 - N - 2 * s))) * h ** N
    return w_int - w_sum


def _torus_kernel(grid: GridSpec, s: float) -> np.ndarray:
    """Periodized |z|^(-N-2s) on nearest-image displacements; zero at z = 0."""
    M, h, L, N = grid.M, grid.h, grid.L, grid.dim
    zi = ((np.arange(M) + M // 2) % M) - M // 2
    if N == 1:
        z = zi * h
        az = np.abs(z)
        k = np.zeros(M)
        nz = zi != 0
        k[nz] = az[nz] ** (-1 - 2 * s)
        P = 2 * L
        k[nz] += P ** (-1 - 2 * s) * (zeta(1 + 2 * s, 1 + az[nz] / P)
                                      + zeta(1 + 2 * s, 1 - az[nz] / P))
        return k
    Z = np.stack(np.meshgrid(*([zi * h] * N), indexing="ij"), axis=-1)
    rr = np.linalg.norm(Z, axis=-1)
    k = np.zeros(grid.shape)
    nz = rr > 0
    k[nz] = rr[nz] ** (-N - 2 * s)
    # lattice image sums, then a density-approximated remainder
    K_img = 6
    offs = []
    rng = np.arange(-K_img, K_img + 1)
    for m in np.stack(np.meshgrid(*([rng] * N), indexing="ij"), axis=-1).reshape(-1, N):
        if np.any(m != 0):
            offs.append(2 * L * m.astype(float))
    for off in offs:
        k += np.linalg.norm(Z + off, axis=-1) ** (-N - 2 * s)
    R_far = (2 * K_img + 1) * L
    k += sphere_area(N) * R_far ** (-2 * s) / (2 * s) / (2 * L) ** N
    k[(0,) * N] = 0.0
    return k


def _free_kernel_block(grid: GridSpec, s: float, cutoff: float) -> np.ndarray:
    """Kernel on the full true-displacement range, wrapped into a (2M)^N block
    for linear convolution; entry at index (d mod 2M) holds k(h*d)."""
    M, h, N = grid.M, grid.h, grid.dim
    d = np.arange(2 * M)
    d = np.where(d < M, d, d - 2 * M)  # offsets -M..M-1; |offset| M unused
    axes = np.meshgrid(*([d * h] * N), indexing="ij")
    rr = np.sqrt(sum(a ** 2 for a in axes))
    k = np.zeros_like(rr)
    mask = (rr > 0) & (rr <= cutoff)
    k[mask] = rr[mask] ** (-N - 2 * s)
    return k


# ----------------------------------------------------------- the quadrature

@dataclass
class QuadratureOperator:
    """Assembled singular-integral quadrature of the fractional magnetic
    Laplacian on one grid, reusable across applications."""

    grid: GridSpec
    s: float
    A: object | None = None  # vector potential callable, or None for A == 0
    mode: str = "free"
    near_radius: int | None = None
    cutoff: float | None = None
    dense_limit: int = 768  # magnetic pair matrix kept dense up to this size
    _state: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _check_s(self.s)
        if self.mode not in ("free", "torus"):
            raise ValueError("mode must be 'free' or 'torus'")
        g = self.grid
        if self.near_radius is None:
            self.near_radius = 8 if g.dim == 1 else 2
        self.c = frac_lap_constant(g.dim, self.s)
        self.W2 = near_zone_weight(g.dim, self.s, g.h, self.near_radius)
        if self.A is not None:
            amax = float(np.max(np.abs(np.asarray(self.A(g.points())))))
            if amax == 0.0:
                self.A = None
        if self.mode == "torus":
            if self.A is not None:
                raise ValueError("the periodized kernel requires A == 0")
            self.tail = 0.0
            ker = _torus_kernel(g, self.s)
            self._state["kernel_fft"] = fftn(ker)
            self._state["rowsum"] = float(np.sum(ker))
        else:
            rc = self.cutoff if self.cutoff is not None else g.L - g.h / 2
            self.cutoff = float(min(rc, g.L - g.h / 2))
            self.tail = sphere_area(g.dim) / (2 * self.s * self.cutoff ** (2 * self.s))
            if self.A is None:
                self._state["kernel_fft"] = fftn(_free_kernel_block(g, self.s, self.cutoff))
                pad = np.zeros((2 * g.M,) * g.dim)
                pad[(slice(0, g.M),) * g.dim] = 1.0
                conv = np.real(ifftn(self._state["kernel_fft"] * fftn(pad)))
                self._state["rowsums"] = conv[(slice(0, g.M),) * g.dim].copy()
            elif g.size <= self.dense_limit:
                self._assemble_dense()
            else:
                self._state["rowsums"] = self._chunked_rowsums()
        self._link_phases = self._build_link_phases()

    # ---------------- assembly paths

    def _assemble_dense(self):
        g = self.grid
        pts = g.points()
        Z = pts[:, None, :] - pts[None, :, :]
        rr = np.linalg.norm(Z, axis=-1)
        mask = (rr > 0) & (rr <= self.cutoff)
        K = np.zeros_like(rr)
        K[mask] = rr[mask] ** (-g.dim - 2 * self.s)
        mid = (pts[:, None, :] + pts[None, :, :]) / 2
        th = np.sum(np.asarray(self.A(mid)) * Z, axis=-1)
        self._state["W"] = K * np.exp(1j * th)
        self._state["rowsums"] = K.sum(axis=1)

    def _chunked_rowsums(self, chunk: int = 128) -> np.ndarray:
        g = self.grid
        pts = g.points()
        out = np.zeros(g.size)
        for lo in range(0, g.size, chunk):
            hi = min(lo + chunk, g.size)
            Z = pts[lo:hi, None, :] - pts[None, :, :]
            rr = np.linalg.norm(Z, axis=-1)
            mask = (rr > 0) & (rr <= self.cutoff)
            K = np.where(mask, np.where(rr > 0, rr, 1.0) ** (-g.dim - 2 * self.s), 0.0)
            out[lo:hi] = K.sum(axis=1)
        return out

    def _build_link_phases(self):
        """Per-axis phases on the links i -> i+e_a, from midpoints of the links."""
        g = self.grid
        if self.A is None:
            return None
        mesh = g.mesh()
        phases = []
        for a in range(g.dim):
            shifted = mesh.copy()
            shifted[..., a] += g.h / 2
            Avals = np.asarray(self.A(shifted.reshape(-1, g.dim))).reshape(g.shape + (g.dim,))
            phases.append(Avals[..., a] * g.h)
        return phases

    # ---------------- pair sums

    def _pair_data(self, u: np.ndarray):
        """Return (rowsums, W @ u) for the pair quadrature."""
        g = self.grid
        if self.mode == "torus":
            Wu = ifftn(self._state["kernel_fft"] * fftn(u))
            if not np.iscomplexobj(u):
                Wu = np.real(Wu)
            return self._state["rowsum"], Wu
        if self.A is None:
            pad_shape = (2 * g.M,) * g.dim
            pad = np.zeros(pad_shape, dtype=complex if np.iscomplexobj(u) else float)
            pad[(slice(0, g.M),) * g.dim] = u
            Wu = ifftn(self._state["kernel_fft"] * fftn(pad))[(slice(0, g.M),) * g.dim]
            if not np.iscomplexobj(u):
                Wu = np.real(Wu)
            return self._state["rowsums"], Wu
        flat = u.reshape(-1)
        if "W" in self._state:
            return self._state["rowsums"].reshape(g.shape), \
                (self._state["W"] @ flat).reshape(g.shape)
        return self._state["rowsums"].reshape(g.shape), self._chunked_Wu(flat).reshape(g.shape)

    def _chunked_Wu(self, flat: np.ndarray, chunk: int = 64) -> np.ndarray:
        g = self.grid
        pts = g.points()
        out = np.zeros(g.size, dtype=complex)
        for lo in range(0, g.size, chunk):
            hi = min(lo + chunk, g.size)
            Z = pts[lo:hi, None, :] - pts[None, :, :]
            rr = np.linalg.norm(Z, axis=-1)
            mask = (rr > 0) & (rr <= self.cutoff)
            K = np.where(mask, np.where(rr > 0, rr, 1.0) ** (-g.dim - 2 * self.s), 0.0)
            mid = (pts[lo:hi, None, :] + pts[None, :, :]) / 2
            th = np.sum(np.asarray(self.A(mid)) * Z, axis=-1)
            out[lo:hi] = (K * np.exp(1j * th)) @ flat
        return out

    # ---------------- covariant differences

    def _transported_neighbors(self, u: np.ndarray, a: int):
        """(u+ transported to i, u- transported to i) along axis a."""
        periodic = self.mode == "torus"
        if self._link_phases is None:
            if periodic:
                return np.roll(u, -1, axis=a), np.roll(u, 1, axis=a)
            return _shift_zero(u, a, +1), _shift_zero(u, a, -1)
        phi = self._link_phases[a]
        up = _shift_zero(u, a, +1) * np.exp(-1j * phi)
        phim = _shift_zero(phi, a, -1)
        um = _shift_zero(u, a, -1) * np.exp(1j * phim)
        return up, um

    def _covariant_lap(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        out = np.zeros_like(u, dtype=complex if (np.iscomplexobj(u) or self.A is not None)
                            else float)
        for a in range(g.dim):
            up, um = self._transported_neighbors(u, a)
            out += (up - 2 * u + um) / g.h ** 2
        return out

    # ---------------- public evaluations

    def apply(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        rowsums, Wu = self._pair_data(u)
        out = self.c * g.cell_volume() * (rowsums * u - Wu)
        out = out - self.c * (self.W2 / (2 * g.dim)) * self._covariant_lap(u)
        if self.mode == "free":
            out = out + self.c * self.tail * u
        return out

    def seminorm_sq(self, u: np.ndarray) -> float:
        """Gagliardo quadratic form matching `apply` exactly:
        seminorm_sq(u) == Re <apply(u), u>_{L2,h}."""
        g = self.grid
        hV = g.cell_volume()
        rowsums, Wu = self._pair_data(u)
        val = self.c * hV * hV * float(np.sum(rowsums * np.abs(u) ** 2)
                                       - np.real(np.sum(np.conj(u) * Wu)))
        corr = 0.0
        for a in range(g.dim):
            up, _ = self._transported_neighbors(u, a)
            corr += float(np.sum(np.abs(up - u) ** 2))
            if self.mode == "free":
                first = [slice(None)] * g.dim
                first[a] = 0
                corr += float(np.sum(np.abs(u[tuple(first)]) ** 2))
        val += self.c * (self.W2 / (2 * g.dim)) * corr / g.h ** 2 * hV
        if self.mode == "free":
            val += self.c * self.tail * float(np.sum(np.abs(u) ** 2)) * hV
        return val


# ------------------------------------------------------------ public wrappers

def _vector_potential(A):
    """Accept a potential spec (anything with an .A evaluator), a bare
    callable, or None."""
    return getattr(A, "A", A)


def magnetic_frac_laplacian(u: Field, A, s: float, *, mode: str = "free",
                            near_radius: int | None = None,
                            cutoff: float | None = None) -> Field:
    """Apply the fractional magnetic Laplacian by singular-integral quadrature.

    `A` is a vector-potential callable, a potential spec carrying one, or
    None for the plain fractional Laplacian; see the module docstring for the
    two kernel modes.
    """
    A = _vector_potential(A)
    op = QuadratureOperator(u.grid, s, A, mode=mode, near_radius=near_radius,
                            cutoff=cutoff)
    vals = op.apply(u.values.astype(complex) if A is not None else u.values)
    return Field(vals, u.grid)


def gagliardo_form(u: Field, A, s: float, *, mode: str = "free",
                   near_radius: int | None = None, cutoff: float | None = None,
                   with_modulus: bool = False):
    """Quadrature of the (magnetic) Gagliardo seminorm squared.

    With `with_modulus=True` also returns the real seminorm of |u| under the
    same quadrature rule, the two sides of the diamagnetic inequality.
    """
    op = QuadratureOperator(u.grid, s, _vector_potential(A), mode=mode,
                            near_radius=near_radius, cutoff=cutoff)
    val = op.seminorm_sq(u.values)
    if not with_modulus:
        return val
    op0 = QuadratureOperator(u.grid, s, None, mode=mode, near_radius=near_radius,
                             cutoff=cutoff)
    return val, op0.seminorm_sq(np.abs(u.values))


def spectral_frac_laplacian(u: Field, s: float) -> Field:
    """Fourier-multiplier fractional Laplacian |xi|^(2s) on the periodic grid.

    Accepts s in (0, 1]; s = 1 reproduces the (spectral) Laplacian.
    """
    if not (0.0 < s <= 1.0):
        raise ValueError("spectral path requires s in (0, 1]")
    mult = u.grid.wavenumber_mesh_sq() ** s
    out = ifftn(mult * fftn(u.values))
    if not u.is_complex:
        out = np.real(out)
    return Field(out, u.grid)


def spectral_seminorm_sq(u: Field, s: float) -> float:
    """[u]^2 via the Fourier symbol; equals <(-Delta)^s u, u> on the grid."""
    mult = u.grid.wavenumber_mesh_sq() ** s
    uf = fftn(u.values)
    return float(np.sum(mult * np.abs(uf) ** 2) * u.grid.cell_volume() / u.grid.size)


# ------------------------------------------------------------ Riesz potential

@dataclass(frozen=True)
class HartreeCache:
    """Precomputed Riesz kernel |x|^(-mu) on the box and its transform."""

    grid: GridSpec
    mu: float
    kernel: np.ndarray = field(repr=False)
    kernel_spectrum: np.ndarray = field(repr=False)
    spectrum_clip: float = 0.0


def build_hartree_cache(grid: GridSpec, mu: float) -> HartreeCache:
    """Sample the kernel on nearest-image displacements; the singular cell is
    replaced by the cell mean over the equal-volume ball (exact in 1D)."""
    if not (0.0 < mu < grid.dim):
        raise ValueError("kernel not locally integrable: mu must lie in (0, N)")
    M, h, N = grid.M, grid.h, grid.dim
    zi = ((np.arange(M) + M // 2) % M) - M // 2
    axes = np.meshgrid(*([zi * h] * N), indexing="ij")
    rr = np.sqrt(sum(a ** 2 for a in axes))
    k = np.zeros(grid.shape)
    nz = rr > 0
    k[nz] = rr[nz] ** (-mu)
    omega = np.pi ** (N / 2) / gamma(N / 2 + 1)  # unit-ball volume
    r_eq = h / omega ** (1.0 / N)
    k[(0,) * N] = sphere_area(N) * r_eq ** (N - mu) / ((N - mu) * h ** N)
    spec = np.real(fftn(k)) * grid.cell_volume()
    clip = float(max(0.0, -spec.min()))
    if clip > 1e-2 * spec.max():
        raise ValueError("Riesz kernel spectrum is grossly indefinite on this grid")
    if clip > 0:
        spec = np.maximum(spec, 0.0)
    return HartreeCache(grid, mu, k, spec, clip)


def riesz_convolve(h, cache: HartreeCache):
    """Circular convolution |x|^(-mu) * h on the grid (real in, real out).

    Arrays map to arrays; a Field maps to a Field on the same grid.
    """
    if isinstance(h, Field):
        return Field(np.real(ifftn(cache.kernel_spectrum * fftn(h.values))), h.grid)
    return np.real(ifftn(cache.kernel_spectrum * fftn(np.asarray(h))))
