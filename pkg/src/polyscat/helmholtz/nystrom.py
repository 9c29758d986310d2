"""Nystrom boundary-integral solver for sound-soft and sound-hard polygons.

Sound-soft uses the indirect ansatz ``u_s = (D - i eta S) phi`` with
``eta = k``.  Sound-hard solves for the boundary trace of the total field with
the direct combined equation ``(1/2 - K + alpha T) u = u_i - alpha du_i/dnu``,
``alpha = i/k``, and ``u = u_i + D u`` off the boundary.  The hypersingular
operator ``T`` is applied in the regularized form
``T phi = d/ds S(d phi/ds) + k^2 nu . S(nu phi)``.
Logarithmic kernel parts on each curve use product quadrature weights.
"""
import numpy as np
from scipy import special

from ..errors import SolverError, ValidationError
from .discretization import diff_matrix, log_weight_matrix, polygon_curve, trig_resample
from .fields import EmptyField, WaveField
from . import kernels


class BoundaryMesh:
    """Concatenation of one periodic ``Curve`` per closed boundary component."""

    def __init__(self, curves):
        self.curves = list(curves)
        self.sizes = [c.n for c in self.curves]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)
        cat = lambda name: np.concatenate([getattr(c, name) for c in self.curves])
        self.x = cat("x")
        self.normal = cat("normal")
        self.speed = cat("speed")
        self.curv = cat("curv")
        self.t = cat("t")
        self.h = np.concatenate([np.full(c.n, 2 * np.pi / c.n) for c in self.curves])
        self.weights = self.h * self.speed

    @property
    def n(self):
        return int(self.offsets[-1])

    def blocks(self):
        for c, (a, b) in enumerate(zip(self.offsets[:-1], self.offsets[1:])):
            yield c, slice(a, b)

    def panel_size(self):
        return float(np.max(self.weights))

    def refined(self, factor):
        return BoundaryMesh([c.refined(c.n * factor) for c in self.curves])

    def resample(self, density, factor):
        parts = [trig_resample(density[s], c.n * factor) for (_, s), c in zip(self.blocks(), self.curves)]
        return np.concatenate(parts)


def polygon_mesh(scatterer, quad_order, grading):
    """Distribute ``quad_order`` nodes over the polygons by perimeter (64 minimum each)."""
    perims = []
    for p in scatterer.polygons:
        perims.append(float(np.sum(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1))))
    perims = np.array(perims)
    if len(perims) == 1:
        counts = [quad_order]
    else:
        counts = np.maximum(64, np.round(quad_order * perims / perims.sum()).astype(int))
    counts = [int(c) + int(c) % 2 for c in counts]
    return BoundaryMesh([polygon_curve(p, c, grading) for p, c in zip(scatterer.polygons, counts)])


def _pair_geometry(mesh):
    D = mesh.x[:, None, :] - mesh.x[None, :, :]
    r = np.hypot(D[..., 0], D[..., 1])
    np.fill_diagonal(r, 1.0)
    return D, r


def assemble(k, mesh, need_T=True):
    """Return ``(S, K, T)`` acting on nodal densities; ``T`` is None unless requested.

    ``S_tilde`` (single layer without the source Jacobian) is kept for ``T``.
    """
    n = mesh.n
    D, r = _pair_geometry(mesh)
    kr = k * r
    J0 = special.j0(kr)
    J1 = special.j1(kr)
    H0 = J0 + 1j * special.y0(kr)
    H1 = J1 + 1j * special.y1(kr)
    proj = np.einsum("ijd,jd->ij", D, mesh.normal)

    M = 0.25j * H0
    L = 0.25j * k * H1 * proj / r
    h = mesh.h[None, :]
    St = M * h
    Kt = L * h
    for _, s in mesh.blocks():
        N = s.stop - s.start
        t = mesh.t[s]
        dt = np.subtract.outer(t, t)
        with np.errstate(divide="ignore"):
            logs = np.log(4 * np.sin(dt / 2) ** 2)
        np.fill_diagonal(logs, 0.0)
        Rw = log_weight_matrix(N)
        hh = 2 * np.pi / N
        M1 = -J0[s, s] / (4 * np.pi)
        M2 = M[s, s] - M1 * logs
        diag = np.arange(N)
        M1[diag, diag] = -1 / (4 * np.pi)
        M2[diag, diag] = (0.25j - kernels.EULER_GAMMA / (2 * np.pi)
                          - np.log(k * mesh.speed[s] / 2) / (2 * np.pi))
        St[s, s] = Rw * M1 + hh * M2
        L1 = -(k / (4 * np.pi)) * J1[s, s] * proj[s, s] / r[s, s]
        L2 = L[s, s] - L1 * logs
        L1[diag, diag] = 0.0
        L2[diag, diag] = mesh.curv[s] / (4 * np.pi * mesh.speed[s] ** 2)
        Kt[s, s] = Rw * L1 + hh * L2
    S = St * mesh.speed[None, :]
    K = Kt * mesh.speed[None, :]
    T = None
    if need_T:
        Dm = np.zeros((n, n))
        for _, s in mesh.blocks():
            Dm[s, s] = diff_matrix(s.stop - s.start)
        nn = mesh.normal @ mesh.normal.T
        T = (Dm @ St @ Dm) / mesh.speed[:, None] + k ** 2 * nn * S
    return S, K, T


class NystromField(WaveField):
    """Solved field; holds the boundary mesh and density (read-only)."""

    def __init__(self, scatterer, config, j, mesh, density, cond):
        super().__init__(scatterer, config, j)
        self.mesh = mesh
        density = np.array(density, dtype=complex)
        density.setflags(write=False)
        self.density = density
        self.cond = float(cond)
        self.bc = scatterer.bc
        self.eta = self.k

    def panel_size(self):
        return self.mesh.panel_size()

    def _layer(self, x, mesh=None, density=None):
        mesh = self.mesh if mesh is None else mesh
        dens = self.density if density is None else density
        w = mesh.weights * dens
        out = np.empty(len(x), dtype=complex)
        step = max(1, 2 ** 20 // mesh.n)
        for a in range(0, len(x), step):
            xa = x[a:a + step]
            val = kernels.double_layer(self.k, xa, mesh.x, mesh.normal) @ w
            if self.bc == "soft":
                val -= 1j * self.eta * (kernels.single_layer(self.k, xa, mesh.x) @ w)
            out[a:a + step] = val
        return out

    def _layer_grad(self, x, mesh=None, density=None):
        mesh = self.mesh if mesh is None else mesh
        dens = self.density if density is None else density
        w = mesh.weights * dens
        out = np.empty((len(x), 2), dtype=complex)
        step = max(1, 2 ** 19 // mesh.n)
        for a in range(0, len(x), step):
            xa = x[a:a + step]
            G = np.einsum("nmd,m->nd", kernels.double_layer_grad_x(self.k, xa, mesh.x, mesh.normal), w)
            if self.bc == "soft":
                G -= 1j * self.eta * np.einsum("nmd,m->nd", kernels.single_layer_grad_x(self.k, xa, mesh.x), w)
            out[a:a + step] = G
        return out

    def _scattered(self, x):
        return self._layer(x)

    def _scattered_grad(self, x):
        return self._layer_grad(x)

    def _far(self, xhat):
        m = self.mesh
        phase = np.exp(-1j * self.k * (xhat @ m.x.T))
        fac = -1j * self.k * (xhat @ m.normal.T)
        if self.bc == "soft":
            fac = fac - 1j * self.eta
        return kernels.far_field_constant(self.k) * ((fac * phase) @ (m.weights * self.density))

    def bc_residual(self, per_cell=5, offsets=4, base=None):
        """Boundary-condition residual on cell midportions.

        The exterior limit is extrapolated from ``offsets`` points along the
        normal.  Near each cell the layer integral uses an upsampled density
        so the quadrature resolves the near-singular kernel; a smooth spatial
        window hands the rest of the boundary to the original nodes.  Returns
        the max of ``|du/dnu| / k`` (hard) or ``|u|`` (soft).
        """
        cells = self.scatterer.cells
        if base is None:
            base = 0.0025 * min(1.0, min(c.length for c in cells))
        steps = base * np.arange(1, offsets + 1)
        h = self.mesh.panel_size()
        factor = int(np.ceil(8 * h / base))
        fine = self.mesh.refined(factor)
        fine_dens = self.mesh.resample(self.density, factor)
        s = np.linspace(0.25, 0.75, per_cell)
        worst = 0.0
        for c in cells:
            P = c.a[None, :] + s[:, None] * (c.b - c.a)[None, :]
            X = (P[:, None, :] + steps[None, :, None] * c.normal[None, None, :]).reshape(-1, 2)
            # the original nodes stay at least 16 spacings away from every probe
            r0 = 0.25 * c.length + steps[-1] + 16 * h
            chi_f = _smooth_window(np.linalg.norm(fine.x - c.midpoint, axis=1), r0, r0 + 16 * h)
            chi_c = _smooth_window(np.linalg.norm(self.mesh.x - c.midpoint, axis=1), r0, r0 + 16 * h)
            sel = chi_f > 0
            near = _Nodes(fine.x[sel], fine.normal[sel], fine.weights[sel] * chi_f[sel])
            rest = _Nodes(self.mesh.x, self.mesh.normal, self.mesh.weights * (1 - chi_c))
            if self.bc == "hard":
                g = (self.incident.grad(X) + self._layer_grad(X, near, fine_dens[sel])
                     + self._layer_grad(X, rest, self.density))
                vals = (g @ c.normal).reshape(per_cell, offsets) / self.k
            else:
                vals = (self.incident(X) + self._layer(X, near, fine_dens[sel])
                        + self._layer(X, rest, self.density)).reshape(per_cell, offsets)
            V = np.vander(steps, offsets)
            coef = np.linalg.solve(V, vals.T)
            worst = max(worst, float(np.max(np.abs(coef[-1]))))
        return worst


class _Nodes:
    """Bare quadrature nodes with weights; enough for layer evaluation."""

    def __init__(self, x, normal, weights):
        self.x, self.normal, self.weights = x, normal, weights

    @property
    def n(self):
        return max(1, len(self.x))


def _smooth_window(r, r0, r1):
    """C-infinity step: 1 for ``r <= r0``, 0 for ``r >= r1``."""
    t = np.clip((np.asarray(r, dtype=float) - r0) / (r1 - r0), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        b = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return a / (a + b)


def solve(s, cfg, j=0, check_cond=True):
    """Solve the exterior problem for scatterer ``s`` and incident direction ``j``."""
    if s.is_empty:
        return EmptyField(s, cfg, j)
    for p in s.polygons:
        if len(p) < 3:
            raise ValidationError("polygon with fewer than 3 vertices", field="polygons")
    k = cfg.k
    mesh = polygon_mesh(s, cfg.quad_order, cfg.grading)
    inc = PlaneWaveTrace(cfg, j, mesh)
    if s.bc == "soft":
        S, K, _ = assemble(k, mesh, need_T=False)
        A = 0.5 * np.eye(mesh.n) + K - 1j * k * S
        rhs = -inc.values
    else:
        S, K, T = assemble(k, mesh, need_T=True)
        alpha = 1j / k
        A = 0.5 * np.eye(mesh.n) - K + alpha * T
        rhs = inc.values - alpha * inc.normal_derivative
    # row equilibration removes the 1/spacing scaling of the graded hypersingular rows
    scale = 1.0 / np.max(np.abs(A), axis=1)
    A = A * scale[:, None]
    rhs = rhs * scale
    cond = np.linalg.cond(A)
    limit = cfg.tolerances["cond"]
    if check_cond and (not np.isfinite(cond) or cond > limit):
        raise SolverError(
            f"system condition number {cond:.3e} exceeds {limit:.1e}: suspect a spurious "
            f"resonance near k={k} or an under-resolved corner mesh (quad_order={cfg.quad_order})")
    density = np.linalg.solve(A, rhs)
    return NystromField(s, cfg, j, mesh, density, cond)


class PlaneWaveTrace:
    def __init__(self, cfg, j, mesh):
        v = cfg.direction(j)
        self.values = np.exp(1j * cfg.k * (mesh.x @ v))
        self.normal_derivative = 1j * cfg.k * (mesh.normal @ v) * self.values
