"""Independent reference solutions: separable disc series and the method of
fundamental solutions (MFS).  Used to validate the Nystrom solver."""
import numpy as np
from scipy import special

from ..errors import ParameterError, SolverError
from ..scene import Scatterer2D
from .fields import WaveField
from . import kernels


def _disc_polygon(a, n=64):
    th = 2 * np.pi * np.arange(n) / n
    return a * np.column_stack([np.cos(th), np.sin(th)])


class DiscSeriesField(WaveField):
    """Exact scattering by a disc of radius ``a`` centred at the origin.

    ``u_s = sum_n c_n H_n(k r) exp(i n (theta - theta_v))`` with
    ``c_n = -i^n J_n(ka)/H_n(ka)`` (soft) or ``-i^n J_n'(ka)/H_n'(ka)`` (hard).
    Terms are kept until both ``|c_n|`` and the mode's boundary data fall below
    ``1e-14`` unless ``n_terms`` is given.
    """

    def __init__(self, a, config, bc="hard", j=0, n_terms=None):
        if a <= 0:
            raise ParameterError("disc radius must be positive")
        if bc not in ("hard", "soft"):
            raise ParameterError(f"unknown boundary condition {bc!r}")
        # the 1024-gon is only used for domain checks; the field itself is exact
        s = Scatterer2D([_disc_polygon(a, 1024)], bc=bc)
        super().__init__(s, config, j)
        self.a = float(a)
        self.bc = bc
        ka = self.k * a
        if n_terms is None:
            n_terms = 0
            while n_terms < 10000:
                if max(abs(self._coef(n_terms + 1, ka)), self._trace(n_terms + 1, ka)) < 1e-14:
                    break
                n_terms += 1
        self.n_terms = int(n_terms)
        self.orders = np.arange(-self.n_terms, self.n_terms + 1)
        self.coefs = np.array([self._coef(n, ka) for n in self.orders])
        self.theta_v = float(np.arctan2(self.direction[1], self.direction[0]))

    def _trace(self, n, ka):
        # size of mode n in the boundary data; stopping on |c_n| alone leaves it behind
        return abs(special.jv(n, ka) if self.bc == "soft" else special.jvp(n, ka))

    def _coef(self, n, ka):
        if self.bc == "soft":
            return -(1j ** n) * special.jv(n, ka) / special.hankel1(n, ka)
        return -(1j ** n) * special.jvp(n, ka) / special.h1vp(n, ka)

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if np.any(np.hypot(x[:, 0], x[:, 1]) < self.a * (1 - 1e-12)):
            from ..errors import DomainError
            raise DomainError("point inside the disc")
        return x, single

    def near_boundary(self, x):
        return np.zeros(len(np.atleast_2d(x)), dtype=bool)

    def _polar(self, x):
        r = np.hypot(x[:, 0], x[:, 1])
        psi = np.arctan2(x[:, 1], x[:, 0]) - self.theta_v
        return r, psi

    def _scattered(self, x):
        r, psi = self._polar(x)
        n = self.orders
        H = special.hankel1(n[None, :], self.k * r[:, None])
        return (H * np.exp(1j * np.outer(psi, n))) @ self.coefs

    def _scattered_grad(self, x):
        r, psi = self._polar(x)
        n = self.orders
        kr = self.k * r[:, None]
        E = np.exp(1j * np.outer(psi, n))
        ur = (self.k * special.h1vp(n[None, :], kr) * E) @ self.coefs
        ut = ((1j * n[None, :]) * special.hankel1(n[None, :], kr) * E) @ self.coefs / r
        th = psi + self.theta_v
        c, s = np.cos(th), np.sin(th)
        return np.column_stack([ur * c - ut * s, ur * s + ut * c])

    def _far(self, xhat):
        psi = np.arctan2(xhat[:, 1], xhat[:, 0]) - self.theta_v
        n = self.orders
        pref = np.sqrt(2 / (np.pi * self.k)) * np.exp(-1j * np.pi / 4)
        return pref * (np.exp(1j * np.outer(psi, n)) @ (self.coefs * (-1j) ** n))

    def bc_residual(self, n_theta=256):
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        P = self.a * np.column_stack([np.cos(th), np.sin(th)])
        if self.bc == "soft":
            return float(np.max(np.abs(self.incident(P) + self._scattered(P))))
        g = self.incident.grad(P) + self._scattered_grad(P)
        nu = P / self.a
        return float(np.max(np.abs(np.sum(g * nu, axis=1)))) / self.k


def disc_series(a, cfg, bc="hard", j=0, n_terms=None):
    return DiscSeriesField(a, cfg, bc=bc, j=j, n_terms=n_terms)


class MFSField(WaveField):
    """``u_s = sum_m c_m Phi(x, y_m) + sum_l d_l dPhi(x, z_l)/dn_l`` with all
    charge points inside the scatterer.  Dipoles sit on the corner clusters."""

    def __init__(self, scatterer, config, j, sources, charges, dipoles, dipole_dirs,
                 dipole_strengths, residual, cond):
        super().__init__(scatterer, config, j)
        self.sources = sources
        self.dipoles = dipoles
        self.dipole_dirs = dipole_dirs
        c = np.array(charges, dtype=complex)
        d = np.array(dipole_strengths, dtype=complex)
        c.setflags(write=False)
        d.setflags(write=False)
        self.charges = c
        self.dipole_strengths = d
        self.residual = float(residual)
        self.cond = float(cond)
        self._panel = float(np.min(scatterer.distance(np.vstack([sources, dipoles]))))

    def panel_size(self):
        return self._panel

    def _scattered(self, x):
        out = kernels.single_layer(self.k, x, self.sources) @ self.charges
        if len(self.dipoles):
            out = out + kernels.double_layer(self.k, x, self.dipoles, self.dipole_dirs) @ self.dipole_strengths
        return out

    def _scattered_grad(self, x):
        g = np.einsum("nmd,m->nd", kernels.single_layer_grad_x(self.k, x, self.sources), self.charges)
        if len(self.dipoles):
            g = g + np.einsum("nmd,m->nd", kernels.double_layer_grad_x(self.k, x, self.dipoles, self.dipole_dirs),
                              self.dipole_strengths)
        return g

    def _far(self, xhat):
        k = self.k
        val = np.exp(-1j * k * xhat @ self.sources.T) @ self.charges
        if len(self.dipoles):
            fac = -1j * k * (xhat @ self.dipole_dirs.T)
            val = val + (fac * np.exp(-1j * k * xhat @ self.dipoles.T)) @ self.dipole_strengths
        return kernels.far_field_constant(k) * val

    def bc_residual(self):
        return self.residual


def _tapered(n, sigma=4.0):
    """Exponentially clustered fractions in (0, 1], densest near 0."""
    j = np.arange(1, n + 1)
    return np.exp(-sigma * (np.sqrt(n) - np.sqrt(j)))


def _corner_weights(poly):
    """Per-vertex clustering factor in [0, 1] from the turning angle."""
    V = np.asarray(poly, dtype=float)
    d = np.roll(V, -1, axis=0) - V
    ang = np.arctan2(d[:, 1], d[:, 0])
    turn = np.abs((ang - np.roll(ang, 1) + np.pi) % (2 * np.pi) - np.pi)
    return np.minimum(1.0, np.sqrt(turn / (np.pi / 2)))


def _corner_distances(poly, n_corner):
    """Distances of the clustered charges from each vertex (empty if none)."""
    V = np.asarray(poly, dtype=float)
    ell = np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1)
    fac = _corner_weights(V)
    out = []
    for i in range(len(V)):
        m = int(round(n_corner * fac[i]))
        reach = 0.5 * min(ell[i - 1], ell[i])
        out.append(reach * _tapered(max(m, 4)) if m >= 1 and fac[i] > 1e-6 else np.zeros(0))
    return out


def _mfs_charges(poly, n_corner, n_smooth, shrink):
    """Returns (smooth monopoles, corner points, dipole directions)."""
    V = np.asarray(poly, dtype=float)
    A, B = V, np.roll(V, -1, axis=0)
    d = B - A
    ell = np.linalg.norm(d, axis=1)
    nu = np.column_stack([d[:, 1], -d[:, 0]]) / ell[:, None]
    pts, dirs = [], []
    for i, dist in enumerate(_corner_distances(V, n_corner)):
        if not len(dist):
            continue  # straight angle, no corner singularity
        inward = -(nu[i - 1] + nu[i])
        inward /= np.linalg.norm(inward)
        pts.append(V[i] + dist[:, None] * inward)
        dirs.append(np.repeat([[-inward[1], inward[0]]], len(dist), axis=0))
    c = V.mean(axis=0)
    th = (np.arange(n_smooth) + 0.5) / n_smooth * len(V)
    e = np.floor(th).astype(int) % len(V)
    f = th - np.floor(th)
    ring = c + shrink * (A[e] + f[:, None] * d[e] - c)
    if not pts:
        return ring, np.zeros((0, 2)), np.zeros((0, 2))
    return ring, np.vstack(pts), np.vstack(dirs)


def _log_refine(dist, per):
    """``per`` log-spaced points per interval of the sorted distances."""
    if not len(dist):
        return dist
    ld = np.log(np.sort(dist))
    ld = np.concatenate([[ld[0] - (ld[1] - ld[0] if len(ld) > 1 else 1.0)], ld])
    t = (np.arange(per) + 0.5) / per
    return np.exp((ld[:-1, None] + t[None, :] * np.diff(ld)[:, None]).ravel())


def _mfs_collocation(poly, n_corner, n_uniform, per=3):
    """Boundary points clustered at each vertex like the corner charges,
    with interval-length weights for a discrete L2 boundary norm."""
    V = np.asarray(poly, dtype=float)
    A, B = V, np.roll(V, -1, axis=0)
    ell = np.linalg.norm(B - A, axis=1)
    dists = _corner_distances(V, n_corner)
    X, N, W = [], [], []
    for i in range(len(V)):
        j = (i + 1) % len(V)
        near_a = _log_refine(dists[i], per) / ell[i]
        near_b = 1 - _log_refine(dists[j], per) / ell[i]
        frac = np.concatenate([near_a, near_b, np.linspace(0, 1, n_uniform + 2)[1:-1]])
        frac = np.unique(frac[(frac > 0) & (frac < 1)])
        d = B[i] - A[i]
        nu = np.array([d[1], -d[0]]) / ell[i]
        X.append(A[i] + frac[:, None] * d)
        N.append(np.repeat(nu[None, :], len(frac), axis=0))
        edges = np.concatenate([[0.0], (frac[1:] + frac[:-1]) / 2, [1.0]])
        W.append(np.diff(edges) * ell[i])
    return np.vstack(X), np.vstack(N), np.concatenate(W)


def mfs_solve(s, cfg, j=0, n_corner=40, n_smooth=None, shrink=0.5, n_uniform=None, rcond=1e-13):
    """Least-squares MFS with charge points strictly inside each polygon.

    Monopoles sit on a shrunken copy of each boundary.  Near every vertex,
    monopoles and dipoles cluster exponentially toward the corner along the
    inward bisector; dipoles are needed because the Neumann corner modes jump
    across that bisector.  Collocation clusters toward vertices the same way.
    The relative boundary residual of the fit is stored on the result.
    Raises ``SolverError`` if charges leave the scatterer or the fit is
    numerically rank deficient.
    """
    if s.is_empty:
        from .fields import EmptyField
        return EmptyField(s, cfg, j)
    k = cfg.k
    v = cfg.direction(j)
    ring, corner, cdir = [], [], []
    for poly in s.polygons:
        ns = n_smooth or max(32, 2 * len(poly))
        r, c, dd = _mfs_charges(poly, n_corner, ns, shrink)
        ring.append(r)
        corner.append(c)
        cdir.append(dd)
    corner = np.vstack(corner)
    cdir = np.vstack(cdir)
    Y = np.vstack(ring + [corner])
    if np.any(~s.contains(Y)):
        raise SolverError("MFS charge points fell outside the scatterer")
    rows, rhs = [], []
    for poly in s.polygons:
        nu_ = n_uniform or max(8, 3 * (n_smooth or max(32, 2 * len(poly))) // len(poly))
        X, N, W = _mfs_collocation(poly, n_corner, nu_)
        ui = np.exp(1j * k * (X @ v))
        if s.bc == "soft":
            A = np.hstack([kernels.single_layer(k, X, Y), kernels.double_layer(k, X, corner, cdir)])
            b = -ui
        else:
            G = np.concatenate([kernels.single_layer_grad_x(k, X, Y),
                                kernels.double_layer_grad_x(k, X, corner, cdir)], axis=1)
            A = np.einsum("nmd,nd->nm", G, N)
            b = -1j * k * (N @ v) * ui
        w = np.sqrt(W)
        rows.append(A * w[:, None])
        rhs.append(b * w)
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    colscale = 1.0 / np.linalg.norm(A, axis=0)
    U, sv, Vh = np.linalg.svd(A * colscale[None, :], full_matrices=False)
    keep = sv > rcond * sv[0]
    if keep.sum() < 0.25 * len(sv):
        raise SolverError(f"MFS fit is rank deficient ({int(keep.sum())}/{len(sv)} singular values kept)")
    coef = Vh[keep].conj().T @ ((U[:, keep].conj().T @ b) / sv[keep]) * colscale
    res = np.linalg.norm(A @ coef - b) / np.linalg.norm(b)
    nm = len(Y)
    return MFSField(s, cfg, j, Y, coef[:nm], corner, cdir, coef[nm:], res, sv[0] / sv[keep][-1])
