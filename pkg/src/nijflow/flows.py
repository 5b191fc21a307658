"""Phase-space model of T*(G/K), geodesic flows, moment maps, Poisson pencil
brackets, integral families, and the numerical conservation certificates.

Model: T*(G/K) is realized as pairs (g, p) with g in the matrix group and p
the momentum in m = kperp coordinates (m identified with m* through -Killing).
Functions extend K-invariantly to G x g; canonical brackets of such extensions
restricted to the constraint reproduce the reduced brackets. The second
Poisson structure is the pushforward of the canonical one under the fiberwise
map p -> n* p (the transpose of the invariant operator acting on covectors),
so its bracket is evaluated by the chain rule below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import rational as ra
from .cases import HomogeneousCase
from .liealg import LieAlgebra

__all__ = [
    "PhasePoint", "TrajectoryReport", "TrajectoryResult", "FunctionDescriptor",
    "EvalPoint", "MomentComponent", "PencilCasimir", "ShiftInvariant",
    "QuadraticHamiltonian", "RawMomentumCoordinate", "get_geometry",
    "random_phase_points", "hamiltonian", "hamiltonian_descriptor",
    "hamiltonian_field_from_bracket", "flow_field", "integrate", "mu_can",
    "mu_lambda", "nu_component", "poisson_bracket", "build_family",
    "involution_matrix", "independence_rank", "pencil_rank_probe",
    "conservation_report", "default_probe_family", "gradient_check",
    "jacobi_residual_fd", "unitarity_defect",
]


# ---------------------------------------------------------------------------
# geometry cache
# ---------------------------------------------------------------------------

class CaseGeometry:
    """Float-precision caches for one homogeneous case."""

    def __init__(self, case: HomogeneousCase):
        self.case = case
        g = case.g
        self.d = g.dim
        self.dm = case.dim_m
        self.dk1 = case.k1.dim
        self.lam1 = float(case.lambda1)
        self.lam2 = float(case.lambda2)
        self.c = g.structure_tensor()
        self.Mg = np.array([M.to_complex() for M in g.basis_matrices])
        self.N = self.Mg.shape[1]
        self.gram_g = -case.killing.to_float()
        self.Bm = case.kperp.to_float()                     # d x dm
        self.Bk = case.k.to_float()                         # d x dk
        self.gram_m = ra.to_float_matrix(case.gram_m())
        self.gram_m_inv = np.linalg.inv(self.gram_m)
        # orthogonal projections in coordinates
        self.Pm = self.gram_m_inv @ self.Bm.T @ self.gram_g        # g-coords -> m-coords
        gram_k = self.Bk.T @ self.gram_g @ self.Bk
        self.Pk = np.linalg.inv(gram_k) @ self.Bk.T @ self.gram_g  # g-coords -> k-coords
        self.Mm = np.einsum("ic,inm->cnm", self.Bm, self.Mg)       # m-basis matrices
        # eigenprojections (adapted basis) and adjoints
        pr1 = np.zeros((self.dm, self.dm))
        pr1[:self.dk1, :self.dk1] = np.eye(self.dk1)
        self.pr1 = pr1
        self.pr2 = np.eye(self.dm) - pr1
        self.pr1s = self.madj(self.pr1)
        self.pr2s = self.madj(self.pr2)
        self.n_op = self.lam1 * self.pr1 + self.lam2 * self.pr2
        self.n_star = self.madj(self.n_op)
        self.n_star_inv = np.linalg.inv(self.n_star)
        self.I_op = ra.to_float_matrix([list(r) for r in case.inertia_matrix])
        # trace-form constant: Killing = crep * tr, so <x,y> = -crep * Re tr(XY)
        k00 = float(case.killing.gram[0][0])
        t00 = np.trace(self.Mg[0] @ self.Mg[0]).real
        self.crep = k00 / t00
        Tg = np.einsum("anm,bmn->ab", self.Mg, self.Mg).real
        self.trace_gram_inv = np.linalg.inv(Tg)
        # defining-representation data for invariants
        if case.family == "A":
            self.invariants = [("tr", dg) for dg in range(2, 2 * case.n + 1)]
            self.J = None
        else:
            N1 = case.n + 1
            J = np.zeros((2 * N1, 2 * N1))
            J[:N1, N1:] = np.eye(N1)
            J[N1:, :N1] = np.eye(N1)
            self.J = J
            self.invariants = [("tr", dg) for dg in range(2, 2 * case.n + 1, 2)]
            self.invariants.insert(1, ("pf", case.n + 1))

    # -- basic maps ---------------------------------------------------------

    def madj(self, A: np.ndarray) -> np.ndarray:
        """<,>_m adjoint of an operator on m-coordinates."""
        return self.gram_m_inv @ A.T @ self.gram_m

    def rep_m(self, p: np.ndarray) -> np.ndarray:
        return np.einsum("c,cnm->nm", p, self.Mm)

    def rep_g(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("c,cnm->nm", x, self.Mg)

    def expand_g(self, M: np.ndarray) -> np.ndarray:
        t = np.einsum("anm,mn->a", self.Mg, M).real
        return self.trace_gram_inv @ t

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.c)

    def pair(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.gram_g @ y)

    def embed_m(self, p: np.ndarray) -> np.ndarray:
        return self.Bm @ p

    def fiber_resolvent(self, lam: float) -> np.ndarray:
        """((n - lam)^*)^{-1} on m-coordinates (the fiber map of psi(lam))."""
        if abs(lam - self.lam1) < 1e-14 or abs(lam - self.lam2) < 1e-14:
            raise ValueError("lambda equals an eigenvalue of the operator")
        return np.linalg.inv(self.madj(self.n_op - lam * np.eye(self.dm)))

    def invariant_value_and_diff(self, kind: str, deg: int, Y: np.ndarray):
        """Invariant f(Y) and the matrix D with df = tr(D dY) (complex; callers
        take the real or imaginary part as flagged).

        Traces: real part for even degree, imaginary for odd. Pfaffian:
        Im Pf(JY), with the chain rule through B = J Y folded into D.
        """
        if kind == "tr":
            powers = np.linalg.matrix_power(Y, deg - 1)
            val_c = np.trace(powers @ Y)
            D = deg * powers
            if deg % 2 == 0:
                return val_c.real, D, "re"
            return val_c.imag, D, "im"
        val_c, grad = pfaffian_with_grad(self.J @ Y)
        # dPf = sum grad[r,s] (J dY)[r,s] = tr((J^T grad)^T dY)
        D = (self.J.T @ grad).T
        return val_c.imag, D, "im"


_GEOMETRY_KEY = "flow_geometry"


def get_geometry(case: HomogeneousCase) -> CaseGeometry:
    if _GEOMETRY_KEY not in case._cache:
        case._cache[_GEOMETRY_KEY] = CaseGeometry(case)
    return case._cache[_GEOMETRY_KEY]


def pfaffian_with_grad(B: np.ndarray) -> tuple[complex, np.ndarray]:
    """Pfaffian of an antisymmetric matrix and its gradient on the entries the
    expansion reads (strict upper part), by reverse accumulation over the
    first-row expansion."""
    n = B.shape[0]
    memo: dict[tuple, complex] = {}

    def pf(idx: tuple) -> complex:
        if not idx:
            return 1.0 + 0j
        if idx in memo:
            return memo[idx]
        i0 = idx[0]
        tot = 0j
        for pos in range(1, len(idx)):
            rest = idx[1:pos] + idx[pos + 1:]
            tot += (-1) ** (pos + 1) * B[i0, idx[pos]] * pf(rest)
        memo[idx] = tot
        return tot

    full = tuple(range(n))
    val = pf(full)
    grad = np.zeros_like(B)
    adj: dict[tuple, complex] = {full: 1.0 + 0j}
    for idx in sorted(memo.keys(), key=len, reverse=True):
        w = adj.get(idx, 0j)
        if w == 0:
            continue
        i0 = idx[0]
        for pos in range(1, len(idx)):
            j = idx[pos]
            sign = (-1) ** (pos + 1)
            rest = idx[1:pos] + idx[pos + 1:]
            grad[i0, j] += w * sign * pf(rest)
            adj[rest] = adj.get(rest, 0j) + w * sign * B[i0, j]
    return val, grad


# ---------------------------------------------------------------------------
# phase points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """Group element (matrix) and momentum in the kperp basis."""

    g: np.ndarray
    p: np.ndarray

    def validate(self, tol: float = 1e-10) -> float:
        drift = unitarity_defect(self.g)
        if not np.all(np.isfinite(self.p)):
            raise ValueError("momentum is not finite")
        if drift > tol:
            raise ValueError(f"group element off the group by {drift:.2e}")
        return drift


def unitarity_defect(g: np.ndarray) -> float:
    return float(np.abs(g.conj().T @ g - np.eye(g.shape[0])).max())


def random_phase_points(case: HomogeneousCase, count: int, seed: int = 42,
                        spread: float = 0.7) -> list[PhasePoint]:
    geom = get_geometry(case)
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        x = rng.standard_normal(geom.d) * spread / math.sqrt(geom.d)
        g = scipy.linalg.expm(geom.rep_g(x))
        p = rng.standard_normal(geom.dm)
        p /= math.sqrt(abs(p @ geom.gram_m @ p)) / math.sqrt(geom.dm)
        pts.append(PhasePoint(g=g, p=p))
    return pts


class EvalPoint:
    """Per-point cache shared by all descriptors."""

    def __init__(self, geom: CaseGeometry, pt: PhasePoint):
        self.geom = geom
        self.g = pt.g
        self.p = np.asarray(pt.p, dtype=float)
        self.gH = pt.g.conj().T
        self.Phat = geom.rep_m(self.p)
        self.Mu = self.g @ self.Phat @ self.gH

    def transported(self, X: np.ndarray) -> np.ndarray:
        """g^H X g (conjugate a fixed matrix into the body frame)."""
        return self.gH @ X @ self.g


# ---------------------------------------------------------------------------
# function descriptors
# ---------------------------------------------------------------------------

class FunctionDescriptor:
    """A phase-space function with analytic value and raw partial derivatives.

    partials() returns (dp, dg): dp[i] = dF/dp_i (kperp coordinates) and
    dg[a] = d/dt F(g exp(t e_a), p) at t = 0 (left logarithmic directions).
    """

    name: str = "F"
    kind: str = "generic"
    scale: float = 1.0

    def value(self, ep: EvalPoint) -> float:
        raise NotImplementedError

    def partials(self, ep: EvalPoint) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError


class PencilCasimir(FunctionDescriptor):
    """f(((n - lam)^*)^{-1} p) for an invariant polynomial f; lam=None means
    the lam -> infinity member f(p) (the mu_can pullback)."""

    kind = "pencil_casimir"

    def __init__(self, geom: CaseGeometry, inv: tuple[str, int], lam: float | None):
        self.geom = geom
        self.inv = inv
        self.lam = lam
        self.S = geom.fiber_resolvent(lam) if lam is not None else np.eye(geom.dm)
        self.SMm = np.einsum("ci,cnm->inm", self.S, geom.Mm)
        tag = "inf" if lam is None else f"{lam:g}"
        self.name = f"B[{inv[0]}{inv[1]}|lam={tag}]"

    def value(self, ep: EvalPoint) -> float:
        Y = np.einsum("c,cnm->nm", self.S @ ep.p, self.geom.Mm)
        val, _, _ = self.geom.invariant_value_and_diff(*self.inv, Y)
        return self.scale * val

    def partials(self, ep: EvalPoint):
        Y = np.einsum("c,cnm->nm", self.S @ ep.p, self.geom.Mm)
        _, D, part = self.geom.invariant_value_and_diff(*self.inv, Y)
        raw = np.einsum("ts,ist->i", D, self.SMm)  # tr(D dY/dp_i)
        dp = raw.real if part == "re" else raw.imag
        return self.scale * dp, np.zeros(self.geom.d)


class ShiftInvariant(FunctionDescriptor):
    """Coefficient of t^j in f(mu_can + t a) for an invariant polynomial f."""

    kind = "shift"

    def __init__(self, geom: CaseGeometry, inv: tuple[str, int], j: int,
                 a_mat: np.ndarray):
        self.geom = geom
        self.inv = inv
        self.j = j
        self.a_mat = a_mat
        deg = inv[1]
        nodes = np.arange(deg + 1) - deg // 2
        V = np.vander(nodes.astype(float), increasing=True)
        self.nodes = nodes
        self.wj = np.linalg.inv(V)[j]    # value = wj . f(mu + node_t a)
        self.name = f"A[{inv[0]}{inv[1]}|t^{j}]"

    def _eval_nodes(self, ep: EvalPoint, want_partials: bool):
        geom = self.geom
        vals = np.zeros(len(self.nodes))
        dps = dgs = None
        if want_partials:
            dps = np.zeros((len(self.nodes), geom.dm))
            dgs = np.zeros((len(self.nodes), geom.d))
        for t_idx, t in enumerate(self.nodes):
            Y = ep.Mu + float(t) * self.a_mat
            val, D, part = geom.invariant_value_and_diff(*self.inv, Y)
            vals[t_idx] = val
            if want_partials:
                E = ep.transported(D)  # df = tr(E dY_body)
                raw_p = np.einsum("ts,ist->i", E, geom.Mm)
                # body-frame dY along e_a is [Mg_a, Phat]
                WP = ep.Phat @ E - E @ ep.Phat
                raw_g = np.einsum("ts,ast->a", WP, geom.Mg)
                if part == "re":
                    dps[t_idx] = raw_p.real
                    dgs[t_idx] = raw_g.real
                else:
                    dps[t_idx] = raw_p.imag
                    dgs[t_idx] = raw_g.imag
        return vals, dps, dgs

    def value(self, ep: EvalPoint) -> float:
        vals, _, _ = self._eval_nodes(ep, want_partials=False)
        return self.scale * float(self.wj @ vals)

    def partials(self, ep: EvalPoint):
        _, dps, dgs = self._eval_nodes(ep, want_partials=True)
        return self.scale * (self.wj @ dps), self.scale * (self.wj @ dgs)


class MomentComponent(FunctionDescriptor):
    """<Ad_g Q p, xi> for a fixed operator Q on m and direction xi in g."""

    kind = "mu_component"

    def __init__(self, geom: CaseGeometry, xi: np.ndarray, Q: np.ndarray | None = None,
                 name: str = "mu"):
        self.geom = geom
        self.xi_mat = geom.rep_g(np.asarray(xi, dtype=float))
        self.Q = Q if Q is not None else np.eye(geom.dm)
        self.QMm = np.einsum("ci,cnm->inm", self.Q, geom.Mm)
        self.name = name

    def value(self, ep: EvalPoint) -> float:
        geom = self.geom
        Qp = geom.rep_m(self.Q @ ep.p)
        return self.scale * (-geom.crep) * np.trace(ep.g @ Qp @ ep.gH @ self.xi_mat).real

    def partials(self, ep: EvalPoint):
        geom = self.geom
        E = ep.transported(self.xi_mat)
        dp = -geom.crep * np.einsum("inm,mn->i", self.QMm, E).real
        Qp = geom.rep_m(self.Q @ ep.p)
        W = Qp @ E - E @ Qp
        dg = -geom.crep * np.einsum("anm,mn->a", geom.Mg, W).real
        return self.scale * dp, self.scale * dg


class QuadraticHamiltonian(FunctionDescriptor):
    """(1/2) <A p, p> on momenta (A symmetric w.r.t. the restricted form)."""

    kind = "quadratic"

    def __init__(self, geom: CaseGeometry, A: np.ndarray, name: str):
        self.geom = geom
        self.A = A
        self.GA = geom.gram_m @ A
        self.name = name

    def value(self, ep: EvalPoint) -> float:
        return self.scale * 0.5 * float(ep.p @ self.GA @ ep.p)

    def partials(self, ep: EvalPoint):
        dp = 0.5 * (self.GA + self.GA.T) @ ep.p
        return self.scale * dp, np.zeros(self.geom.d)


class RawMomentumCoordinate(FunctionDescriptor):
    """p_i itself: not K-invariant, used as the negative control."""

    kind = "raw_coordinate"

    def __init__(self, geom: CaseGeometry, i: int):
        self.geom = geom
        self.i = i
        self.name = f"raw[p_{i}]"

    def value(self, ep: EvalPoint) -> float:
        return float(ep.p[self.i])

    def partials(self, ep: EvalPoint):
        dp = np.zeros(self.geom.dm)
        dp[self.i] = 1.0
        return dp, np.zeros(self.geom.d)


def gradient_check(geom: CaseGeometry, F: FunctionDescriptor, pt: PhasePoint,
                   eps: float = 1e-6) -> float:
    """Max relative error of the analytic partials against central differences."""
    ep = EvalPoint(geom, pt)
    dp, dg = F.partials(ep)
    num_dp = np.zeros(geom.dm)
    for i in range(geom.dm):
        e = np.zeros(geom.dm)
        e[i] = eps
        num_dp[i] = (F.value(EvalPoint(geom, PhasePoint(pt.g, pt.p + e)))
                     - F.value(EvalPoint(geom, PhasePoint(pt.g, pt.p - e)))) / (2 * eps)
    num_dg = np.zeros(geom.d)
    for a in range(geom.d):
        step = scipy.linalg.expm(eps * geom.Mg[a])
        stepm = scipy.linalg.expm(-eps * geom.Mg[a])
        num_dg[a] = (F.value(EvalPoint(geom, PhasePoint(pt.g @ step, pt.p)))
                     - F.value(EvalPoint(geom, PhasePoint(pt.g @ stepm, pt.p)))) / (2 * eps)
    scale = max(np.abs(dp).max(), np.abs(dg).max(), 1e-8)
    err = max(np.abs(dp - num_dp).max(), np.abs(dg - num_dg).max())
    return err / scale


# ---------------------------------------------------------------------------
# brackets
# ---------------------------------------------------------------------------

def _bracket_from_partials(geom: CaseGeometry, Fd, Hd, p: np.ndarray,
                           t: tuple[float, float]) -> float:
    """Pencil bracket t1 * canonical + t2 * pushforward at momentum p (m-coords)."""
    (Fdp, Fdg), (Hdp, Hdg) = Fd, Hd
    t1, t2 = t
    out = 0.0
    XFm = geom.gram_m_inv @ Fdp
    XHm = geom.gram_m_inv @ Hdp
    if t1:
        XF = geom.Bm @ XFm
        XH = geom.Bm @ XHm
        pg = geom.Bm @ p
        out += t1 * (Fdg @ XH - Hdg @ XF - geom.pair(pg, geom.bracket(XF, XH)))
    if t2:
        AXF = geom.Bm @ (geom.n_op @ XFm)
        AXH = geom.Bm @ (geom.n_op @ XHm)
        qg = geom.Bm @ (geom.n_star_inv @ p)
        out += t2 * (Fdg @ AXH - Hdg @ AXF - geom.pair(qg, geom.bracket(AXF, AXH)))
    return out


def poisson_bracket(case: HomogeneousCase, F: FunctionDescriptor,
                    H: FunctionDescriptor, x: PhasePoint,
                    t: tuple[float, float] = (1.0, 0.0)) -> float:
    """Pencil bracket t1 * {,}_can + t2 * {,}_Pi1 of two descriptors at x."""
    geom = get_geometry(case)
    ep = EvalPoint(geom, x)
    return _bracket_from_partials(geom, F.partials(ep), H.partials(ep), ep.p, t)


def jacobi_residual_fd(case: HomogeneousCase, F, G, H, x: PhasePoint,
                       t: tuple[float, float] = (1.0, 0.0), eps: float = 1e-5) -> float:
    """Cyclic Jacobi sum for the pencil bracket, with the outer derivative taken
    by central finite differences of the inner (analytic-gradient) bracket."""
    geom = get_geometry(case)

    def mk_bracket_fn(A, B):
        def fn(pt: PhasePoint) -> float:
            epl = EvalPoint(geom, pt)
            return _bracket_from_partials(geom, A.partials(epl), B.partials(epl), epl.p, t)
        return fn

    def fd_partials(fn, pt: PhasePoint):
        dp = np.zeros(geom.dm)
        for i in range(geom.dm):
            e = np.zeros(geom.dm)
            e[i] = eps
            dp[i] = (fn(PhasePoint(pt.g, pt.p + e)) - fn(PhasePoint(pt.g, pt.p - e))) / (2 * eps)
        dg = np.zeros(geom.d)
        for a in range(geom.d):
            step = scipy.linalg.expm(eps * geom.Mg[a])
            stepm = scipy.linalg.expm(-eps * geom.Mg[a])
            dg[a] = (fn(PhasePoint(pt.g @ step, pt.p)) - fn(PhasePoint(pt.g @ stepm, pt.p))) / (2 * eps)
        return dp, dg

    ep = EvalPoint(geom, x)
    total = 0.0
    for A, B, C in ((F, G, H), (G, H, F), (H, F, G)):
        inner = mk_bracket_fn(B, C)
        total += _bracket_from_partials(geom, A.partials(ep), fd_partials(inner, x), ep.p, t)
    return abs(total)


# ---------------------------------------------------------------------------
# flow operations
# ---------------------------------------------------------------------------

def hamiltonian(case: HomogeneousCase, kind: str, x: PhasePoint) -> float:
    """Energy of the normal or inertia geodesic flow at a phase point.

    normal: (1/2) <p, p>. inertia: (1/2) <I p, p> with I the inertia operator;
    this is the quadratic whose flow the commuting family certifies (the
    corresponding metric has inverse inertia on velocities).
    """
    geom = get_geometry(case)
    p = np.asarray(x.p, dtype=float)
    if kind == "normal":
        return 0.5 * float(p @ geom.gram_m @ p)
    if kind == "inertia":
        return 0.5 * float((geom.I_op @ p) @ geom.gram_m @ p)
    raise ValueError(f"unknown flow kind {kind!r}")


def hamiltonian_descriptor(case: HomogeneousCase, kind: str) -> QuadraticHamiltonian:
    geom = get_geometry(case)
    if kind == "normal":
        return QuadraticHamiltonian(geom, np.eye(geom.dm), "H[normal]")
    if kind == "inertia":
        return QuadraticHamiltonian(geom, geom.I_op, "H[inertia]")
    raise ValueError(f"unknown flow kind {kind!r}")


def _velocity(geom: CaseGeometry, kind: str, pm: np.ndarray) -> np.ndarray:
    return pm if kind == "normal" else geom.I_op @ pm


def flow_field(case: HomogeneousCase, kind: str, x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """(gdot, pdot): gdot = g X, pdot = [p, X] with X the momentum velocity."""
    geom = get_geometry(case)
    pm = np.asarray(x.p, dtype=float)
    X = _velocity(geom, kind, pm)
    gdot = x.g @ geom.rep_m(X)
    pdot_g = geom.bracket(geom.Bm @ pm, geom.Bm @ X)
    return gdot, geom.Pm @ pdot_g


def hamiltonian_field_from_bracket(case: HomogeneousCase, H: FunctionDescriptor,
                                   x: PhasePoint) -> tuple[np.ndarray, np.ndarray]:
    """Hamiltonian vector field of H read off the canonical bracket: returns
    (left-trivialized g-velocity in m-coords, pdot in m-coords). Fixes the sign
    convention: for H = (1/2)<p,p> this must equal flow_field(..., 'normal')."""
    geom = get_geometry(case)
    ep = EvalPoint(geom, x)
    Hdp, Hdg = H.partials(ep)
    XH = geom.gram_m_inv @ Hdp
    XHg = geom.Bm @ XH
    pg = geom.Bm @ ep.p
    pdot = np.zeros(geom.dm)
    for i in range(geom.dm):
        XF = geom.Bm @ geom.gram_m_inv[:, i]
        pdot[i] = -Hdg @ XF - geom.pair(pg, geom.bracket(XF, XHg))
    # pdot above are d<p, e_i-dual>/dt pairings through the raw-partial chain
    # rule; with dp-partials e_i the formula already yields the coordinate rates
    return XH, pdot


def _reproject(geom: CaseGeometry, g: np.ndarray) -> np.ndarray:
    """Bring g back to the group: structure average (family B), polar, det phase."""
    if geom.case.family == "B":
        N1 = geom.N // 2
        P, Q = g[:N1, :N1], g[:N1, N1:]
        R, S = g[N1:, :N1], g[N1:, N1:]
        tau = np.block([[S.conj(), R.conj()], [Q.conj(), P.conj()]])
        g = 0.5 * (g + tau)
    U, _, Vh = np.linalg.svd(g)
    g = U @ Vh
    if geom.case.family == "A":
        det = np.linalg.det(g)
        g = g * np.exp(-1j * np.angle(det) / geom.N)
    return g


@dataclass
class TrajectoryReport:
    times: np.ndarray
    step: float
    duration: float
    energy_drift: float
    unitarity_drift: float
    det_drift: float
    mu_drift: float
    k_component_drift: float
    per_integral_drifts: dict[str, float]

    def all_finite(self) -> bool:
        vals = [self.energy_drift, self.unitarity_drift, self.det_drift,
                self.mu_drift, self.k_component_drift,
                *self.per_integral_drifts.values()]
        return all(np.isfinite(v) for v in vals)


@dataclass
class TrajectoryResult:
    report: TrajectoryReport
    sampled_states: list[tuple[float, np.ndarray, np.ndarray]]  # (t, g, p m-coords)

    @property
    def final(self) -> PhasePoint:
        t, g, p = self.sampled_states[-1]
        return PhasePoint(g=g, p=p)


def integrate(case: HomogeneousCase, kind: str, x0: PhasePoint, step: float,
              duration: float, family: Sequence[FunctionDescriptor] = (),
              max_samples: int = 400) -> TrajectoryResult:
    """Classical fourth-order one-step integration of the geodesic flow in
    ambient coordinates; the group element is reprojected after every step.

    The momentum is carried in full g-coordinates so that conservation of the
    k-component (the right-K momentum constraint) is measured, not imposed.
    """
    if step <= 0 or duration <= 0:
        raise ValueError("step and duration must be positive")
    geom = get_geometry(case)
    nsteps = int(round(duration / step))
    sample_every = max(1, nsteps // max_samples)
    g = np.array(x0.g, dtype=complex)
    p = geom.Bm @ np.asarray(x0.p, dtype=float)  # g-coordinates

    def field(gx: np.ndarray, px: np.ndarray):
        X = _velocity(geom, kind, geom.Pm @ px)
        return gx @ geom.rep_m(X), geom.bracket(px, geom.Bm @ X)

    def sample(tval, gx, px):
        pm = geom.Pm @ px
        epoint = EvalPoint(geom, PhasePoint(gx, pm))
        mu = geom.expand_g(epoint.Mu)
        fam_vals = np.array([F.value(epoint) for F in family]) if family else np.zeros(0)
        return {
            "t": tval,
            "H": hamiltonian(case, kind, PhasePoint(gx, pm)),
            "unit": unitarity_defect(gx),
            "det": abs(np.linalg.det(gx) - 1.0),
            "mu": mu,
            "kcomp": float(np.abs(geom.Pk @ px).max()) if geom.Bk.size else 0.0,
            "fam": fam_vals,
            "state": (tval, gx.copy(), pm.copy()),
        }

    samples = [sample(0.0, g, p)]
    t = 0.0
    for istep in range(nsteps):
        k1g, k1p = field(g, p)
        k2g, k2p = field(g + 0.5 * step * k1g, p + 0.5 * step * k1p)
        k3g, k3p = field(g + 0.5 * step * k2g, p + 0.5 * step * k2p)
        k4g, k4p = field(g + step * k3g, p + step * k3p)
        g = g + (step / 6.0) * (k1g + 2 * k2g + 2 * k3g + k4g)
        p = p + (step / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        g = _reproject(geom, g)
        t += step
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(g))):
            raise FloatingPointError(f"trajectory blew up at t = {t:.6f}")
        if (istep + 1) % sample_every == 0 or istep == nsteps - 1:
            samples.append(sample(t, g, p))

    H0 = samples[0]["H"]
    mu0 = samples[0]["mu"]
    fam0 = samples[0]["fam"]
    fam_scale = np.maximum(np.abs(fam0), 1e-9) if fam0.size else fam0
    energy_drift = max(abs(s["H"] - H0) for s in samples) / max(abs(H0), 1e-12)
    mu_drift = max(float(np.abs(s["mu"] - mu0).max()) for s in samples)
    per_integral = {}
    if family:
        worst = np.zeros(len(family))
        for s in samples:
            worst = np.maximum(worst, np.abs(s["fam"] - fam0) / fam_scale)
        per_integral = {F.name: float(w) for F, w in zip(family, worst)}
    report = TrajectoryReport(
        times=np.array([s["t"] for s in samples]),
        step=step,
        duration=duration,
        energy_drift=float(energy_drift),
        unitarity_drift=max(s["unit"] for s in samples),
        det_drift=max(s["det"] for s in samples),
        mu_drift=float(mu_drift),
        k_component_drift=max(s["kcomp"] for s in samples),
        per_integral_drifts=per_integral,
    )
    return TrajectoryResult(report=report, sampled_states=[s["state"] for s in samples])


def conservation_report(case: HomogeneousCase, kind: str,
                        family: Sequence[FunctionDescriptor], x0: PhasePoint,
                        step: float, duration: float) -> TrajectoryReport:
    return integrate(case, kind, x0, step, duration, family=family).report


def mu_can(case: HomogeneousCase, x: PhasePoint) -> np.ndarray:
    """Ad_g p expanded in the g basis (the momentum of the left G-action)."""
    geom = get_geometry(case)
    ep = EvalPoint(geom, x)
    return geom.expand_g(ep.Mu)


def nu_component(case: HomogeneousCase, i: int, x: PhasePoint) -> np.ndarray:
    """Ad_g pr_i^* p in g coordinates (momentum of the projected action)."""
    geom = get_geometry(case)
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    P = geom.pr1s if i == 1 else geom.pr2s
    M = x.g @ geom.rep_m(P @ np.asarray(x.p, float)) @ x.g.conj().T
    return geom.expand_g(M)


def mu_lambda(case: HomogeneousCase, lam: float, x: PhasePoint) -> np.ndarray:
    """Ad_g ((n - lam)^*)^{-1} p in g coordinates; lam must avoid the spectrum."""
    geom = get_geometry(case)
    S = geom.fiber_resolvent(lam)
    M = x.g @ geom.rep_m(S @ np.asarray(x.p, float)) @ x.g.conj().T
    return geom.expand_g(M)


# ---------------------------------------------------------------------------
# families, involution, independence, pencil ranks
# ---------------------------------------------------------------------------

DEFAULT_LAMBDA_GRID = (-1.0, 0.25, 2.0, 5.0)
_GRID_FALLBACKS = (-2.0, 0.4, 3.0, 7.0, -0.5, 1.5)


def _finite_lambda_grid(geom: CaseGeometry, grid: Sequence[float] | None) -> list[float]:
    evs = (geom.lam1, geom.lam2)
    if grid is not None:
        vals = [float(l) for l in grid]
        for l in vals:
            if any(abs(l - e) < 1e-12 for e in evs):
                raise ValueError(f"lambda grid value {l} hits an eigenvalue")
        return vals
    vals = [l for l in DEFAULT_LAMBDA_GRID if all(abs(l - e) > 1e-12 for e in evs)]
    for cand in _GRID_FALLBACKS:
        if len(vals) == len(DEFAULT_LAMBDA_GRID):
            break
        if all(abs(cand - e) > 1e-12 for e in evs) and cand not in vals:
            vals.append(cand)
    return vals


def _random_regular_direction(case: HomogeneousCase, seed: int) -> np.ndarray:
    """Seeded regular element of g (coordinates), unit pairing norm."""
    from .indexes import lie_index

    geom = get_geometry(case)
    rng = np.random.default_rng(seed)
    ind = lie_index(case.g, samples=3, method="floating_svd", seed=seed).index
    for _ in range(50):
        a = rng.integers(-9, 10, size=geom.d).astype(float)
        if not np.any(a):
            continue
        M = np.einsum("jki,i->jk", geom.c, a)
        s = np.linalg.svd(M, compute_uv=False)
        corank = geom.d - int((s > 1e-8 * s[0]).sum())
        if corank == ind:
            return a / math.sqrt(abs(a @ geom.gram_g @ a))
    raise RuntimeError("could not sample a regular shift direction")


def _normalize_family(geom: CaseGeometry, fam: list[FunctionDescriptor],
                      seed: int) -> None:
    """Scale each member to unit gradient norm at one reference point (keeps
    floating round-off in bracket evaluations at a common scale)."""
    ref = random_phase_points(geom.case, 1, seed=seed + 1)[0]
    ep = EvalPoint(geom, ref)
    for F in fam:
        dp, dg = F.partials(ep)
        norm = math.sqrt(float(dp @ dp + dg @ dg))
        if norm > 1e-12:
            F.scale = F.scale / norm


def build_family(case: HomogeneousCase, which: str = "AB",
                 lambda_grid: Sequence[float] | None = None,
                 seed: int = 42, prune: bool = True,
                 normalize: bool = True) -> list[FunctionDescriptor]:
    """Integral families: 'A' = argument-shift pullbacks of invariants through
    mu_can, 'B' = pencil Casimirs (pullbacks of invariants through mu_lambda
    over the grid, plus the lam = infinity member), 'AB' = union with
    gradient-rank pruning of duplicates."""
    geom = get_geometry(case)
    which = which.upper()
    fam: list[FunctionDescriptor] = []
    if which in ("A", "AB"):
        a = _random_regular_direction(case, seed)
        a_mat = geom.rep_g(a)
        for inv in geom.invariants:
            for j in range(inv[1]):
                fam.append(ShiftInvariant(geom, inv, j, a_mat))
    if which in ("B", "AB"):
        grid = _finite_lambda_grid(geom, lambda_grid)
        for lam in grid:
            for inv in geom.invariants:
                fam.append(PencilCasimir(geom, inv, lam))
        for inv in geom.invariants:
            fam.append(PencilCasimir(geom, inv, None))
    if normalize:
        _normalize_family(geom, fam, seed)
    if prune and which == "AB":
        fam = _prune_by_gradient_rank(geom, fam, seed)
    return fam


def _gradient_rows(geom: CaseGeometry, fam: Sequence[FunctionDescriptor],
                   pts: Sequence[PhasePoint]) -> list[np.ndarray]:
    """Stacked differential rows per point: rows[i] is (#fam x (dm + d))."""
    out = []
    for pt in pts:
        ep = EvalPoint(geom, pt)
        rows = []
        for F in fam:
            dp, dg = F.partials(ep)
            rows.append(np.concatenate([dp, dg]))
        out.append(np.array(rows))
    return out


def _prune_by_gradient_rank(geom: CaseGeometry, fam: list[FunctionDescriptor],
                            seed: int) -> list[FunctionDescriptor]:
    pts = random_phase_points(geom.case, 3, seed=seed + 2)
    stacks = _gradient_rows(geom, fam, pts)
    joint = np.hstack(stacks)  # each row: concatenated gradients over points
    kept: list[int] = []
    current: list[np.ndarray] = []
    for i in range(len(fam)):
        candidate = current + [joint[i]]
        s = np.linalg.svd(np.array(candidate), compute_uv=False)
        if int((s > 1e-8 * s[0]).sum()) == len(candidate):
            kept.append(i)
            current = candidate
    return [fam[i] for i in kept]


def involution_matrix(case: HomogeneousCase, family: Sequence[FunctionDescriptor],
                      points: Sequence[PhasePoint] | int = 20, seed: int = 42
                      ) -> tuple[float, np.ndarray]:
    """Max |{F_i, F_j}| over the points, and the elementwise max matrix."""
    geom = get_geometry(case)
    if isinstance(points, int):
        points = random_phase_points(case, points, seed=seed)
    nf = len(family)
    worst = np.zeros((nf, nf))
    for pt in points:
        ep = EvalPoint(geom, pt)
        ds = [F.partials(ep) for F in family]
        for i in range(nf):
            for j in range(i + 1, nf):
                v = abs(_bracket_from_partials(geom, ds[i], ds[j], ep.p, (1.0, 0.0)))
                if v > worst[i, j]:
                    worst[i, j] = v
                    worst[j, i] = v
    return float(worst.max(initial=0.0)), worst


def independence_rank(case: HomogeneousCase, family: Sequence[FunctionDescriptor],
                      points: Sequence[PhasePoint] | int = 20, seed: int = 42,
                      rel_tol: float = 1e-8) -> tuple[int, list[int]]:
    """Numeric rank of stacked differentials per point; returns (max, per-point)."""
    geom = get_geometry(case)
    if isinstance(points, int):
        points = random_phase_points(case, points, seed=seed)
    ranks = []
    for stack in _gradient_rows(geom, family, points):
        s = np.linalg.svd(stack, compute_uv=False)
        ranks.append(int((s > rel_tol * s[0]).sum()))
    return max(ranks), ranks


def default_probe_family(case: HomogeneousCase,
                         lambda_grid: Sequence[float] | None = None
                         ) -> list[FunctionDescriptor]:
    """Probe functions spanning the reduced cotangent space: components of
    mu_can, of the momentum maps nu_i, of the eigenprojection moments, and the
    pencil-Casimir family."""
    geom = get_geometry(case)
    probes: list[FunctionDescriptor] = []
    eye = np.eye(geom.d)
    for a in range(geom.d):
        probes.append(MomentComponent(geom, eye[a], None, name=f"mu[{a}]"))
    for a in range(geom.d):
        probes.append(MomentComponent(geom, eye[a], geom.pr1s, name=f"nu1[{a}]"))
    for a in range(geom.d):
        probes.append(MomentComponent(geom, eye[a], geom.pr1, name=f"pr1mom[{a}]"))
    for lam in _finite_lambda_grid(geom, lambda_grid):
        for inv in geom.invariants:
            probes.append(PencilCasimir(geom, inv, lam))
    return probes


@dataclass
class PencilRankReport:
    t: float
    ranks: list[int]
    span_ranks: list[int]
    expected_span: int

    @property
    def rank(self) -> int:
        return max(self.ranks)

    @property
    def span_ok(self) -> bool:
        return all(r == self.expected_span for r in self.span_ranks)


def pencil_rank_probe(case: HomogeneousCase, t: float,
                      probes: Sequence[FunctionDescriptor] | None = None,
                      points: Sequence[PhasePoint] | int = 5, seed: int = 42,
                      rel_tol: float = 1e-8) -> PencilRankReport:
    """Rank of the Gram matrix G_ij = {F_i, F_j} for the pencil member
    Pi_1 - t Pi, over the probe family, at each point."""
    geom = get_geometry(case)
    if probes is None:
        probes = default_probe_family(case)
    if isinstance(points, int):
        points = random_phase_points(case, points, seed=seed)
    ranks, span_ranks = [], []
    for pt in points:
        ep = EvalPoint(geom, pt)
        ds = [F.partials(ep) for F in probes]
        stack = np.array([np.concatenate([dp, dg]) for dp, dg in ds])
        sv = np.linalg.svd(stack, compute_uv=False)
        span_ranks.append(int((sv > 1e-7 * sv[0]).sum()))
        nf = len(probes)
        Gr = np.zeros((nf, nf))
        for i in range(nf):
            for j in range(i + 1, nf):
                v = _bracket_from_partials(geom, ds[i], ds[j], ep.p, (-t, 1.0))
                Gr[i, j] = v
                Gr[j, i] = -v
        s = np.linalg.svd(Gr, compute_uv=False)
        ranks.append(int((s > rel_tol * s[0]).sum()))
    return PencilRankReport(t=float(t), ranks=ranks, span_ranks=span_ranks,
                            expected_span=2 * geom.dm)
