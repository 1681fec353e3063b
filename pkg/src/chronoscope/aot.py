"""Spacetime lattice, the local arrow-of-time vectorfield, entropy maps, and
the leading-order purity-difference approximation.

The vector at lattice point (t, x) is the causal-influence-weighted sum of
displacement vectors from the eight box neighbors; equal-time neighbors carry
exactly zero influence and future neighbors are evaluated with signed
(backward) evolution time.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from chronoscope.causal import ci_weight, variance_from_nu
from chronoscope.hamlib import HamiltonianSpec, SiteChannelBasis, evolve
from chronoscope.qcore import (
    StateVector,
    partial_trace,
    purity,
    renyi2_entropy,
    schmidt_split,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class SpacetimeLattice:
    n_sites: int
    dx: float
    dt: float
    n_steps: int
    trajectory: tuple[StateVector, ...]
    H: HamiltonianSpec
    tol: float = 1e-12

    @classmethod
    def build(cls, initial: StateVector, H: HamiltonianSpec, dt: float, n_steps: int,
              dx: float = 1.0, tol: float = 1e-12) -> "SpacetimeLattice":
        traj = [initial]
        for _ in range(n_steps):
            traj.append(evolve(traj[-1], H, dt, tol).state)
        return cls(initial.n_qubits, dx, dt, n_steps, tuple(traj), H, tol)

    @property
    def n_slices(self) -> int:
        return self.n_steps + 1


@dataclass(frozen=True)
class Contribution:
    """One neighbor's term of the arrow-of-time sum."""

    t_index: int
    x_index: int
    ci: float
    v_t: float
    v_x: float


@dataclass(frozen=True)
class AotVector:
    t_index: int
    x_index: int
    v_t: float
    v_x: float
    contributions: tuple[Contribution, ...]


@dataclass(frozen=True)
class EntropyMap:
    von_neumann: np.ndarray  # (n_slices, n_sites)
    renyi2: np.ndarray


@dataclass(frozen=True)
class AotField:
    vectors: tuple[tuple[AotVector, ...], ...]  # [t_index][x_index]
    entropy: EntropyMap
    lattice: SpacetimeLattice


def neighborhood(lattice: SpacetimeLattice, t_index: int, x_index: int) -> list[tuple[int, int]]:
    """Box neighbors of (t, x) inside the lattice (up to 8)."""
    if not (0 <= t_index < lattice.n_slices and 0 <= x_index < lattice.n_sites):
        raise ValueError(f"lattice point ({t_index}, {x_index}) out of range")
    out = []
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if a == 0 and b == 0:
                continue
            ti, xi = t_index + a, x_index + b
            if 0 <= ti < lattice.n_slices and 0 <= xi < lattice.n_sites:
                out.append((ti, xi))
    return out


class LatticeCiEngine:
    """Caches Schmidt splits and evolved channel bases of a trajectory.

    The expensive step per (kick slice, kick site, direction) is four Krylov
    evolutions; every target site reuses them.
    """

    def __init__(self, lattice: SpacetimeLattice):
        self.lattice = lattice
        self._pairs: dict[tuple[int, int], object] = {}
        self._bases: dict[tuple[int, int, int], SiteChannelBasis] = {}

    def schmidt(self, k: int, q: int):
        key = (k, q)
        if key not in self._pairs:
            self._pairs[key] = schmidt_split(self.lattice.trajectory[k], q)
        return self._pairs[key]

    def basis(self, k: int, q: int, step: int) -> SiteChannelBasis:
        key = (k, q, step)
        if key not in self._bases:
            pair = self.schmidt(k, q)
            self._bases[key] = SiteChannelBasis(
                self.lattice.H, q, step * self.lattice.dt,
                pair.complement_vectors, tol=self.lattice.tol,
            )
        return self._bases[key]

    def evict_before(self, k: int) -> None:
        for store in (self._pairs, self._bases):
            for key in [key for key in store if key[0] < k]:
                del store[key]

    def ci(self, k_from: int, q: int, k_to: int, x: int) -> float:
        """Causal influence from lattice point (k_from, q) on (k_to, x)."""
        if k_from == k_to:
            if q == x:
                raise ValueError("a point does not neighbor itself")
            return 0.0  # equal-time disjoint regions: exactly acausal
        pair = self.schmidt(k_from, q)
        basis = self.basis(k_from, q, k_to - k_from)
        total = 0.0
        for alpha in "XYZ":
            total += variance_from_nu(pair.weights[0], pair.weights[1],
                                      basis.nu_elements(alpha, x))
        return ci_weight(2) * total


def aot_vector(lattice: SpacetimeLattice, t_index: int, x_index: int,
               engine: LatticeCiEngine | None = None) -> AotVector:
    """Arrow-of-time vector at one lattice point."""
    engine = engine or LatticeCiEngine(lattice)
    contribs = []
    for ti, xi in neighborhood(lattice, t_index, x_index):
        ci = engine.ci(ti, xi, t_index, x_index)
        v_t = (t_index - ti) * lattice.dt
        v_x = (x_index - xi) * lattice.dx
        contribs.append(Contribution(ti, xi, ci, v_t, v_x))
    v_t = sum(c.ci * c.v_t for c in contribs)
    v_x = sum(c.ci * c.v_x for c in contribs)
    return AotVector(t_index, x_index, v_t, v_x, tuple(contribs))


def entropy_map(lattice: SpacetimeLattice) -> EntropyMap:
    vn = np.empty((lattice.n_slices, lattice.n_sites))
    r2 = np.empty_like(vn)
    for k, state in enumerate(lattice.trajectory):
        for x in range(lattice.n_sites):
            rho = partial_trace(state, (x,))
            vn[k, x] = von_neumann_entropy(rho)
            r2[k, x] = renyi2_entropy(rho)
    return EntropyMap(vn, r2)


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CHRONOSCOPE_THREADS", "1")))
    except ValueError:
        return 1


def aot_field(lattice: SpacetimeLattice) -> AotField:
    """Arrow-of-time vectors on the full grid plus the entropy heat map.

    Grid points are independent; the channel bases per (slice, site,
    direction) are precomputed (optionally in parallel, CHRONOSCOPE_THREADS)
    and shared between the up-to-three points each basis feeds.
    """
    engine = LatticeCiEngine(lattice)
    jobs = []
    for k in range(lattice.n_slices):
        for q in range(lattice.n_sites):
            if k + 1 < lattice.n_slices:
                jobs.append((k, q, 1))
            if k - 1 >= 0:
                jobs.append((k, q, -1))
    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda j: engine.basis(*j), jobs))
    rows = []
    for k in range(lattice.n_slices):
        rows.append(tuple(aot_vector(lattice, k, x, engine) for x in range(lattice.n_sites)))
        engine.evict_before(k)  # slices < k no longer feed any remaining point
    return AotField(tuple(rows), entropy_map(lattice), lattice)


def aot_leading(state_t: StateVector, H: HamiltonianSpec, x: int, dt: float,
                tol: float = 1e-12) -> AotVector:
    """Leading-order (purely temporal) arrow of time at site x from the local
    purity change over one step: 2(purity(t) - purity(t+dt))/10 times the
    forward displacement dt."""
    p_now = purity(partial_trace(state_t, (x,)))
    nxt = evolve(state_t, H, dt, tol).state
    p_next = purity(partial_trace(nxt, (x,)))
    coeff = 2.0 * (p_now - p_next) / 10.0
    return AotVector(0, x, coeff * dt, 0.0, ())
