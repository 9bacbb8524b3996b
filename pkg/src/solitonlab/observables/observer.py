"""Per-snapshot measurement of every observable.

The integrals over the halo involve the kinked cutoff and the sharp mask
{1 < rho < 2}; on the evolution grid their quadrature error is far above the
size of the terms being measured.  Snapshots are therefore interpolated onto
a finer grid (``oversample``) before the decomposition is evaluated.  First
integrals are computed on the evolution grid itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import grid as sp
from ..model import ComplexField, NonlinearitySpec, PhysicalParams, PotentialSpec
from .decomposition import (
    build_kernel, concentration_point, decompose, halo_in_annulus, soliton_state,
)
from .energy import energy_report
from .halo import halo_terms


@dataclass(frozen=True)
class Sample:
    """Everything measured at one time: the row of the emitted time series."""

    t: float
    q: tuple
    p: tuple
    m_eps: float
    E_total: float
    J_internal: float
    G_dynamical: float
    C_charge: float
    P_total: tuple
    K: tuple
    H: tuple
    H1: tuple
    H2: tuple
    F: tuple
    qhat: tuple
    f_value: float
    halo_contained: bool
    halo_r_min: float
    halo_r_max: float
    degenerate: bool = False


@dataclass
class Observer:
    """Callable turning a snapshot into a :class:`Sample`.

    ``profile`` is the rescaled ground state U_eps sampled on the evolution
    grid and centred at the box origin; it is only used for the
    concentration point.
    """

    grid: object
    spec: NonlinearitySpec
    params: PhysicalParams
    potential: PotentialSpec
    eta: float
    profile: Optional[np.ndarray] = None
    oversample: int = 8
    _fine: object = field(init=False, repr=False)
    _kernel: object = field(init=False, repr=False)
    _profile_fine: object = field(init=False, repr=False)

    def __post_init__(self):
        self._fine = self.grid.refined(self.oversample)
        self._kernel = build_kernel(self.eta, self._fine)
        self._profile_fine = (None if self.profile is None
                              else sp.upsample(np.asarray(self.profile, float), self.grid, self.oversample))

    @property
    def kernel(self):
        return self._kernel

    def fine_field(self, psi: ComplexField) -> ComplexField:
        return ComplexField(self._fine, sp.upsample(psi.values, self.grid, self.oversample), psi.t)

    def __call__(self, psi: ComplexField) -> Sample:
        er = energy_report(psi, self.spec, self.params, self.potential)
        fine = self.fine_field(psi)
        dec = decompose(fine, self._kernel)
        dim = self.grid.dim
        nan = (float("nan"),) * dim
        if self._profile_fine is not None:
            qhat, fval = concentration_point(fine, self._profile_fine)
            qhat = tuple(float(v) for v in qhat)
        else:
            qhat, fval = nan, float("nan")
        if dec.degenerate:
            return Sample(
                t=psi.t, q=nan, p=nan, m_eps=0.0, E_total=er.total, J_internal=er.internal,
                G_dynamical=er.dynamical, C_charge=er.charge, P_total=er.momentum,
                K=nan, H=nan, H1=nan, H2=nan, F=nan, qhat=qhat, f_value=fval,
                halo_contained=False, halo_r_min=float("nan"), halo_r_max=float("nan"),
                degenerate=True,
            )
        st = soliton_state(dec, fine, self.params)
        ht = halo_terms(fine, dec, st, self._kernel, self.spec, self.params, self.potential)
        if self._profile_fine is not None:
            ok, rmin, rmax = halo_in_annulus(dec, qhat, self._fine)
        else:
            ok, rmin, rmax = False, float("nan"), float("nan")
        return Sample(
            t=psi.t, q=st.q, p=st.p, m_eps=st.mass, E_total=er.total, J_internal=er.internal,
            G_dynamical=er.dynamical, C_charge=er.charge, P_total=er.momentum,
            K=ht.K, H=ht.H, H1=ht.H1, H2=ht.H2, F=ht.F, qhat=qhat, f_value=fval,
            halo_contained=ok, halo_r_min=rmin, halo_r_max=rmax,
        )


def stack(samples, name: str) -> np.ndarray:
    """Column ``name`` of a sample list as an array (n,) or (n, dim)."""
    return np.array([getattr(s, name) for s in samples], dtype=float)
